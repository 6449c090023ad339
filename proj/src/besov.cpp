#include "fracks/besov.hpp"

#include "fracks/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fracks {

namespace {

constexpr double kLow = 0.75;
constexpr double kHigh = 8.0 / 3.0;
constexpr int kMinShells = 4;

double psi(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }

std::vector<double> magnitude(const VectorField& f) {
    std::vector<double> mag;
    for (const auto& c : f) {
        const std::vector<double> v = dft_inverse(c);
        if (mag.empty()) mag.assign(v.size(), 0.0);
        for (std::size_t i = 0; i < v.size(); ++i) mag[i] += v[i] * v[i];
    }
    for (double& m : mag) m = std::sqrt(m);
    return mag;
}

double lr_combine(const std::vector<double>& seq, double r) {
    if (std::isinf(r)) {
        double m = 0.0;
        for (double x : seq) m = std::max(m, x);
        return m;
    }
    double sum = 0.0;
    for (double x : seq) sum += std::pow(x, r);
    return std::pow(sum, 1.0 / r);
}

}  // namespace

double DyadicCutoff::chi(double u) {
    return psi((kHigh - u) / (kHigh - 2.0)) * psi((u - kLow) / (1.0 - kLow));
}

double DyadicCutoff::phi(int j, double xi_norm) {
    if (!(xi_norm > 0.0)) return 0.0;
    const double u = std::ldexp(xi_norm, -j);
    const double c = chi(u);
    if (c == 0.0) return 0.0;
    // every k with xi 2^-k inside (3/4, 8/3)
    const double l2 = std::log2(xi_norm);
    const int k_lo = static_cast<int>(std::floor(l2 - std::log2(kHigh))) - 1;
    const int k_hi = static_cast<int>(std::ceil(l2 - std::log2(kLow))) + 1;
    double denom = 0.0;
    for (int k = k_lo; k <= k_hi; ++k) denom += chi(std::ldexp(xi_norm, -k));
    return c / denom;
}

DyadicCutoff::DyadicCutoff(const Grid& grid) : grid_(grid) {
    const double xi_min = grid.xi_unit();
    resolved_xi_ = grid.xi_unit() * std::sqrt(static_cast<double>(grid.dim())) * (grid.n() / 3);
    j_min_ = static_cast<int>(std::floor(std::log2(xi_min / kHigh))) - 1;
    while (!(kHigh * std::ldexp(1.0, j_min_) > xi_min)) ++j_min_;
    while (kHigh * std::ldexp(1.0, j_min_ - 1) > xi_min) --j_min_;
    j_max_ = static_cast<int>(std::ceil(std::log2(resolved_xi_ / kLow))) + 1;
    while (!(kLow * std::ldexp(1.0, j_max_) < resolved_xi_)) --j_max_;
    if (shells() < kMinShells) {
        std::ostringstream os;
        os << "DyadicCutoff: grid with n = " << grid.n() << ", L = " << grid.half_width()
           << " resolves only " << std::max(0, shells()) << " dyadic shells, need at least " << kMinShells;
        throw ParameterError(os.str());
    }
    tables_.reserve(static_cast<std::size_t>(shells()));
    for (int j = j_min_; j <= j_max_; ++j)
        tables_.push_back(radial_table(grid, [j](double xi) { return phi(j, xi); }, 0.0));
}

const std::vector<double>& DyadicCutoff::table(int j) const {
    if (j < j_min_ || j > j_max_) {
        std::ostringstream os;
        os << "DyadicCutoff: block " << j << " outside [" << j_min_ << ", " << j_max_ << "]";
        throw RangeError(os.str());
    }
    return tables_[static_cast<std::size_t>(j - j_min_)];
}

double DyadicCutoff::partition_defect() const {
    const int cap = grid_.n() / 3;
    double worst = 0.0;
    for (std::size_t i = 1; i < grid_.size(); ++i) {
        const auto k = grid_.wavevector(i);
        bool resolved = true;
        for (int a = 0; a < grid_.dim(); ++a) resolved = resolved && std::abs(k[a]) <= cap;
        if (!resolved) continue;
        const long k2 = grid_.k_norm2(i);
        double sum = 0.0;
        for (const auto& t : tables_) sum += t[k2];
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    return worst;
}

void BesovParams::validate() const {
    std::ostringstream os;
    if (!(p >= 1.0)) os << "BesovParams: p must be >= 1, got " << p;
    else if (!(r >= 1.0)) os << "BesovParams: r must be >= 1, got " << r;
    else if (!std::isfinite(s)) os << "BesovParams: s must be finite, got " << s;
    else return;
    throw ParameterError(os.str());
}

SpectralField lp_block(const SpectralField& f, const DyadicCutoff& cutoff, int j) {
    require_same_grid(f.grid(), cutoff.grid(), "lp_block");
    return apply_table(f, cutoff.table(j));
}

LPBlocks lp_decompose(const SpectralField& f, const DyadicCutoff& cutoff) {
    require_same_grid(f.grid(), cutoff.grid(), "lp_decompose");
    LPBlocks out;
    SpectralField rest = f;
    rest[0] = 0.0;
    for (int j = cutoff.j_min(); j <= cutoff.j_max(); ++j) {
        SpectralField b = lp_block(f, cutoff, j);
        rest -= b;
        out.blocks.emplace(j, std::move(b));
    }
    out.residual_mass = coeff_l2_norm(rest);
    return out;
}

std::vector<double> besov_profile(const VectorField& f, const BesovParams& params,
                                  const DyadicCutoff& cutoff) {
    params.validate();
    if (f.empty()) throw ShapeError("besov_norm: empty vector field");
    std::vector<double> seq;
    seq.reserve(static_cast<std::size_t>(cutoff.shells()));
    for (int j = cutoff.j_min(); j <= cutoff.j_max(); ++j) {
        VectorField blocks;
        blocks.reserve(f.size());
        for (const auto& c : f) blocks.push_back(lp_block(c, cutoff, j));
        seq.push_back(std::exp2(j * params.s) * grid_lp_norm(cutoff.grid(), magnitude(blocks), params.p));
    }
    return seq;
}

double besov_norm(const VectorField& f, const BesovParams& params, const DyadicCutoff& cutoff) {
    return lr_combine(besov_profile(f, params, cutoff), params.r);
}

double besov_norm(const SpectralField& f, const BesovParams& params, const DyadicCutoff& cutoff) {
    params.validate();
    require_same_grid(f.grid(), cutoff.grid(), "besov_norm");
    std::vector<double> seq;
    seq.reserve(static_cast<std::size_t>(cutoff.shells()));
    for (int j = cutoff.j_min(); j <= cutoff.j_max(); ++j) {
        const std::vector<double> v = dft_inverse(lp_block(f, cutoff, j));
        seq.push_back(std::exp2(j * params.s) * grid_lp_norm(cutoff.grid(), v, params.p));
    }
    return lr_combine(seq, params.r);
}

namespace {

// Pieces of a field keyed by dyadic index: the mean sits at j_min - 2, the
// modes no block covers at j_max + 2.
std::map<int, SpectralField> pieces(const SpectralField& f, const DyadicCutoff& cutoff) {
    std::map<int, SpectralField> out;
    SpectralField mean(f.grid());
    mean[0] = f[0];
    SpectralField rest = f;
    rest[0] = 0.0;
    for (int j = cutoff.j_min(); j <= cutoff.j_max(); ++j) {
        SpectralField b = lp_block(f, cutoff, j);
        rest -= b;
        out.emplace(j, std::move(b));
    }
    out.emplace(cutoff.j_min() - 2, std::move(mean));
    out.emplace(cutoff.j_max() + 2, std::move(rest));
    return out;
}

SpectralField paraproduct(const std::map<int, SpectralField>& low, const std::map<int, SpectralField>& high) {
    const Grid& grid = low.begin()->second.grid();
    SpectralField acc(grid), partial(grid);
    auto lo = low.begin();
    for (const auto& [j, block] : high) {
        while (lo != low.end() && lo->first <= j - 2) {
            partial += lo->second;
            ++lo;
        }
        acc += pointwise_product(partial, block);
    }
    return acc;
}

}  // namespace

BonySplit bony_split(const SpectralField& f, const SpectralField& g, const DyadicCutoff& cutoff) {
    require_same_grid(f.grid(), g.grid(), "bony_split");
    require_same_grid(f.grid(), cutoff.grid(), "bony_split");
    const auto F = pieces(f, cutoff);
    const auto G = pieces(g, cutoff);
    BonySplit out{paraproduct(F, G), paraproduct(G, F), SpectralField(f.grid())};
    for (const auto& [j, fj] : F) {
        SpectralField near(f.grid());
        for (int d = -1; d <= 1; ++d) {
            const auto it = G.find(j + d);
            if (it != G.end()) near += it->second;
        }
        out.R += pointwise_product(fj, near);
    }
    return out;
}

BernsteinResult bernstein_check(const SpectralField& f, int j, double p, double q,
                                const DyadicCutoff& cutoff) {
    require_same_grid(f.grid(), cutoff.grid(), "bernstein_check");
    if (!(q >= 1.0 && p >= q)) {
        std::ostringstream os;
        os << "bernstein_check: need 1 <= q <= p, got p = " << p << ", q = " << q;
        throw ParameterError(os.str());
    }
    const Grid& grid = f.grid();
    double cmax = 0.0;
    for (const auto& c : f.coeffs()) cmax = std::max(cmax, std::abs(c));
    const double lo = kLow * std::ldexp(1.0, j) * (1.0 - 1e-12);
    const double hi = kHigh * std::ldexp(1.0, j) * (1.0 + 1e-12);
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (std::abs(f[i]) <= 1e-13 * cmax) continue;
        const double xi = grid.xi_norm(i);
        if (xi < lo || xi > hi) {
            std::ostringstream os;
            os << "bernstein_check: spectrum at |xi| = " << xi << " lies outside the annulus D_" << j
               << " = [" << lo << ", " << hi << "]";
            throw ParameterError(os.str());
        }
    }
    const std::vector<double> v = dft_inverse(f);
    const double n = grid.dim();
    BernsteinResult r;
    r.lhs = grid_lp_norm(grid, v, p);
    const double rhs = std::exp2(j * (n / q - n / p)) * grid_lp_norm(grid, v, q);
    r.ratio = rhs > 0.0 ? r.lhs / rhs : 0.0;
    return r;
}

double conjugate_exponent(double p) {
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    if (std::isinf(p)) return 1.0;
    return p / (p - 1.0);
}

void ProductParams::check(int dim) const {
    const double n = dim;
    const double p_low = 6.0 * n / (5.0 * n + theta1);
    std::ostringstream os;
    if (!(theta1 >= 0.0 && theta1 < n)) {
        os << "0 <= theta1 < n violated (theta1 = " << theta1 << ")";
    } else if (!(p > p_low)) {
        os << "6n/(5n + theta1) = " << p_low << " < p violated (p = " << p << ")";
    } else if (!(p <= q)) {
        os << "p <= q violated (p = " << p << ", q = " << q << ")";
    } else if (!(q <= conjugate_exponent(p))) {
        os << "q <= p' = " << conjugate_exponent(p) << " violated (q = " << q << ")";
    } else if (!(rho1 >= 0.0 && rho2 >= 0.0)) {
        os << "rho1, rho2 >= 0 violated (rho1 = " << rho1 << ", rho2 = " << rho2 << ")";
    } else {
        ModelParams m;
        m.theta = theta;
        m.theta1 = theta1;
        const std::string w = m.window_violation(dim, p);
        if (w.empty()) return;
        os << w;
    }
    throw ParameterError("product estimate hypothesis " + os.str());
}

double product_estimate_check(const SpectralField& f, const SpectralField& g,
                              const ProductParams& params, const DyadicCutoff& cutoff) {
    const int dim = f.grid().dim();
    params.check(dim);
    require_same_grid(f.grid(), g.grid(), "product_estimate_check");
    const VectorField G = g_kernel(g, params.theta1);
    VectorField fG;
    fG.reserve(G.size());
    for (const auto& c : G) fG.push_back(pointwise_product(f, c));
    const double num = besov_norm(fG, {params.s0(dim), params.p, INFINITY}, cutoff);
    if (num == 0.0) return 0.0;
    const double den = besov_norm(f, {params.s1(dim), params.p, INFINITY}, cutoff) *
                       besov_norm(g, {params.s2(dim), params.q, INFINITY}, cutoff);
    return num / den;
}

}  // namespace fracks
