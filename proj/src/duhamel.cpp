#include "fracks/duhamel.hpp"

#include "fracks/errors.hpp"
#include "fracks/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace fracks {

TimeMesh::TimeMesh(double t_final, std::size_t n_steps, double grading)
    : t_final_(t_final), grading_(grading) {
    if (!(t_final > 0.0) || !std::isfinite(t_final)) {
        std::ostringstream os;
        os << "TimeMesh: t_final must be positive and finite, got " << t_final;
        throw ParameterError(os.str());
    }
    if (n_steps < 1) throw ParameterError("TimeMesh: need at least one step");
    if (!(grading >= 1.0)) {
        std::ostringstream os;
        os << "TimeMesh: grading exponent must be >= 1, got " << grading;
        throw ParameterError(os.str());
    }
    nodes_.resize(n_steps + 1);
    for (std::size_t i = 0; i <= n_steps; ++i) {
        const double r = static_cast<double>(i) / static_cast<double>(n_steps);
        nodes_[i] = grading == 1.0 ? t_final * r : t_final * std::pow(r, grading);
    }
    nodes_.back() = t_final;
}

TimeMesh TimeMesh::graded(double t_final, std::size_t n_steps, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        std::ostringstream os;
        os << "TimeMesh::graded: alpha must lie in (0, 1], got " << alpha;
        throw ParameterError(os.str());
    }
    return TimeMesh(t_final, n_steps, 2.0 / alpha);
}

void History::append(SpectralField eta_i, SpectralField v_i) {
    require_same_grid(eta_i.grid(), v_i.grid(), "History::append");
    if (!eta.empty()) require_same_grid(eta.front().grid(), eta_i.grid(), "History::append");
    eta.push_back(std::move(eta_i));
    v.push_back(std::move(v_i));
}

void History::validate() const {
    if (eta.size() != v.size()) {
        std::ostringstream os;
        os << "History: " << eta.size() << " eta snapshots but " << v.size() << " v snapshots";
        throw ShapeError(os.str());
    }
    for (std::size_t i = 0; i < eta.size(); ++i) {
        require_same_grid(eta.front().grid(), eta[i].grid(), "History");
        require_same_grid(eta.front().grid(), v[i].grid(), "History");
    }
}

namespace {

// Weights from the kernel moments F0(s) = int_0^s K, F1(s) = int_0^s u K(u) du,
// given at s_i = t_n - t_i for i = 0..n. Intervals far from the singularity
// (width below kMidpointRatio times their distance) use the midpoint rule on K.
constexpr double kMidpointRatio = 1e-6;

template <class Kernel>
std::vector<double> weights_from_moments(const TimeMesh& mesh, std::size_t n, const std::vector<double>& s,
                                         const std::vector<double>& F0, const std::vector<double>& F1,
                                         const Kernel& kernel) {
    std::vector<double> w(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double h = mesh.is_uniform() ? s[i] - s[i + 1] : mesh[i + 1] - mesh[i];
        double K0, wi;
        if (s[i + 1] > 0.0 && h < kMidpointRatio * s[i + 1]) {
            const double k = kernel(s[i + 1] + 0.5 * h);
            K0 = h * k;
            wi = 0.5 * h * k;
        } else {
            K0 = F0[i] - F0[i + 1];
            wi = (F1[i] - F1[i + 1] - s[i + 1] * K0) / h;
        }
        w[i] += wi;
        w[i + 1] += K0 - wi;
    }
    return w;
}

std::vector<double> offsets(const TimeMesh& mesh, std::size_t n) {
    std::vector<double> s(n + 1);
    if (mesh.is_uniform()) {
        const double h = mesh.t_final() / static_cast<double>(mesh.n_steps());
        for (std::size_t i = 0; i <= n; ++i) s[i] = static_cast<double>(n - i) * h;
    } else {
        for (std::size_t i = 0; i <= n; ++i) s[i] = mesh[n] - mesh[i];
        s[n] = 0.0;
    }
    return s;
}

void check_row(const TimeMesh& mesh, std::size_t n, const char* where) {
    if (n > mesh.n_steps()) {
        std::ostringstream os;
        os << where << ": node " << n << " beyond the mesh (" << mesh.n_steps() << " steps)";
        throw RangeError(os.str());
    }
}

struct KernelMoments {
    double F0;
    double F1;
};

KernelMoments kernel_moments(double alpha, double m, double s) {
    if (s == 0.0) return {0.0, 0.0};
    const double z = -m * std::pow(s, alpha);
    const double e1 = ml_eval_signed({alpha, alpha + 1.0}, z);
    const double e2 = ml_eval_signed({alpha, alpha + 2.0}, z);
    const double sa = std::pow(s, alpha);
    return {sa * e1, sa * s * (e1 - e2)};
}

}  // namespace

std::vector<double> kernel_weights(const TimeMesh& mesh, std::size_t n, double alpha, double m) {
    check_row(mesh, n, "kernel_weights");
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        std::ostringstream os;
        os << "kernel_weights: alpha must lie in (0, 1], got " << alpha;
        throw ParameterError(os.str());
    }
    const std::vector<double> s = offsets(mesh, n);
    std::vector<double> F0(n + 1), F1(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        const KernelMoments k = kernel_moments(alpha, m, s[i]);
        F0[i] = k.F0;
        F1[i] = k.F1;
    }
    return weights_from_moments(mesh, n, s, F0, F1, [&](double u) {
        return std::pow(u, alpha - 1.0) * ml_eval_signed({alpha, alpha}, -m * std::pow(u, alpha));
    });
}

std::vector<double> power_weights(const TimeMesh& mesh, std::size_t n, double alpha) {
    check_row(mesh, n, "power_weights");
    if (!(alpha > 0.0)) {
        std::ostringstream os;
        os << "power_weights: alpha must be positive, got " << alpha;
        throw ParameterError(os.str());
    }
    const std::vector<double> s = offsets(mesh, n);
    std::vector<double> F0(n + 1), F1(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        F0[i] = std::pow(s[i], alpha) / alpha;
        F1[i] = std::pow(s[i], alpha + 1.0) / (alpha + 1.0);
    }
    return weights_from_moments(mesh, n, s, F0, F1, [&](double u) { return std::pow(u, alpha - 1.0); });
}

std::vector<double> rl_integral(const std::vector<double>& f, const TimeMesh& mesh, double alpha) {
    if (f.empty()) throw ShapeError("rl_integral: empty series");
    if (f.size() != mesh.size()) {
        std::ostringstream os;
        os << "rl_integral: series has " << f.size() << " values for " << mesh.size() << " nodes";
        throw ShapeError(os.str());
    }
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        std::ostringstream os;
        os << "rl_integral: alpha must lie in (0, 1], got " << alpha;
        throw ParameterError(os.str());
    }
    const double g = std::tgamma(alpha);
    std::vector<double> out(f.size(), 0.0);
    for (std::size_t n = 1; n < f.size(); ++n) {
        const std::vector<double> w = power_weights(mesh, n, alpha);
        double acc = 0.0;
        for (std::size_t i = 0; i <= n; ++i) acc += w[i] * f[i];
        out[n] = acc / g;
    }
    return out;
}

DuhamelPlan::DuhamelPlan(const Grid& grid, const TimeMesh& mesh, const ModelParams& params, DuhamelKind kind)
    : grid_(grid), mesh_(mesh), params_(params), kind_(kind) {
    params.validate(grid.dim());
    class_of_k2_.assign(static_cast<std::size_t>(grid.max_k_norm2()) + 1, -1);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const long k2 = grid.k_norm2(i);
        if (class_of_k2_[k2] < 0) {
            class_of_k2_[k2] = 0;
            classes_.push_back(k2);
        }
    }
    std::sort(classes_.begin(), classes_.end());
    for (std::size_t c = 0; c < classes_.size(); ++c) class_of_k2_[classes_[c]] = static_cast<int>(c);
}

const DuhamelPlan::Row& DuhamelPlan::row(std::size_t n) const {
    {
        std::lock_guard<std::mutex> lock(mu_);
        const auto it = rows_.find(n);
        if (it != rows_.end()) return *it->second;
    }
    check_row(mesh_, n, "DuhamelPlan");
    auto r = std::make_shared<Row>();
    r->weights.reserve(classes_.size());
    for (long k2 : classes_) {
        const double xi = std::sqrt(static_cast<double>(k2)) * grid_.xi_unit();
        const double m = kind_ == DuhamelKind::B ? ml_symbol(params_, xi, false, params_.D_eta)
                                                 : ml_symbol(params_, xi, true, params_.D_v);
        r->weights.push_back(kernel_weights(mesh_, n, params_.alpha, m));
    }
    std::lock_guard<std::mutex> lock(mu_);
    return *rows_.emplace(n, std::move(r)).first->second;
}

SpectralField DuhamelPlan::convolve(const std::vector<SpectralField>& data, std::size_t n) const {
    if (data.size() < n + 1) {
        std::ostringstream os;
        os << "DuhamelPlan: history holds " << data.size() << " nodes, need " << n + 1;
        throw ShapeError(os.str());
    }
    SpectralField out(grid_);
    if (n == 0) return out;
    const Row& r = row(n);
    std::vector<int> cls(grid_.size());
    for (std::size_t k = 0; k < grid_.size(); ++k) cls[k] = class_of_k2_[grid_.k_norm2(k)];
    for (std::size_t i = 0; i <= n; ++i) {
        require_same_grid(grid_, data[i].grid(), "DuhamelPlan::convolve");
        for (std::size_t k = 0; k < grid_.size(); ++k) out[k] += r.weights[cls[k]][i] * data[i][k];
    }
    return out;
}

SpectralField bilinear_source(const SpectralField& eta, const SpectralField& v, double theta1) {
    const VectorField G = g_kernel(v, theta1);
    VectorField prod;
    prod.reserve(G.size());
    for (const auto& c : G) prod.push_back(pointwise_product(eta, c));
    return divergence(prod);
}

SpectralField duhamel_B(const History& history, const DuhamelPlan& plan, std::size_t t_index) {
    history.validate();
    if (plan.kind() != DuhamelKind::B) throw ParameterError("duhamel_B: plan built for the T operator");
    if (history.size() < t_index + 1) {
        std::ostringstream os;
        os << "duhamel_B: history holds " << history.size() << " nodes, need " << t_index + 1;
        throw ShapeError(os.str());
    }
    std::vector<SpectralField> src;
    src.reserve(t_index + 1);
    for (std::size_t i = 0; i <= t_index; ++i)
        src.push_back(bilinear_source(history.eta[i], history.v[i], plan.params().theta1));
    return -plan.params().chi * plan.convolve(src, t_index);
}

SpectralField duhamel_B(const History& history, const TimeMesh& mesh, const ModelParams& params,
                        std::size_t t_index) {
    if (history.eta.empty()) throw ShapeError("duhamel_B: empty history");
    return duhamel_B(history, DuhamelPlan(history.eta.front().grid(), mesh, params, DuhamelKind::B), t_index);
}

SpectralField duhamel_T(const History& history, const DuhamelPlan& plan, std::size_t t_index) {
    history.validate();
    if (plan.kind() != DuhamelKind::T) throw ParameterError("duhamel_T: plan built for the B operator");
    if (history.size() < t_index + 1) {
        std::ostringstream os;
        os << "duhamel_T: history holds " << history.size() << " nodes, need " << t_index + 1;
        throw ShapeError(os.str());
    }
    return plan.params().kappa * plan.convolve(history.eta, t_index);
}

SpectralField duhamel_T(const History& history, const TimeMesh& mesh, const ModelParams& params,
                        std::size_t t_index) {
    if (history.eta.empty()) throw ShapeError("duhamel_T: empty history");
    return duhamel_T(history, DuhamelPlan(history.eta.front().grid(), mesh, params, DuhamelKind::T), t_index);
}

double caputo_residual(const std::vector<double>& u, double alpha, const std::vector<double>& rhs,
                       const TimeMesh& mesh, double skip_fraction) {
    if (mesh.size() < 16) {
        std::ostringstream os;
        os << "caputo_residual: mesh too coarse (" << mesh.size() << " nodes, need at least 16)";
        throw ParameterError(os.str());
    }
    if (u.size() != mesh.size() || rhs.size() != mesh.size())
        throw ShapeError("caputo_residual: series and mesh lengths differ");
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        std::ostringstream os;
        os << "caputo_residual: alpha must lie in (0, 1], got " << alpha;
        throw ParameterError(os.str());
    }
    if (!(skip_fraction >= 0.0 && skip_fraction < 1.0)) {
        std::ostringstream os;
        os << "caputo_residual: skip_fraction must lie in [0, 1), got " << skip_fraction;
        throw ParameterError(os.str());
    }
    std::vector<double> w(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) w[i] = u[i] - u[0];
    const std::vector<double> I = alpha == 1.0 ? w : rl_integral(w, mesh, 1.0 - alpha);
    double worst = 0.0;
    const double t_from = skip_fraction * mesh.t_final();
    for (std::size_t i = 1; i + 1 < u.size(); ++i) {
        if (mesh[i] < t_from) continue;
        const double h1 = mesh[i] - mesh[i - 1], h2 = mesh[i + 1] - mesh[i];
        const double d = -h2 / (h1 * (h1 + h2)) * I[i - 1] + (h2 - h1) / (h1 * h2) * I[i] +
                         h1 / (h2 * (h1 + h2)) * I[i + 1];
        worst = std::max(worst, std::abs(d - rhs[i]));
    }
    return worst;
}

void YamazakiParams::check() const {
    std::ostringstream os;
    const double gap = -s + theta - zeta + s0;
    if (std::abs(gap) > 1e-12 * (1.0 + std::abs(s) + std::abs(theta) + std::abs(zeta) + std::abs(s0))) {
        os << "yamazaki: -s + theta - zeta = -s0 violated (-s + theta - zeta = " << -s + theta - zeta
           << ", -s0 = " << -s0 << ")";
    } else if (!(p >= 1.0)) {
        os << "yamazaki: p must be >= 1, got " << p;
    } else if (!(alpha > 0.0 && alpha <= 1.0)) {
        os << "yamazaki: alpha must lie in (0, 1], got " << alpha;
    } else if (!(theta > 0.0)) {
        os << "yamazaki: theta must be positive, got " << theta;
    } else {
        return;
    }
    throw ParameterError(os.str());
}

double yamazaki_integrand(const SpectralField& f, const YamazakiParams& params, const DyadicCutoff& cutoff,
                          double tau) {
    const double ta = std::pow(tau, params.alpha);
    const SpectralField g = apply_radial(
        f,
        [&](double xi) {
            return std::pow(xi, params.zeta) * ml_value(params.alpha, params.alpha, ta * std::pow(xi, params.theta));
        },
        0.0);
    return std::pow(tau, params.alpha - 1.0) * besov_norm(g, {-params.s0, params.p, 1.0}, cutoff);
}

YamazakiResult yamazaki_integral_check(const SpectralField& f, const YamazakiParams& params,
                                       const DyadicCutoff& cutoff, double t_final, int points_per_decade,
                                       double tau_min) {
    params.check();
    if (!(t_final > tau_min && tau_min > 0.0) || points_per_decade < 2) {
        std::ostringstream os;
        os << "yamazaki: need 0 < tau_min < t_final and at least 2 points per decade (tau_min = " << tau_min
           << ", t_final = " << t_final << ", points = " << points_per_decade << ")";
        throw ParameterError(os.str());
    }
    YamazakiResult r;
    r.norm_f = besov_norm(f, {-params.s, params.p, 1.0}, cutoff);
    if (r.norm_f == 0.0) return r;

    const double decades = std::log10(t_final / tau_min);
    const int n = std::max(2, static_cast<int>(std::ceil(decades * points_per_decade)));
    const double du = decades * std::log(10.0) / n;
    r.tau.resize(n + 1);
    r.integrand.resize(n + 1);
    for (int i = 0; i <= n; ++i) {
        r.tau[i] = i == n ? t_final : tau_min * std::exp(i * du);
        r.integrand[i] = yamazaki_integrand(f, params, cutoff, r.tau[i]);
    }
    // trapezoid in log tau
    double body = 0.0;
    for (int i = 0; i < n; ++i) body += 0.5 * du * (r.integrand[i] * r.tau[i] + r.integrand[i + 1] * r.tau[i + 1]);
    const double head = r.integrand[0] * tau_min / params.alpha;
    r.integral = head + body;

    // least-squares slope over the last decade
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (int i = 0; i <= n; ++i) {
        if (r.tau[i] < t_final / 10.0 * (1.0 - 1e-12) || r.integrand[i] <= 0.0) continue;
        const double x = std::log(r.tau[i]), y = std::log(r.integrand[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++cnt;
    }
    r.tail_exponent = cnt >= 2 ? (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx) : 0.0;
    r.tail = r.tail_exponent < -1.0 ? r.integrand[n] * t_final / (-r.tail_exponent - 1.0)
                                    : std::numeric_limits<double>::infinity();
    r.ratio = (r.integral + r.tail) / r.norm_f;
    return r;
}

}  // namespace fracks
