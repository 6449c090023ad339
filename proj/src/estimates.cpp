#include "fracks/estimates.hpp"

#include "fracks/errors.hpp"
#include "fracks/specfun.hpp"
#include "fracks/wellposed.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

namespace fracks {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

// JSON has no infinity; exponents like r = inf are written as strings
nlohmann::json num(double x) {
    if (std::isfinite(x)) return x;
    return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const double m = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
    mx /= m;
    my /= m;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

double spread(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi > 0.0 ? (*hi - *lo) / *hi : 0.0;
}

void require_members(std::size_t n, const char* where) {
    if (n == 0) throw ShapeError(std::string(where) + ": empty ensemble");
}

void check_T_values(const std::vector<double>& T, const char* where) {
    if (T.empty()) throw ParameterError(std::string(where) + ": no final times");
    for (double t : T)
        if (!(t > 0.0 && std::isfinite(t))) {
            std::ostringstream os;
            os << where << ": final times must be positive, got " << t;
            throw ParameterError(os.str());
        }
}

}  // namespace

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "PASS";
        case Verdict::fail: return "FAIL";
        case Verdict::inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

const char* to_string(DecayFamily f) {
    switch (f) {
        case DecayFamily::heat: return "heat";
        case DecayFamily::E_alpha: return "E_alpha";
        case DecayFamily::E_alpha_alpha: return "E_alpha_alpha";
    }
    return "?";
}

void write_csv_header(std::ostream& os) {
    os << "check_id,params_json,measured,predicted,rel_dev,ensemble,seed,grid,verdict\n";
}

void write_csv_row(std::ostream& os, const RatioReport& r) {
    std::ostringstream line;
    line << std::setprecision(12);
    line << csv_quote(r.check_id) << ',' << csv_quote(r.params_json) << ',' << r.measured << ',' << r.predicted << ','
         << r.rel_dev << ',' << r.ensemble << ',' << r.seed << ',' << csv_quote(r.grid) << ',' << to_string(r.verdict)
         << '\n';
    os << line.str();
}

std::string grid_tag(const Grid& grid) {
    std::ostringstream os;
    os << grid.dim() << "d-N" << grid.n() << "-L" << std::setprecision(6) << grid.half_width();
    return os.str();
}

// ---------------------------------------------------------------------------
// Decay fits
// ---------------------------------------------------------------------------

std::vector<double> DecaySpec::log_times(double t_min, double t_max, int per_decade) {
    if (!(t_min > 0.0 && t_max > t_min && per_decade > 0)) throw ParameterError("log_times: need 0 < t_min < t_max");
    const double l0 = std::log10(t_min), l1 = std::log10(t_max);
    const int n = static_cast<int>(std::ceil((l1 - l0) * per_decade));
    std::vector<double> t;
    for (int i = 0; i <= n; ++i) t.push_back(std::pow(10.0, l0 + (l1 - l0) * i / n));
    return t;
}

double DecaySpec::exponent(int dim) const { return (s2 - s1 + zeta + dim / p1 - dim / p2) / theta; }

double DecaySpec::predicted_slope(int dim, DecayFamily family) const {
    return -(family == DecayFamily::heat ? 1.0 : alpha) * exponent(dim);
}

void DecaySpec::validate(int dim, DecayFamily family) const {
    std::ostringstream os;
    if (!(zeta >= 0.0)) os << "DecaySpec: zeta >= 0 violated (zeta = " << zeta << ")";
    else if (!(theta > 0.0)) os << "DecaySpec: theta > 0 violated (theta = " << theta << ")";
    else if (family != DecayFamily::heat && !(alpha > 0.0 && alpha <= 1.0))
        os << "DecaySpec: 0 < alpha <= 1 violated (alpha = " << alpha << ")";
    else if (!(s1 <= s2)) os << "DecaySpec: s1 <= s2 violated (s1 = " << s1 << ", s2 = " << s2 << ")";
    else if (!(p1 >= 1.0 && p1 <= p2)) os << "DecaySpec: 1 <= p1 <= p2 violated (p1 = " << p1 << ", p2 = " << p2 << ")";
    else if (!(gamma >= 0.0)) os << "DecaySpec: gamma >= 0 violated (gamma = " << gamma << ")";
    else if (!(tolerance > 0.0)) os << "DecaySpec: tolerance must be positive";
    else if (family == DecayFamily::E_alpha && !(exponent(dim) < 1.0))
        os << "DecaySpec: E_alpha bound needs (s2 - s1 + zeta + n/p1 - n/p2)/theta < 1, got " << exponent(dim);
    else if (family == DecayFamily::E_alpha_alpha && !(exponent(dim) < 2.0))
        os << "DecaySpec: E_{alpha,alpha} bound needs (s2 - s1 + zeta + n/p1 - n/p2)/theta < 2, got "
           << exponent(dim);
    if (!os.str().empty()) throw ParameterError(os.str());
    for (std::size_t i = 0; i < times.size(); ++i)
        if (!(times[i] > 0.0) || (i > 0 && !(times[i] > times[i - 1])))
            throw ParameterError("DecaySpec: times must be positive and increasing");
}

double DecayFit::decades() const { return window_hi > 0.0 ? std::log10(window_hi / window_lo) : 0.0; }

DecayFit decay_curve(const SpectralField& f, const DecaySpec& spec, DecayFamily family) {
    const Grid& grid = f.grid();
    spec.validate(grid.dim(), family);
    const DyadicCutoff cutoff(grid);
    const BesovParams target{spec.s2, spec.p2, kInf};
    ModelParams mp;
    mp.alpha = family == DecayFamily::heat ? 1.0 : spec.alpha;
    mp.theta = spec.theta;
    mp.theta1 = 0.0;
    mp.gamma = spec.gamma;
    mp.gamma_sign = spec.gamma_sign;
    const bool shift = spec.gamma != 0.0;

    DecayFit fit;
    fit.t = spec.times.empty() ? DecaySpec::log_times(1e-4, 1e10, 8) : spec.times;
    const SpectralField base = spec.zeta > 0.0 ? frac_laplacian(f, spec.zeta) : f;
    fit.norm_at_zero = besov_norm(base, target, cutoff);
    for (double t : fit.t) {
        SpectralField u(grid);
        if (family == DecayFamily::heat) {
            u = heat_semigroup(base, t, spec.theta);
            if (shift) u *= std::exp((spec.gamma_sign == GammaSign::damped ? -1.0 : 1.0) * spec.gamma * t);
        } else {
            u = ml_operator(base, t, mp, family == DecayFamily::E_alpha ? MLFamily::E_alpha : MLFamily::E_alpha_alpha,
                            shift);
        }
        const std::vector<double> prof = besov_profile(VectorField{u}, target, cutoff);
        const auto it = std::max_element(prof.begin(), prof.end());
        fit.norm.push_back(*it);
        fit.top_shell.push_back(cutoff.j_min() + static_cast<int>(it - prof.begin()));
    }
    return fit;
}

namespace {

DecayFit fit_window(const SpectralField& f, const DecaySpec& spec, DecayFamily family) {
    DecayFit fit = decay_curve(f, spec, family);
    const Grid& grid = f.grid();
    const DyadicCutoff cutoff(grid);
    const int n = grid.dim();
    const double predicted = spec.predicted_slope(n, family);
    const double n0 = fit.norm_at_zero;

    auto usable = [&](std::size_t i) {
        const double v = fit.norm[i];
        if (!(v > 1e3 * std::numeric_limits<double>::epsilon() * n0)) return false;
        if (predicted != 0.0 && !(v < 0.95 * n0)) return false;
        const int j = fit.top_shell[i];
        return j >= cutoff.j_min() + 2 && j <= cutoff.j_max() - 2;
    };
    std::size_t best_lo = 0, best_hi = 0, lo = 0;
    bool in_run = false;
    for (std::size_t i = 0; i <= fit.t.size(); ++i) {
        const bool ok = i < fit.t.size() && usable(i);
        if (ok && !in_run) lo = i, in_run = true;
        if (!ok && in_run) {
            in_run = false;
            if (best_hi == best_lo || fit.t[i - 1] / fit.t[lo] > fit.t[best_hi - 1] / fit.t[best_lo])
                best_lo = lo, best_hi = i;
        }
    }
    if (best_hi - best_lo < 2)
        throw RangeError("decay fit: no scaling window (insufficient range)");
    fit.window_lo = fit.t[best_lo];
    fit.window_hi = fit.t[best_hi - 1];
    if (fit.decades() < 1.0) {
        std::ostringstream os;
        os << "decay fit: scaling window [" << fit.window_lo << ", " << fit.window_hi << "] spans " << fit.decades()
           << " decades, need at least 1 (insufficient range)";
        throw RangeError(os.str());
    }
    std::vector<double> x, y;
    for (std::size_t i = best_lo; i < best_hi; ++i) {
        x.push_back(std::log(fit.t[i]));
        y.push_back(std::log(fit.norm[i]));
    }
    const LineFit lf = least_squares(x, y);
    fit.intercept = lf.intercept;

    RatioReport& r = fit.report;
    r.check_id = family == DecayFamily::heat ? "decay-heat" : std::string("decay-ml-") + to_string(family);
    nlohmann::json j = {{"family", to_string(family)}, {"zeta", spec.zeta}, {"theta", spec.theta},
                        {"alpha", family == DecayFamily::heat ? 1.0 : spec.alpha},
                        {"s1", spec.s1}, {"s2", spec.s2}, {"p1", num(spec.p1)}, {"p2", num(spec.p2)},
                        {"gamma", spec.gamma}, {"gamma_sign", to_string(spec.gamma_sign)},
                        {"window", {fit.window_lo, fit.window_hi}}};
    r.params_json = j.dump();
    r.measured = lf.slope;
    r.predicted = predicted;
    r.rel_dev = predicted != 0.0 ? std::abs(lf.slope - predicted) / std::abs(predicted) : std::abs(lf.slope);
    r.ensemble = 1;
    r.grid = grid_tag(grid);
    bool ok = r.rel_dev <= spec.tolerance;
    if (predicted == 0.0)
        for (std::size_t i = 1; i < fit.norm.size(); ++i) ok = ok && fit.norm[i] <= fit.norm[i - 1] * (1.0 + 1e-12);
    if (spec.gamma != 0.0 || fit.decades() < 1.5) r.verdict = Verdict::inconclusive;
    else r.verdict = ok ? Verdict::pass : Verdict::fail;
    return fit;
}

}  // namespace

DecayFit decay_fit_heat(const SpectralField& f, const DecaySpec& spec) {
    return fit_window(f, spec, DecayFamily::heat);
}

DecayFit decay_fit_ml(const SpectralField& f, const DecaySpec& spec, DecayFamily family) {
    if (family == DecayFamily::heat) throw ParameterError("decay_fit_ml: use decay_fit_heat for the heat family");
    return fit_window(f, spec, family);
}

void write_decay_svg(std::ostream& os, const DecayFit& fit) {
    const double W = 640, H = 420, m = 50;
    double x0 = kInf, x1 = -kInf, y0 = kInf, y1 = -kInf;
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < fit.t.size(); ++i) {
        if (!(fit.norm[i] > 0.0)) continue;
        const double x = std::log10(fit.t[i]), y = std::log10(fit.norm[i]);
        pts.emplace_back(x, y);
        x0 = std::min(x0, x), x1 = std::max(x1, x);
        y0 = std::min(y0, y), y1 = std::max(y1, y);
    }
    if (pts.size() < 2) {
        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\"/>\n";
        return;
    }
    if (y1 == y0) y1 = y0 + 1.0;
    auto px = [&](double x) { return m + (x - x0) / (x1 - x0) * (W - 2 * m); };
    auto py = [&](double y) { return H - m - (y - y0) / (y1 - y0) * (H - 2 * m); };
    os << std::fixed << std::setprecision(2);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect x=\"" << m << "\" y=\"" << m << "\" width=\"" << W - 2 * m << "\" height=\"" << H - 2 * m
       << "\" fill=\"none\" stroke=\"#999\"/>\n";
    os << "<text x=\"" << m << "\" y=\"" << m - 15 << "\" font-size=\"13\">" << fit.report.check_id
       << ": slope " << std::setprecision(4) << fit.report.measured << " vs " << fit.report.predicted
       << std::setprecision(2) << "</text>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"" << H - 15 << "\" font-size=\"12\">log10 t</text>\n";
    os << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : pts) os << px(x) << ',' << py(y) << ' ';
    os << "\"/>\n";
    if (fit.window_hi > 0.0) {
        const double a = std::log10(fit.window_lo), b = std::log10(fit.window_hi);
        const double ln10 = std::log(10.0);
        auto line = [&](double x) { return (fit.intercept + fit.report.measured * x * ln10) / ln10; };
        os << "<polyline fill=\"none\" stroke=\"#d62728\" stroke-dasharray=\"6,3\" stroke-width=\"1.5\" points=\""
           << px(a) << ',' << py(line(a)) << ' ' << px(b) << ',' << py(line(b)) << "\"/>\n";
    }
    os << "</svg>\n";
}

SpectralField decay_data(const Grid& grid, double s, double p) {
    HomogeneousData h;
    h.degree = s - grid.dim() / p;
    h.xi_lo = 0.5 * grid.xi_unit();
    h.xi_hi = 0.9 * (grid.n() / 2) * grid.xi_unit();
    return h.build(grid);
}

// ---------------------------------------------------------------------------
// Ensembles and constant studies
// ---------------------------------------------------------------------------

int EnsembleSpec::band(const Grid& grid) const {
    const int b = kmax > 0 ? kmax : grid.n() / 3;
    if (b < 1 || 2 * b >= grid.n()) {
        std::ostringstream os;
        os << "EnsembleSpec: band " << b << " outside [1, n/2) for n = " << grid.n();
        throw ParameterError(os.str());
    }
    return b;
}

SpectralField ensemble_member(const Grid& grid, const EnsembleSpec& spec, double s, std::size_t member,
                              unsigned tag) {
    const int band = spec.band(grid);
    const int n = grid.dim();
    const double power = -(s + 0.5 * n + spec.extra_decay);
    SpectralField f(grid);
    for (std::size_t i = 1; i < f.size(); ++i) {
        const auto k = grid.wavevector(i);
        int kinf = 0;
        for (int a = 0; a < n; ++a) kinf = std::max(kinf, std::abs(k[a]));
        if (kinf < 1 || kinf > band) continue;
        std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                          static_cast<std::uint32_t>(member), tag, static_cast<std::uint32_t>(k[0] + (1 << 20)),
                          static_cast<std::uint32_t>(k[1] + (1 << 20)), static_cast<std::uint32_t>(k[2] + (1 << 20))};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> nd;
        const double re = nd(rng), im = nd(rng);
        f[i] = spec.amplitude * std::pow(grid.xi_norm(i), power) * cplx(re, im);
    }
    return hermitian_part(f);
}

namespace {

struct NodeTables {
    std::vector<std::vector<double>> eta, v;
};

NodeTables linear_tables(const Grid& grid, const ModelParams& params, const TimeMesh& mesh) {
    NodeTables nt;
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        nt.eta.push_back(ml_table(grid, params, MLFamily::E_alpha, mesh[i], false, params.D_eta));
        nt.v.push_back(ml_table(grid, params, MLFamily::E_alpha, mesh[i], true, params.D_v));
    }
    return nt;
}

ConstantStudy finish_study(ConstantStudy st, const char* id, const ModelParams& params, std::size_t steps,
                           const Grid& grid, double p, double q) {
    st.max = *std::max_element(st.constant.begin(), st.constant.end());
    st.variation = spread(st.constant);
    RatioReport& r = st.report;
    r.check_id = id;
    nlohmann::json j = {{"alpha", params.alpha}, {"theta", params.theta}, {"theta1", params.theta1},
                        {"gamma", params.gamma}, {"chi", params.chi}, {"kappa", params.kappa},
                        {"p", num(p)}, {"q", num(q)}, {"steps", steps}, {"T", st.T_values},
                        {"per_T", st.constant}};
    r.params_json = j.dump();
    r.measured = st.max;
    r.predicted = kNaN;
    r.rel_dev = st.variation;
    r.ensemble = st.members;
    r.grid = grid_tag(grid);
    r.verdict = std::isfinite(st.max) && st.max > 0.0 ? Verdict::pass : Verdict::fail;
    return st;
}

}  // namespace

ConstantStudy bilinear_constant_study(const std::vector<SpectralField>& eta0, const std::vector<SpectralField>& v0,
                                      const ModelParams& params, const std::vector<double>& T_values,
                                      std::size_t steps, double p, double q) {
    require_members(eta0.size(), "bilinear_constant_study");
    if (eta0.size() != v0.size()) throw ShapeError("bilinear_constant_study: eta and v ensembles differ in size");
    check_T_values(T_values, "bilinear_constant_study");
    const Grid& grid = eta0.front().grid();
    params.validate(grid.dim());
    const IterationConfig cfg = IterationConfig::for_model(params, grid.dim(), p, q);
    const DyadicCutoff cutoff(grid);

    ConstantStudy st;
    st.T_values = T_values;
    st.members = eta0.size();
    for (double T : T_values) {
        const TimeMesh mesh = TimeMesh::graded(T, steps, params.alpha);
        const DuhamelPlan plan(grid, mesh, params, DuhamelKind::B);
        const NodeTables nt = linear_tables(grid, params, mesh);
        double worst = 0.0;
        std::size_t skipped = 0;
        for (std::size_t m = 0; m < eta0.size(); ++m) {
            require_same_grid(grid, eta0[m].grid(), "bilinear_constant_study");
            require_same_grid(grid, v0[m].grid(), "bilinear_constant_study");
            std::vector<SpectralField> eta, v, src;
            for (std::size_t i = 0; i < mesh.size(); ++i) {
                eta.push_back(apply_table(eta0[m], nt.eta[i]));
                v.push_back(apply_table(v0[m], nt.v[i]));
                src.push_back(bilinear_source(eta.back(), v.back(), params.theta1));
            }
            const double ne = sup_norm_in_time(eta, cfg.besov_eta, cutoff);
            const double nv = sup_norm_in_time(v, cfg.besov_v, cutoff);
            if (!(ne > 0.0) || !(nv > 0.0)) {
                ++skipped;
                continue;
            }
            double nb = 0.0;
            for (std::size_t i = 1; i < mesh.size(); ++i)
                nb = std::max(nb, params.chi * besov_norm(plan.convolve(src, i), cfg.besov_eta, cutoff));
            worst = std::max(worst, nb / (ne * nv));
        }
        st.skipped = skipped;
        st.constant.push_back(worst);
    }
    return finish_study(std::move(st), "bilinear-K", params, steps, grid, p, q);
}

ConstantStudy linear_operator_study(const std::vector<SpectralField>& eta0, const ModelParams& params,
                                    const std::vector<double>& T_values, std::size_t steps, double p, double q) {
    require_members(eta0.size(), "linear_operator_study");
    check_T_values(T_values, "linear_operator_study");
    const Grid& grid = eta0.front().grid();
    params.validate(grid.dim());
    const IterationConfig cfg = IterationConfig::for_model(params, grid.dim(), p, q);
    const DyadicCutoff cutoff(grid);

    ConstantStudy st;
    st.T_values = T_values;
    st.members = eta0.size();
    for (double T : T_values) {
        const TimeMesh mesh = TimeMesh::graded(T, steps, params.alpha);
        const DuhamelPlan plan(grid, mesh, params, DuhamelKind::T);
        const NodeTables nt = linear_tables(grid, params, mesh);
        double worst = 0.0;
        std::size_t skipped = 0;
        for (const SpectralField& e0 : eta0) {
            require_same_grid(grid, e0.grid(), "linear_operator_study");
            std::vector<SpectralField> eta;
            for (std::size_t i = 0; i < mesh.size(); ++i) eta.push_back(apply_table(e0, nt.eta[i]));
            const double ne = sup_norm_in_time(eta, cfg.besov_eta, cutoff);
            if (!(ne > 0.0)) {
                ++skipped;
                continue;
            }
            double nt_ = 0.0;
            for (std::size_t i = 1; i < mesh.size(); ++i)
                nt_ = std::max(nt_, params.kappa * besov_norm(plan.convolve(eta, i), cfg.besov_v, cutoff));
            worst = std::max(worst, nt_ / ne);
        }
        st.skipped = skipped;
        st.constant.push_back(worst);
    }
    return finish_study(std::move(st), "linear-op-C", params, steps, grid, p, q);
}

ProductStudy product_study(const std::vector<SpectralField>& f, const std::vector<SpectralField>& g,
                           const ProductParams& params) {
    require_members(f.size(), "product_study");
    if (f.size() != g.size()) throw ShapeError("product_study: ensembles differ in size");
    const Grid& grid = f.front().grid();
    params.check(grid.dim());
    const DyadicCutoff cutoff(grid);
    ProductStudy ps;
    ps.members = f.size();
    for (std::size_t m = 0; m < f.size(); ++m) {
        const double r = product_estimate_check(f[m], g[m], params, cutoff);
        if (r == 0.0) {
            ++ps.skipped;
            continue;
        }
        ps.max_ratio = std::max(ps.max_ratio, r);
    }
    return ps;
}

// ---------------------------------------------------------------------------
// Operator B and the Yamazaki integral
// ---------------------------------------------------------------------------

void OperatorBParams::check() const {
    std::ostringstream os;
    if (!(p >= 1.0)) os << "OperatorBParams: p >= 1 violated (p = " << p << ")";
    else if (!(alpha > 0.0 && alpha <= 1.0)) os << "OperatorBParams: 0 < alpha <= 1 violated (alpha = " << alpha << ")";
    else if (!(theta > 0.0)) os << "OperatorBParams: theta > 0 violated (theta = " << theta << ")";
    else if (std::abs(-s + theta - 1.0 + s0) > 1e-12 * (1.0 + std::abs(s) + std::abs(s0)))
        os << "OperatorBParams: -s + theta - 1 = -s0 violated (s = " << s << ", s0 = " << s0 << ", theta = " << theta
           << ")";
    if (!os.str().empty()) throw ParameterError(os.str());
}

OperatorBResult operator_B_study(const std::vector<VectorField>& f, const TimeMesh& mesh,
                                 const OperatorBParams& params, const DyadicCutoff& cutoff) {
    params.check();
    if (!mesh.is_uniform()) throw ParameterError("operator_B_study: needs a uniform mesh");
    if (f.size() != mesh.size()) {
        std::ostringstream os;
        os << "operator_B_study: " << f.size() << " snapshots for " << mesh.size() << " nodes";
        throw ShapeError(os.str());
    }
    const Grid& grid = cutoff.grid();
    for (const VectorField& fi : f) {
        if (static_cast<int>(fi.size()) != grid.dim()) throw ShapeError("operator_B_study: wrong component count");
        for (const SpectralField& c : fi) require_same_grid(grid, c.grid(), "operator_B_study");
    }
    const std::size_t n = mesh.n_steps();
    const double a = params.alpha;
    const double tf = mesh.t_final();

    // weights per |k|^2 class; w[j] multiplies f(t_j)
    std::vector<std::vector<double>> w(static_cast<std::size_t>(grid.max_k_norm2()) + 1);
    std::vector<double> tail(w.size(), 0.0);
    VectorField integral(grid.dim(), SpectralField(grid));
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const long k2 = grid.k_norm2(i);
        if (w[k2].empty()) {
            const double m = std::pow(grid.xi_norm(i), params.theta);
            const std::vector<double> rev = kernel_weights(mesh, n, a, m);
            w[k2].assign(rev.rbegin(), rev.rend());
            tail[k2] = ml_value(a, 1.0, m * std::pow(tf, a)) / m;
        }
        for (int c = 0; c < grid.dim(); ++c) {
            cplx s = tail[k2] * f[n][c][i];
            for (std::size_t j = 0; j <= n; ++j) s += w[k2][j] * f[j][c][i];
            integral[c][i] = s;
        }
    }
    OperatorBResult r;
    r.value_norm = besov_norm(divergence(integral), {params.s, params.p, kInf}, cutoff);
    for (const VectorField& fi : f) r.input_norm = std::max(r.input_norm, besov_norm(fi, {params.s0, params.p, kInf}, cutoff));
    r.ratio = r.input_norm > 0.0 ? r.value_norm / r.input_norm : 0.0;
    return r;
}

YamazakiStudy yamazaki_study(const SpectralField& f, const YamazakiParams& params, const DyadicCutoff& cutoff,
                             const std::vector<double>& t_finals, int points_per_decade) {
    if (t_finals.size() < 3) throw ParameterError("yamazaki_study: need at least three final times");
    for (std::size_t i = 1; i < t_finals.size(); ++i)
        if (!(t_finals[i] > t_finals[i - 1])) throw ParameterError("yamazaki_study: final times must increase");
    YamazakiStudy ys;
    ys.t_final = t_finals;
    for (double T : t_finals) {
        const YamazakiResult r = yamazaki_integral_check(f, params, cutoff, T, points_per_decade);
        ys.ratio.push_back(r.ratio);
        ys.tail_exponent.push_back(r.tail_exponent);
    }
    bool ok = true;
    double prev = kInf;
    for (std::size_t i = 1; i < ys.ratio.size(); ++i) {
        const double change = ys.ratio[i - 1] != 0.0 ? std::abs(ys.ratio[i] / ys.ratio[i - 1] - 1.0) : 0.0;
        ok = ok && change <= prev + 1e-12;
        prev = change;
        ys.last_change = change;
    }
    for (double e : ys.tail_exponent) ok = ok && e < -1.0;
    ys.converging = ok;
    return ys;
}

}  // namespace fracks
