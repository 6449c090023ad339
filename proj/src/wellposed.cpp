#include "fracks/wellposed.hpp"

#include "fracks/errors.hpp"
#include "fracks/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace fracks {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool all_finite(const SpectralField& f) {
    for (const cplx& c : f.coeffs())
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    return true;
}

std::vector<SpectralField> differences(const std::vector<SpectralField>& a, const std::vector<SpectralField>& b) {
    std::vector<SpectralField> d;
    d.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d.push_back(a[i] - b[i]);
    return d;
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// max over nodes of the physical sup norm
double physical_sup(const std::vector<SpectralField>& series) {
    double m = 0.0;
    for (const auto& f : series) m = std::max(m, max_abs(dft_inverse(f)));
    return m;
}

double smooth_step(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / u), b = std::exp(-1.0 / (1.0 - u));
    return a / (a + b);
}

void check_history(const History& h, const Grid& grid, const TimeMesh& mesh, const char* where) {
    h.validate();
    if (h.size() != mesh.size()) {
        std::ostringstream os;
        os << where << ": history has " << h.size() << " nodes, mesh has " << mesh.size();
        throw ShapeError(os.str());
    }
    require_same_grid(grid, h.eta.front().grid(), where);
}

}  // namespace

IterationConfig IterationConfig::for_model(const ModelParams& params, int dim, double p, double q) {
    IterationConfig c;
    c.besov_eta = {2.0 - 2.0 * params.theta - params.theta1 + dim / p, p, kInf};
    c.besov_v = {2.0 - params.theta - params.theta1 + dim / q, q, kInf};
    return c;
}

void IterationConfig::validate() const {
    if (max_iters < 1) throw ParameterError("IterationConfig: max_iters must be at least 1");
    if (!(tol_rel > 0.0)) {
        std::ostringstream os;
        os << "IterationConfig: tol_rel must be positive, got " << tol_rel;
        throw ParameterError(os.str());
    }
    besov_eta.validate();
    besov_v.validate();
}

double IterationTrace::contraction_estimate() const {
    double worst = 0.0;
    for (std::size_t i = std::max<std::size_t>(1, ratio.size() / 2); i < ratio.size(); ++i)
        if (std::isfinite(ratio[i])) worst = std::max(worst, ratio[i]);
    return worst;
}

void IterationTrace::write_csv(std::ostream& os) const {
    os << "iter,norm_eta_X,norm_v_Y,diff_eta,diff_v,ratio\n";
    const auto old = os.precision(17);
    for (std::size_t i = 0; i < diff_eta.size(); ++i)
        os << i + 2 << ',' << norm_eta_X[i] << ',' << norm_v_Y[i] << ',' << diff_eta[i] << ',' << diff_v[i] << ','
           << ratio[i] << '\n';
    os.precision(old);
}

History linear_part(const SpectralField& eta0, const SpectralField& v0, const ModelParams& params,
                    const TimeMesh& mesh) {
    require_same_grid(eta0.grid(), v0.grid(), "linear_part");
    History h;
    for (std::size_t i = 0; i < mesh.size(); ++i)
        h.append(ml_operator(eta0, mesh[i], params, MLFamily::E_alpha, false, params.D_eta),
                 ml_operator(v0, mesh[i], params, MLFamily::E_alpha, true, params.D_v));
    return h;
}

double sup_norm_in_time(const std::vector<SpectralField>& series, const BesovParams& besov,
                        const DyadicCutoff& cutoff) {
    double m = 0.0;
    for (const auto& f : series) m = std::max(m, besov_norm(f, besov, cutoff));
    return m;
}

PicardResult picard_solve(const SpectralField& eta0, const SpectralField& v0, const ModelParams& params,
                          const TimeMesh& mesh, const IterationConfig& config, const std::optional<History>& start) {
    const DuhamelPlan plan_B(eta0.grid(), mesh, params, DuhamelKind::B);
    const DuhamelPlan plan_T(eta0.grid(), mesh, params, DuhamelKind::T);
    return picard_solve(eta0, v0, plan_B, plan_T, config, start);
}

PicardResult picard_solve(const SpectralField& eta0, const SpectralField& v0, const DuhamelPlan& plan_B,
                          const DuhamelPlan& plan_T, const IterationConfig& config,
                          const std::optional<History>& start) {
    config.validate();
    const Grid& grid = eta0.grid();
    const ModelParams& params = plan_B.params();
    const TimeMesh& mesh = plan_B.mesh();
    require_same_grid(grid, v0.grid(), "picard_solve");
    require_same_grid(grid, plan_B.grid(), "picard_solve");
    require_same_grid(grid, plan_T.grid(), "picard_solve");
    if (plan_B.kind() != DuhamelKind::B || plan_T.kind() != DuhamelKind::T)
        throw ParameterError("picard_solve: plans passed in the wrong order");
    if (!(plan_T.mesh() == mesh)) throw ParameterError("picard_solve: plans built on different meshes");
    params.validate(grid.dim());

    const History lin = linear_part(eta0, v0, params, mesh);
    History cur = start ? *start : lin;
    check_history(cur, grid, mesh, "picard_solve");
    const DyadicCutoff cutoff(grid);

    PicardResult res;
    IterationTrace& tr = res.trace;
    const std::size_t nodes = mesh.size();
    for (std::size_t it = 0; it < config.max_iters; ++it) {
        const int iterate = static_cast<int>(it) + 2;
        std::vector<SpectralField> src;
        src.reserve(nodes);
        for (std::size_t i = 0; i < nodes; ++i) src.push_back(bilinear_source(cur.eta[i], cur.v[i], params.theta1));

        History next;
        next.eta.reserve(nodes);
        next.v.reserve(nodes);
        for (std::size_t n = 0; n < nodes; ++n) next.eta.push_back(lin.eta[n] - params.chi * plan_B.convolve(src, n));
        for (std::size_t n = 0; n < nodes; ++n) next.v.push_back(lin.v[n] + params.kappa * plan_T.convolve(next.eta, n));
        for (std::size_t n = 0; n < nodes; ++n) {
            if (!all_finite(next.eta[n]) || !all_finite(next.v[n])) {
                std::ostringstream os;
                os << "picard_solve: iterate " << iterate << " is not finite at node " << n;
                throw BlowUpError(os.str(), iterate);
            }
        }

        const double ne = sup_norm_in_time(next.eta, config.besov_eta, cutoff);
        const double nv = sup_norm_in_time(next.v, config.besov_v, cutoff);
        const double de = sup_norm_in_time(differences(next.eta, cur.eta), config.besov_eta, cutoff);
        const double dv = sup_norm_in_time(differences(next.v, cur.v), config.besov_v, cutoff);
        if (!std::isfinite(ne) || !std::isfinite(nv) || !std::isfinite(de) || !std::isfinite(dv)) {
            std::ostringstream os;
            os << "picard_solve: iterate " << iterate << " has a non-finite norm (overflow)";
            throw BlowUpError(os.str(), iterate);
        }
        tr.norm_eta_X.push_back(ne);
        tr.norm_v_Y.push_back(nv);
        tr.diff_eta.push_back(de);
        tr.diff_v.push_back(dv);
        tr.ratio.push_back(it == 0 ? std::numeric_limits<double>::quiet_NaN()
                                   : (tr.diff_eta[it - 1] > 0.0 ? de / tr.diff_eta[it - 1] : 0.0));
        cur = std::move(next);
        if (de <= config.tol_rel * ne && dv <= config.tol_rel * nv) {
            tr.converged = true;
            break;
        }
    }
    if (!tr.converged) tr.diverged = tr.diff_eta.back() >= tr.diff_eta.front();
    res.solution = std::move(cur);
    return res;
}

void EmpiricalConstants::validate() const {
    if (!(C1 > 0.0 && C2 > 0.0 && C > 0.0 && K > 0.0)) {
        std::ostringstream os;
        os << "EmpiricalConstants: all constants must be positive (C1 = " << C1 << ", C2 = " << C2 << ", C = " << C
           << ", K = " << K << ")";
        throw ParameterError(os.str());
    }
}

Smallness smallness_check(const SpectralField& eta0, const SpectralField& v0, const IterationConfig& config,
                          const EmpiricalConstants& constants) {
    constants.validate();
    config.validate();
    require_same_grid(eta0.grid(), v0.grid(), "smallness_check");
    const DyadicCutoff cutoff(eta0.grid());
    Smallness s;
    s.norm_eta0 = besov_norm(eta0, config.besov_eta, cutoff);
    s.norm_v0 = besov_norm(v0, config.besov_v, cutoff);
    s.eps_max = 1.0 / (2.0 * constants.K);
    s.eps = std::max(4.0 * constants.C * constants.C1 * s.norm_eta0, 2.0 * constants.C2 * s.norm_v0);
    s.admitted = s.eps < s.eps_max;
    return s;
}

double admission_threshold(const SpectralField& eta0, const SpectralField& v0, const IterationConfig& config,
                           const EmpiricalConstants& constants, double rel_tol) {
    auto admitted = [&](double a) { return smallness_check(a * eta0, a * v0, config, constants).admitted; };
    if (admitted(1e300)) return kInf;
    double lo = 0.0, hi = 1.0;
    while (admitted(hi)) {
        lo = hi;
        hi *= 2.0;
    }
    while (hi - lo > rel_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        (admitted(mid) ? lo : hi) = mid;
    }
    return lo;
}

BoundCheck iterate_bounds(const IterationTrace& trace, const Smallness& smallness,
                          const EmpiricalConstants& constants) {
    constants.validate();
    BoundCheck b;
    const double eta_bound = smallness.eps / (2.0 * constants.C);
    for (double x : trace.norm_eta_X) b.worst_eta = std::max(b.worst_eta, eta_bound > 0.0 ? x / eta_bound : (x > 0 ? kInf : 0.0));
    for (double x : trace.norm_v_Y)
        b.worst_v = std::max(b.worst_v, smallness.eps > 0.0 ? x / smallness.eps : (x > 0 ? kInf : 0.0));
    b.holds = b.worst_eta < 1.0 && b.worst_v < 1.0;
    return b;
}

UniquenessResult uniqueness_probe(const SpectralField& eta0, const SpectralField& v0, const ModelParams& params,
                                  const TimeMesh& mesh, const IterationConfig& config, int n_starts, unsigned seed) {
    if (n_starts < 1) throw ParameterError("uniqueness_probe: n_starts must be at least 1");
    const Grid& grid = eta0.grid();
    const History lin = linear_part(eta0, v0, params, mesh);
    const DyadicCutoff cutoff(grid);
    const double eta_scale = std::max(sup_norm_in_time(lin.eta, config.besov_eta, cutoff), 1e-300);
    const double v_scale = std::max(sup_norm_in_time(lin.v, config.besov_v, cutoff), 1e-300);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    auto perturbation = [&](const BesovParams& besov, double target) {
        SpectralField f(grid);
        const double kmax = grid.n() / 3;
        for (std::size_t i = 1; i < f.size(); ++i) {
            const auto k = grid.wavevector(i);
            bool keep = true;
            for (int a = 0; a < grid.dim(); ++a) keep = keep && std::abs(k[a]) <= kmax / 2;
            if (keep) f[i] = cplx(nd(rng), nd(rng));
        }
        f = hermitian_part(f);
        const double nrm = besov_norm(f, besov, cutoff);
        return nrm > 0.0 ? (0.5 * target / nrm) * f : f;
    };

    std::vector<History> starts;
    starts.push_back(lin);
    if (n_starts > 1) {
        History zero;
        for (std::size_t i = 0; i < mesh.size(); ++i) zero.append(SpectralField(grid), SpectralField(grid));
        starts.push_back(std::move(zero));
    }
    for (int s = 2; s < n_starts; ++s) {
        const SpectralField pe = perturbation(config.besov_eta, eta_scale);
        const SpectralField pv = perturbation(config.besov_v, v_scale);
        History h;
        for (std::size_t i = 0; i < mesh.size(); ++i) h.append(lin.eta[i] + pe, lin.v[i] + pv);
        starts.push_back(std::move(h));
    }

    const DuhamelPlan plan_B(grid, mesh, params, DuhamelKind::B);
    const DuhamelPlan plan_T(grid, mesh, params, DuhamelKind::T);
    UniquenessResult res;
    std::vector<History> solutions;
    for (int s = 0; s < n_starts; ++s) {
        try {
            PicardResult r = picard_solve(eta0, v0, plan_B, plan_T, config, starts[s]);
            if (r.trace.converged) {
                res.converged_starts.push_back(s);
                solutions.push_back(std::move(r.solution));
                continue;
            }
        } catch (const BlowUpError&) {
        }
        res.failed_starts.push_back(s);
    }
    for (std::size_t a = 0; a < solutions.size(); ++a) {
        const double se = std::max(physical_sup(solutions[a].eta), 1e-300);
        const double sv = std::max(physical_sup(solutions[a].v), 1e-300);
        for (std::size_t b = a + 1; b < solutions.size(); ++b) {
            const double de = physical_sup(differences(solutions[a].eta, solutions[b].eta)) / se;
            const double dv = physical_sup(differences(solutions[a].v, solutions[b].v)) / sv;
            res.max_distance = std::max({res.max_distance, de, dv});
        }
    }
    return res;
}

double HomogeneousData::cutoff(double xi) const {
    return smooth_step((xi - xi_lo) / xi_lo) * smooth_step((xi_hi - xi) / (0.5 * xi_hi));
}

SpectralField HomogeneousData::build(const Grid& grid) const {
    if (!(xi_lo > 0.0 && xi_hi > 4.0 * xi_lo)) {
        std::ostringstream os;
        os << "HomogeneousData: need 0 < 4 xi_lo < xi_hi (xi_lo = " << xi_lo << ", xi_hi = " << xi_hi << ")";
        throw ParameterError(os.str());
    }
    const int n = grid.dim();
    const double scale = amplitude * std::pow(grid.xi_unit() / (2.0 * std::numbers::pi), n);
    return from_symbol(grid, [&](const std::array<double, 3>& xi) {
        const double r = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
        return r == 0.0 ? cplx(0.0) : cplx(scale * std::pow(r, -(n + degree)) * cutoff(r));
    });
}

double eta_degree(const ModelParams& params) { return 2.0 - 2.0 * params.theta - params.theta1; }
double v_degree(const ModelParams& params) { return 2.0 - params.theta - params.theta1; }

SelfSimResult selfsim_check(const History& solution, const TimeMesh& mesh, const ModelParams& params, double sigma,
                            double t_from) {
    if (params.gamma != 0.0) {
        std::ostringstream os;
        os << "selfsim_check: scaling not applicable for gamma != 0 (gamma = " << params.gamma << ")";
        throw ParameterError(os.str());
    }
    const int isig = static_cast<int>(std::lround(sigma));
    if (!(sigma > 0.0) || std::abs(sigma - isig) > 1e-12 || isig < 1)
        throw ParameterError("selfsim_check: sigma must be a positive integer on a lattice");
    if (solution.size() == 0) throw ShapeError("selfsim_check: empty solution");
    const Grid& grid = solution.eta.front().grid();
    check_history(solution, grid, mesh, "selfsim_check");

    const double tscale = std::pow(sigma, params.theta / params.alpha);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 1; i < mesh.size(); ++i) {
        if (mesh[i] < t_from) continue;
        const double target = tscale * mesh[i];
        const auto& nodes = mesh.nodes();
        const auto it = std::lower_bound(nodes.begin(), nodes.end(), target * (1.0 - 1e-9));
        if (it != nodes.end() && std::abs(*it - target) <= 1e-9 * target)
            pairs.emplace_back(i, static_cast<std::size_t>(it - nodes.begin()));
    }
    if (pairs.empty()) throw ParameterError("selfsim_check: no mesh node matches sigma^{theta/alpha} t");

    // grid points x with |sigma x| <= L/2, mapped index j' = sigma (j - n/2) + n/2 per axis
    const int n = grid.n();
    std::vector<std::pair<std::size_t, std::size_t>> points;
    for (std::size_t flat = 0; flat < grid.size(); ++flat) {
        const auto idx = grid.multi_index(flat);
        std::array<int, 3> mapped{0, 0, 0};
        bool inside = true;
        for (int a = 0; a < grid.dim(); ++a) {
            const int off = isig * (idx[a] - n / 2);
            inside = inside && 4 * std::abs(off) <= n;
            mapped[a] = off + n / 2;
        }
        if (inside) points.emplace_back(flat, grid.flat_index(mapped));
    }

    std::size_t origin = 0;
    {
        std::array<int, 3> mid{0, 0, 0};
        for (int a = 0; a < grid.dim(); ++a) mid[a] = n / 2;
        origin = grid.flat_index(mid);
    }
    const double fe = std::pow(sigma, -eta_degree(params));
    const double fv = std::pow(sigma, -v_degree(params));
    SelfSimResult r;
    r.time_pairs = pairs.size();
    r.points = points.size();
    double de = 0.0, dv = 0.0, se = 0.0, sv = 0.0;
    for (const auto& [i, ip] : pairs) {
        const auto e = dft_inverse(solution.eta[i]), es = dft_inverse(solution.eta[ip]);
        const auto v = dft_inverse(solution.v[i]), vs = dft_inverse(solution.v[ip]);
        // modulo constants, measured from x = 0
        for (const auto& [x, xs] : points) {
            const double e1 = e[x] - e[origin], e2 = es[xs] - es[origin];
            const double v1 = v[x] - v[origin], v2 = vs[xs] - vs[origin];
            de = std::max(de, std::abs(e1 - fe * e2));
            dv = std::max(dv, std::abs(v1 - fv * v2));
            se = std::max(se, std::abs(e1));
            sv = std::max(sv, std::abs(v1));
        }
    }
    r.err_eta = se > 0.0 ? de / se : de;
    r.err_v = sv > 0.0 ? dv / sv : dv;
    return r;
}

double selfsim_linear_modes(const HomogeneousData& data, const Grid& grid, const ModelParams& params, double sigma,
                            const std::vector<double>& times) {
    const int isig = static_cast<int>(std::lround(sigma));
    if (!(sigma > 0.0) || std::abs(sigma - isig) > 1e-12 || isig < 1)
        throw ParameterError("selfsim_linear_modes: sigma must be a positive integer on a lattice");
    params.validate(grid.dim());
    const SpectralField c = data.build(grid);
    const double d = data.degree;
    const int n = grid.dim();
    const double a = params.alpha;
    const double tscale = std::pow(sigma, params.theta / a);
    const MainardiRule rule(a);
    double worst = 0.0;
    bool any = false;
    for (std::size_t flat = 1; flat < grid.size(); ++flat) {
        const auto k = grid.wavevector(flat);
        std::array<int, 3> ks{0, 0, 0};
        bool ok = true;
        for (int ax = 0; ax < n; ++ax) {
            ks[ax] = isig * k[ax];
            ok = ok && 2 * std::abs(ks[ax]) < grid.n();
        }
        if (!ok) continue;
        std::array<int, 3> idx{0, 0, 0};
        for (int ax = 0; ax < n; ++ax) idx[ax] = grid.index_of(ks[ax]);
        const std::size_t sflat = grid.flat_index(idx);
        const double xi = grid.xi_norm(flat), xs = grid.xi_norm(sflat);
        if (!data.flat(xi) || !data.flat(xs)) continue;
        any = true;
        for (double t : times) {
            const double direct =
                ml_value(a, 1.0, std::pow(t, a) * params.D_eta * std::pow(xs, params.theta)) * c[sflat].real();
            const double lam = std::pow(tscale * t, a) * params.D_eta * std::pow(xi, params.theta);
            const double via_m = rule.integrate([&](double tau) { return std::exp(-lam * tau); });
            const double scaled = std::pow(sigma, -n - d) * via_m * c[flat].real();
            worst = std::max(worst, std::abs(direct - scaled) / std::abs(direct));
        }
    }
    if (!any) throw ParameterError("selfsim_linear_modes: no lattice pair inside the flat range of the data");
    return worst;
}

}  // namespace fracks
