#pragma once

#include "fracks/besov.hpp"
#include "fracks/duhamel.hpp"
#include "fracks/spectral.hpp"

#include <cstddef>
#include <optional>
#include <ostream>
#include <vector>

namespace fracks {

struct IterationConfig {
    std::size_t max_iters = 60;
    /// Stop when both successive differences fall below tol_rel times the iterate norm.
    double tol_rel = 1e-10;
    BesovParams besov_eta;  ///< s1 = 2 - 2 theta - theta1 + n/p, r = inf
    BesovParams besov_v;    ///< s2 = 2 - theta - theta1 + n/q, r = inf

    /// Exponents of the X and Y spaces for this model.
    static IterationConfig for_model(const ModelParams& params, int dim, double p = 2.0, double q = 2.0);
    void validate() const;
};

struct IterationTrace {
    std::vector<double> norm_eta_X;  ///< sup over nodes of ||eta^n||
    std::vector<double> norm_v_Y;
    std::vector<double> diff_eta;  ///< sup over nodes of ||eta^{n+1} - eta^n||
    std::vector<double> diff_v;
    std::vector<double> ratio;  ///< diff_eta[i] / diff_eta[i-1]; NaN for i = 0
    bool converged = false;
    bool diverged = false;

    std::size_t iterations() const noexcept { return diff_eta.size(); }
    /// Largest ratio over the second half of the trace.
    double contraction_estimate() const;
    /// CSV with header iter,norm_eta_X,norm_v_Y,diff_eta,diff_v,ratio.
    void write_csv(std::ostream& os) const;
};

struct PicardResult {
    History solution;
    IterationTrace trace;
};

/// The linear parts eta^1 = E_alpha(-t^alpha (-Delta)^{theta/2}) eta0 and
/// v^1 = E_alpha(-t^alpha ((-Delta)^{theta/2} -+ gamma)) v0 at every node.
History linear_part(const SpectralField& eta0, const SpectralField& v0, const ModelParams& params,
                    const TimeMesh& mesh);

/// eta^{n+1} = eta^1 + B(eta^n, v^n), v^{n+1} = v^1 + T(eta^{n+1}), started
/// from `start` (the linear part when empty). Norms are maxima over mesh
/// nodes. Throws BlowUpError when an iterate is not finite.
PicardResult picard_solve(const SpectralField& eta0, const SpectralField& v0, const ModelParams& params,
                          const TimeMesh& mesh, const IterationConfig& config,
                          const std::optional<History>& start = std::nullopt);
/// Same, reusing weight plans (params and mesh are taken from plan_B).
PicardResult picard_solve(const SpectralField& eta0, const SpectralField& v0, const DuhamelPlan& plan_B,
                          const DuhamelPlan& plan_T, const IterationConfig& config,
                          const std::optional<History>& start = std::nullopt);

/// max over nodes of ||eta(t_i)||_{B^{s}_{p,r}}.
double sup_norm_in_time(const std::vector<SpectralField>& series, const BesovParams& besov,
                        const DyadicCutoff& cutoff);

struct EmpiricalConstants {
    double C1 = 1.0;  ///< ||eta^1||_X <= C1 ||eta0||_X
    double C2 = 1.0;  ///< ||v^1||_Y <= C2 ||v0||_Y
    double C = 1.0;   ///< ||T(eta)||_Y <= C ||eta||_X
    double K = 1.0;   ///< ||B(eta, v)||_X <= K ||eta||_X ||v||_Y

    void validate() const;
};

struct Smallness {
    double eps = 0.0;      ///< smallest eps the data conditions allow
    double eps_max = 0.0;  ///< 1 / (2K)
    bool admitted = false;
    double norm_eta0 = 0.0;
    double norm_v0 = 0.0;
};

/// Data conditions C1 ||eta0||_X <= eps/(4C), C2 ||v0||_Y <= eps/2 with
/// 0 < eps < 1/(2K).
Smallness smallness_check(const SpectralField& eta0, const SpectralField& v0, const IterationConfig& config,
                          const EmpiricalConstants& constants);

/// Largest factor a with (a eta0, a v0) admitted, by bisection.
double admission_threshold(const SpectralField& eta0, const SpectralField& v0, const IterationConfig& config,
                           const EmpiricalConstants& constants, double rel_tol = 1e-10);

/// Iterate bounds ||eta^n||_X < eps/(2C) and ||v^n||_Y < eps over a trace.
struct BoundCheck {
    double worst_eta = 0.0;  ///< max_n ||eta^n||_X / (eps/(2C))
    double worst_v = 0.0;    ///< max_n ||v^n||_Y / eps
    bool holds = false;
};
BoundCheck iterate_bounds(const IterationTrace& trace, const Smallness& smallness,
                          const EmpiricalConstants& constants);

struct UniquenessResult {
    double max_distance = 0.0;  ///< relative sup-norm distance of converged solutions
    std::vector<int> converged_starts;
    std::vector<int> failed_starts;
};

/// Runs picard_solve from n_starts first iterates: the linear part, zero, then
/// the linear part plus seeded perturbations.
UniquenessResult uniqueness_probe(const SpectralField& eta0, const SpectralField& v0, const ModelParams& params,
                                  const TimeMesh& mesh, const IterationConfig& config, int n_starts,
                                  unsigned seed = 1);

/// Power-law data A (xi_unit / 2 pi)^n |xi|^{-(n + degree)} with smooth cutoffs
/// rising on [xi_lo, 2 xi_lo] and falling on [xi_hi / 2, xi_hi].
struct HomogeneousData {
    double degree = 0.0;
    double amplitude = 1.0;
    double xi_lo = 1.0;
    double xi_hi = 16.0;

    SpectralField build(const Grid& grid) const;
    double cutoff(double xi_norm) const;
    /// True where the cutoff is exactly 1.
    bool flat(double xi_norm) const { return xi_norm >= 2.0 * xi_lo && xi_norm <= 0.5 * xi_hi; }
};

/// Degrees of the scale-invariant data: 2 - 2 theta - theta1 and 2 - theta - theta1.
double eta_degree(const ModelParams& params);
double v_degree(const ModelParams& params);

struct SelfSimResult {
    double err_eta = 0.0;
    double err_v = 0.0;
    std::size_t time_pairs = 0;
    std::size_t points = 0;
};

/// Relative sup discrepancy between eta(x, t) and sigma^{-d} eta(sigma x, sigma^{theta/alpha} t)
/// (v likewise), both taken modulo constants (relative to x = 0), over grid
/// points with |sigma x| <= L/2 and node pairs (t, sigma^{theta/alpha} t) with
/// t >= t_from > 0 or t > 0. sigma must be a positive integer. Throws
/// ParameterError for gamma != 0 and when no node pair matches.
SelfSimResult selfsim_check(const History& solution, const TimeMesh& mesh, const ModelParams& params,
                            double sigma, double t_from = 0.0);

/// Per-mode scaling of the linear part: max relative deviation between the
/// direct coefficient E_alpha(-t^alpha |sigma xi|^theta) eta0(sigma k) and
/// sigma^{-n-d} eta0(k) times the Mainardi-integral value at sigma^{theta/alpha} t,
/// over lattice pairs (k, sigma k) in the flat range of the data.
double selfsim_linear_modes(const HomogeneousData& data, const Grid& grid, const ModelParams& params,
                            double sigma, const std::vector<double>& times);

}  // namespace fracks
