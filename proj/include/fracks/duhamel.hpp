#pragma once

#include "fracks/besov.hpp"
#include "fracks/spectral.hpp"

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace fracks {

/// Partition 0 = t_0 < ... < t_n = t_final, t_i = t_final (i/n)^grading.
class TimeMesh {
public:
    TimeMesh(double t_final, std::size_t n_steps, double grading = 1.0);
    static TimeMesh uniform(double t_final, std::size_t n_steps) { return TimeMesh(t_final, n_steps, 1.0); }
    /// Grading exponent 2/alpha.
    static TimeMesh graded(double t_final, std::size_t n_steps, double alpha);

    double t_final() const noexcept { return t_final_; }
    std::size_t n_steps() const noexcept { return nodes_.size() - 1; }
    std::size_t size() const noexcept { return nodes_.size(); }
    double grading() const noexcept { return grading_; }
    bool is_uniform() const noexcept { return grading_ == 1.0; }
    const std::vector<double>& nodes() const noexcept { return nodes_; }
    double operator[](std::size_t i) const { return nodes_[i]; }

    bool operator==(const TimeMesh& o) const noexcept {
        return t_final_ == o.t_final_ && grading_ == o.grading_ && nodes_.size() == o.nodes_.size();
    }

private:
    double t_final_;
    double grading_;
    std::vector<double> nodes_;
};

/// Per-node snapshots of eta and v on one grid.
struct History {
    std::vector<SpectralField> eta;
    std::vector<SpectralField> v;

    void append(SpectralField eta_i, SpectralField v_i);
    std::size_t size() const noexcept { return eta.size(); }
    /// Throws ShapeError when the grids differ or the lengths disagree.
    void validate() const;
};

/// Product-integration weights for int_0^{t_n} K(t_n - tau) c(tau) dtau with
/// c piecewise linear on the mesh and the kernel
///   K(s) = s^{alpha-1} E_{alpha,alpha}(-m s^alpha)
/// integrated exactly through its moments
///   int_0^s K = s^alpha E_{alpha,alpha+1}(-m s^alpha),
///   int_0^s u K(u) du = s^{alpha+1} (E_{alpha,alpha+1} - E_{alpha,alpha+2})(-m s^alpha).
/// Negative m (literal gamma sign) evaluates the functions on the positive axis.
std::vector<double> kernel_weights(const TimeMesh& mesh, std::size_t n, double alpha, double m);

/// The same weights for the bare kernel s^{alpha-1} (Riemann-Liouville, no 1/Gamma).
std::vector<double> power_weights(const TimeMesh& mesh, std::size_t n, double alpha);

/// I^alpha f at every node: product integration against the piecewise-linear
/// interpolant of f.
std::vector<double> rl_integral(const std::vector<double>& f, const TimeMesh& mesh, double alpha);

/// Radial symbol m(xi) per |k|^2 class for one of the two Duhamel operators.
enum class DuhamelKind {
    B,  ///< eta equation: D_eta |xi|^theta
    T,  ///< v equation: D_v |xi|^theta shifted by gamma
};

/// Caches the kernel weights of one operator on one (grid, mesh) pair. Rows
/// are built on first use; the object is safe to share between threads.
class DuhamelPlan {
public:
    DuhamelPlan(const Grid& grid, const TimeMesh& mesh, const ModelParams& params, DuhamelKind kind);

    const Grid& grid() const noexcept { return grid_; }
    const TimeMesh& mesh() const noexcept { return mesh_; }
    const ModelParams& params() const noexcept { return params_; }
    DuhamelKind kind() const noexcept { return kind_; }

    /// sum_i w_i(|k|) data_i(k): the time convolution of the per-node fields
    /// data[0..n] with the kernel, evaluated at t_n.
    SpectralField convolve(const std::vector<SpectralField>& data, std::size_t n) const;

private:
    struct Row {
        // weights[class][i]
        std::vector<std::vector<double>> weights;
    };
    const Row& row(std::size_t n) const;

    Grid grid_;
    TimeMesh mesh_;
    ModelParams params_;
    DuhamelKind kind_;
    std::vector<long> classes_;       // distinct |k|^2 present on the grid
    std::vector<int> class_of_k2_;    // |k|^2 -> index into classes_, -1 if absent
    mutable std::mutex mu_;
    mutable std::map<std::size_t, std::shared_ptr<const Row>> rows_;
};

/// The source div(eta G(v)) at one node (dealiased product).
SpectralField bilinear_source(const SpectralField& eta, const SpectralField& v, double theta1);

/// B(eta, v)(t_n) = -chi int_0^{t_n} (t_n - tau)^{alpha-1} div E_{alpha,alpha}(...)(eta G(v))(tau) dtau.
SpectralField duhamel_B(const History& history, const TimeMesh& mesh, const ModelParams& params,
                        std::size_t t_index);
SpectralField duhamel_B(const History& history, const DuhamelPlan& plan, std::size_t t_index);

/// T(eta)(t_n) = kappa int_0^{t_n} (t_n - tau)^{alpha-1} E_{alpha,alpha}(...) eta(tau) dtau.
SpectralField duhamel_T(const History& history, const TimeMesh& mesh, const ModelParams& params,
                        std::size_t t_index);
SpectralField duhamel_T(const History& history, const DuhamelPlan& plan, std::size_t t_index);

/// max over interior nodes of |d/dt I^{1-alpha}[u - u(0)] - rhs|, with the
/// derivative by three-point differences on the (possibly graded) mesh.
/// alpha = 1 compares the plain derivative. Needs at least 16 nodes.
/// Nodes with t < skip_fraction * t_final are left out.
double caputo_residual(const std::vector<double>& u, double alpha, const std::vector<double>& rhs,
                       const TimeMesh& mesh, double skip_fraction = 0.125);

struct YamazakiParams {
    double p = 2.0;
    double s = 0.0;
    double s0 = 0.0;
    double zeta = 0.0;
    double theta = 1.2;
    double alpha = 0.8;

    /// -s + theta - zeta = -s0, p >= 1, 0 < alpha <= 1.
    void check() const;
};

struct YamazakiResult {
    double integral = 0.0;       ///< int_0^{t_final}, head included
    double tail = 0.0;           ///< extrapolated int_{t_final}^inf
    double tail_exponent = 0.0;  ///< fitted log-log slope over the last decade
    double norm_f = 0.0;         ///< ||f||_{B^{-s}_{p,1}}
    double ratio = 0.0;          ///< (integral + tail) / norm_f
    std::vector<double> tau;     ///< quadrature nodes
    std::vector<double> integrand;
};

/// The integrand
///   || tau^{alpha-1} (-Delta)^{zeta/2} E_{alpha,alpha}(-tau^alpha (-Delta)^{theta/2}) f ||_{B^{-s0}_{p,1}}
/// at one tau.
double yamazaki_integrand(const SpectralField& f, const YamazakiParams& params, const DyadicCutoff& cutoff,
                          double tau);

/// Integrates the integrand over (0, t_final] on a log-spaced grid starting
/// at tau_min, with the head (integrand ~ tau^{alpha-1}) added analytically
/// and the tail extrapolated from the slope over the last decade.
YamazakiResult yamazaki_integral_check(const SpectralField& f, const YamazakiParams& params,
                                       const DyadicCutoff& cutoff, double t_final,
                                       int points_per_decade = 24, double tau_min = 1e-8);

}  // namespace fracks
