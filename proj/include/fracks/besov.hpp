#pragma once

#include "fracks/spectral.hpp"

#include <limits>
#include <map>
#include <vector>

namespace fracks {

/// Smooth dyadic partition of unity on the frequency lattice of a grid.
///
/// chi(u) = psi((8/3 - u)/(2/3)) psi((u - 3/4)/(1/4)), psi(s) = exp(-1/s) for
/// s > 0, and phi_j(xi) = chi(|xi| 2^-j) / sum_k chi(|xi| 2^-k). The support
/// of phi_j is the open annulus 3/4 2^j < |xi| < 8/3 2^j.
class DyadicCutoff {
public:
    explicit DyadicCutoff(const Grid& grid);

    const Grid& grid() const noexcept { return grid_; }
    int j_min() const noexcept { return j_min_; }
    int j_max() const noexcept { return j_max_; }
    int shells() const noexcept { return j_max_ - j_min_ + 1; }
    /// Largest |xi| kept by the 2/3 rule (along the diagonal).
    double resolved_xi() const noexcept { return resolved_xi_; }

    /// phi_j(xi) for |xi| = xi_norm.
    static double phi(int j, double xi_norm);
    static double chi(double u);

    /// phi_j tabulated by |k|^2 on the grid.
    const std::vector<double>& table(int j) const;

    /// max over resolved lattice xi != 0 of |sum_j phi_j(xi) - 1|.
    double partition_defect() const;

private:
    Grid grid_;
    int j_min_ = 0;
    int j_max_ = 0;
    double resolved_xi_ = 0.0;
    std::vector<std::vector<double>> tables_;
};

struct BesovParams {
    double s = 0.0;
    double p = 2.0;
    double r = std::numeric_limits<double>::infinity();

    void validate() const;
};

struct LPBlocks {
    /// Delta_j f for j in [j_min, j_max]
    std::map<int, SpectralField> blocks;
    /// Coefficient-space L2 mass of f minus its mean that the blocks miss.
    double residual_mass = 0.0;
};

LPBlocks lp_decompose(const SpectralField& f, const DyadicCutoff& cutoff);

/// Delta_j f
SpectralField lp_block(const SpectralField& f, const DyadicCutoff& cutoff, int j);

/// Discrete l^r over j in [j_min, j_max] of 2^{js} ||Delta_j f||_{L^p}.
double besov_norm(const SpectralField& f, const BesovParams& params, const DyadicCutoff& cutoff);
/// Same, with the pointwise Euclidean magnitude of the components.
double besov_norm(const VectorField& f, const BesovParams& params, const DyadicCutoff& cutoff);
/// The sequence 2^{js} ||Delta_j f||_{L^p}, indexed from j_min.
std::vector<double> besov_profile(const VectorField& f, const BesovParams& params,
                                  const DyadicCutoff& cutoff);

struct BonySplit {
    SpectralField T_fg;
    SpectralField T_gf;
    SpectralField R;
};

/// T_f g = sum_j S_{j-2} f Delta_j g, T_g f likewise and R = sum_j Delta_j f
/// Delta~_j g, with S_k = sum_{j<=k} Delta_j. The mean is a block below
/// j_min and the uncovered high modes a block above j_max, so the three parts
/// add up to pointwise_product(f, g) exactly up to rounding.
BonySplit bony_split(const SpectralField& f, const SpectralField& g, const DyadicCutoff& cutoff);

struct BernsteinResult {
    double lhs = 0.0;
    double ratio = 0.0;
};

/// ||f||_{L^p} and ||f||_{L^p} / (2^{j(n/q - n/p)} ||f||_{L^q}) for f with
/// spectrum in the closed annulus D_j. Throws ParameterError otherwise.
BernsteinResult bernstein_check(const SpectralField& f, int j, double p, double q,
                                const DyadicCutoff& cutoff);

struct ProductParams {
    double p = 2.0;
    double q = 2.0;
    double theta = 1.2;
    double theta1 = 0.25;
    double rho1 = 0.0;
    double rho2 = 0.0;

    /// 6n/(5n + theta1) < p <= q <= p', the theta window, rho >= 0.
    void check(int dim) const;
    double s0(int dim) const { return 3.0 - 3.0 * theta - theta1 + dim / p + rho1 + rho2; }
    double s1(int dim) const { return 2.0 - 2.0 * theta - theta1 + dim / p + rho1; }
    double s2(int dim) const { return 2.0 - theta - theta1 + dim / q + rho2; }
};

/// ||f G(g)||_{B^{s0}_{p,inf}} / (||f||_{B^{s1}_{p,inf}} ||g||_{B^{s2}_{q,inf}}),
/// with G = grad (-Delta)^{-theta1/2}. Returns 0 when the numerator is 0.
double product_estimate_check(const SpectralField& f, const SpectralField& g,
                              const ProductParams& params, const DyadicCutoff& cutoff);

/// Conjugate exponent p' (infinity for p = 1).
double conjugate_exponent(double p);

}  // namespace fracks
