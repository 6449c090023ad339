#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace fracks {

using cplx = std::complex<double>;

/// Uniform periodic grid on [-L, L)^dim with n points per axis.
///
/// Storage is flat, row-major (last axis fastest). In coefficient space the
/// index i along an axis holds wavenumber k = i for i < n/2 and k = i - n
/// otherwise, so k = -n/2 is the Nyquist mode. Physical frequency is
/// xi = pi k / L.
class Grid {
public:
    Grid(int dim, int n, double half_width);

    int dim() const noexcept { return dim_; }
    int n() const noexcept { return n_; }
    double half_width() const noexcept { return half_width_; }
    std::size_t size() const noexcept { return size_; }
    double dx() const noexcept { return 2.0 * half_width_ / n_; }
    double cell_volume() const noexcept;
    /// (2L)^dim
    double volume() const noexcept;
    /// pi / L, the spacing of the frequency lattice.
    double xi_unit() const noexcept { return xi_unit_; }

    double coord(int j) const noexcept { return -half_width_ + j * dx(); }
    int wavenumber(int i) const noexcept { return i < n_ / 2 ? i : i - n_; }
    int index_of(int k) const noexcept { return k >= 0 ? k : k + n_; }

    std::array<int, 3> multi_index(std::size_t flat) const noexcept;
    std::size_t flat_index(const std::array<int, 3>& idx) const noexcept;
    /// Wavenumber vector of a flat coefficient index (unused axes are 0).
    std::array<int, 3> wavevector(std::size_t flat) const noexcept;
    /// |k|^2 of a flat coefficient index.
    long k_norm2(std::size_t flat) const noexcept;
    /// |xi| of a flat coefficient index.
    double xi_norm(std::size_t flat) const noexcept;
    /// True if any axis sits on the unpaired Nyquist wavenumber.
    bool has_nyquist(std::size_t flat) const noexcept;
    /// Largest |k|^2 on the lattice.
    long max_k_norm2() const noexcept { return static_cast<long>(dim_) * (n_ / 2) * (n_ / 2); }

    bool operator==(const Grid& o) const noexcept {
        return dim_ == o.dim_ && n_ == o.n_ && half_width_ == o.half_width_;
    }
    bool operator!=(const Grid& o) const noexcept { return !(*this == o); }

private:
    int dim_;
    int n_;
    double half_width_;
    std::size_t size_;
    double xi_unit_;
};

/// Fourier coefficients c_k of a field on a Grid, normalized so that
/// f(x_j) = sum_k c_k exp(i xi_k . x_j).
class SpectralField {
public:
    explicit SpectralField(const Grid& grid);
    SpectralField(const Grid& grid, std::vector<cplx> coeffs);

    const Grid& grid() const noexcept { return grid_; }
    std::vector<cplx>& coeffs() noexcept { return coeffs_; }
    const std::vector<cplx>& coeffs() const noexcept { return coeffs_; }
    std::size_t size() const noexcept { return coeffs_.size(); }
    cplx& operator[](std::size_t i) { return coeffs_[i]; }
    const cplx& operator[](std::size_t i) const { return coeffs_[i]; }

    /// Mean of the field (the zero-mode coefficient).
    cplx mean() const { return coeffs_[0]; }

    SpectralField& operator+=(const SpectralField& o);
    SpectralField& operator-=(const SpectralField& o);
    SpectralField& operator*=(double s);
    SpectralField& operator*=(cplx s);

private:
    Grid grid_;
    std::vector<cplx> coeffs_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);
SpectralField operator*(cplx s, SpectralField a);

using VectorField = std::vector<SpectralField>;

/// Throws ShapeError when the grids differ.
void require_same_grid(const Grid& a, const Grid& b, const char* where);

// ---------------------------------------------------------------------------
// Transforms
// ---------------------------------------------------------------------------

SpectralField dft_forward(const Grid& grid, const std::vector<double>& values);
SpectralField dft_forward(const Grid& grid, const std::vector<cplx>& values);
/// Real part of the inverse transform.
std::vector<double> dft_inverse(const SpectralField& f);
std::vector<cplx> dft_inverse_complex(const SpectralField& f);

/// Samples fn on the grid points.
std::vector<double> sample(const Grid& grid, const std::function<double(const std::array<double, 3>&)>& fn);

/// Builds a field from a function of the wavevector xi (coefficients, not
/// transform values).
SpectralField from_symbol(const Grid& grid, const std::function<cplx(const std::array<double, 3>&)>& coeff);

/// Enforces c(-k) = conj(c(k)) by averaging; Nyquist-only modes become real.
SpectralField hermitian_part(const SpectralField& f);
/// max |c(-k) - conj(c(k))|
double hermitian_defect(const SpectralField& f);

// ---------------------------------------------------------------------------
// Norms
// ---------------------------------------------------------------------------

/// (sum |f_j|^2 dV)^{1/2}
double grid_l2_norm(const Grid& grid, const std::vector<double>& values);
/// ((2L)^dim sum |c_k|^2)^{1/2}; equals grid_l2_norm of the inverse transform.
double coeff_l2_norm(const SpectralField& f);
/// (sum |f_j|^p dV)^{1/p}, p = infinity gives the grid maximum.
double grid_lp_norm(const Grid& grid, const std::vector<double>& values, double p);
double sup_abs(const std::vector<double>& values);

// ---------------------------------------------------------------------------
// Model parameters
// ---------------------------------------------------------------------------

/// Sign convention for the constant gamma inside the Mittag-Leffler argument.
///  damped: m(xi) = D |xi|^theta + gamma (decaying; matches e^{-gamma t} U(t) at alpha = 1)
///  paper:  m(xi) = D |xi|^theta - gamma (the literal form of the mild formulation)
enum class GammaSign { damped, paper };

const char* to_string(GammaSign s);
GammaSign parse_gamma_sign(const std::string& s);

struct ModelParams {
    double alpha = 0.8;
    double theta = 1.2;
    double theta1 = 0.25;
    double gamma = 0.0;
    double chi = 1.0;
    double kappa = 1.0;
    double D_eta = 1.0;
    double D_v = 1.0;
    GammaSign gamma_sign = GammaSign::damped;

    /// Basic ranges: 0 < alpha <= 1, theta > 0, 0 <= theta1 < dim, gamma >= 0,
    /// positive physical constants. Throws ParameterError.
    void validate(int dim) const;

    /// Well-posedness window
    ///   max{1, 1 - n/2 - theta1/2 + n/p} < theta < 1 + (n - theta1)/3
    /// Throws ParameterError naming the violated side.
    void check_window(int dim, double p) const;
    /// Non-throwing variant of check_window; returns an empty string when admissible.
    std::string window_violation(int dim, double p) const;
};

// ---------------------------------------------------------------------------
// Fourier multipliers
// ---------------------------------------------------------------------------

/// Multiplies every coefficient by symbol(|xi|); the symbol is evaluated once
/// per distinct |k|^2. zero_mode is used at xi = 0.
SpectralField apply_radial(const SpectralField& f, const std::function<double(double)>& symbol,
                           double zero_mode);

/// Table of a radial symbol indexed by |k|^2; entries for unused |k|^2 are NaN.
std::vector<double> radial_table(const Grid& grid, const std::function<double(double)>& symbol,
                                 double zero_mode);
SpectralField apply_table(const SpectralField& f, const std::vector<double>& table);

/// (-Delta)^{theta/2}: symbol |xi|^theta.
SpectralField frac_laplacian(const SpectralField& f, double theta);

/// Components of grad (-Delta)^{-theta1/2} v: symbol i xi_j |xi|^{-theta1},
/// zero at xi = 0 and on the Nyquist plane of axis j.
VectorField g_kernel(const SpectralField& v, double theta1);

/// e^{-t |xi|^theta}
SpectralField heat_semigroup(const SpectralField& f, double t, double theta);

enum class MLFamily { E_alpha, E_alpha_alpha };

/// Symbol m(xi) = diffusion |xi|^theta, shifted by gamma according to
/// params.gamma_sign when gamma_shift is set.
double ml_symbol(const ModelParams& params, double xi_norm, bool gamma_shift, double diffusion = 1.0);

/// E_{alpha,beta}(-t^alpha m(xi)), beta = 1 or alpha by family.
double ml_multiplier(const ModelParams& params, MLFamily family, double t, double xi_norm,
                     bool gamma_shift, double diffusion = 1.0);

std::vector<double> ml_table(const Grid& grid, const ModelParams& params, MLFamily family, double t,
                             bool gamma_shift, double diffusion = 1.0);

SpectralField ml_operator(const SpectralField& f, double t, const ModelParams& params,
                          MLFamily family, bool gamma_shift, double diffusion = 1.0);

/// sum_j i xi_j F_j; Nyquist plane of axis j contributes nothing.
SpectralField divergence(const VectorField& fields);

/// Gradient components i xi_j f.
VectorField gradient(const SpectralField& f);

/// Zeroes every mode with |k_a| > n/3 on some axis.
SpectralField dealias(const SpectralField& f);
bool is_dealiased(const SpectralField& f);

/// Grid-space product. With dealias set both factors and the result are
/// truncated by the 2/3 rule, which makes the retained modes an exact
/// convolution of the truncated inputs.
SpectralField pointwise_product(const SpectralField& f, const SpectralField& g, bool dealias = true);

// ---------------------------------------------------------------------------
// Resampling
// ---------------------------------------------------------------------------

/// Trigonometric interpolant evaluated at arbitrary points (1-D helper for
/// tests and plots).
std::vector<double> interpolate_1d(const SpectralField& f, const std::vector<double>& points);

/// g(x) = f(sigma x) for x in the box |sigma x_a| < L on every axis, 0 outside.
/// Exact for band-limited f when the support of f sits inside the box.
SpectralField dilate(const SpectralField& f, double sigma);

/// Same grid field resampled on another grid with the same dim: the
/// trigonometric interpolant evaluated on the new points (0 outside [-L, L)).
SpectralField resample(const SpectralField& f, const Grid& target);

// ---------------------------------------------------------------------------
// Snapshot I/O (.fkf)
// ---------------------------------------------------------------------------

struct Snapshot {
    SpectralField field;
    std::string name;
    double time = 0.0;
};

/// One JSON header line followed by little-endian complex doubles in
/// storage order.
void write_fkf(const std::string& path, const SpectralField& f, const std::string& name, double time);
Snapshot read_fkf(const std::string& path);

}  // namespace fracks
