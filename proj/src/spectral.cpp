#include "fracks/spectral.hpp"

#include "fracks/errors.hpp"
#include "fracks/specfun.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <tuple>

#include <json.hpp>

namespace fracks {

// ---------------------------------------------------------------------------
// Grid
// ---------------------------------------------------------------------------

Grid::Grid(int dim, int n, double half_width) : dim_(dim), n_(n), half_width_(half_width) {
    if (dim < 1 || dim > 3) {
        std::ostringstream os;
        os << "Grid: dim must be 1, 2 or 3, got " << dim;
        throw ParameterError(os.str());
    }
    if (n < 8 || (n & (n - 1)) != 0) {
        std::ostringstream os;
        os << "Grid: points per axis must be a power of two >= 8, got " << n;
        throw ParameterError(os.str());
    }
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
        std::ostringstream os;
        os << "Grid: half width L must be > 0, got " << half_width;
        throw ParameterError(os.str());
    }
    size_ = 1;
    for (int a = 0; a < dim; ++a) size_ *= static_cast<std::size_t>(n);
    xi_unit_ = std::numbers::pi / half_width;
}

double Grid::cell_volume() const noexcept { return std::pow(dx(), dim_); }

double Grid::volume() const noexcept { return std::pow(2.0 * half_width_, dim_); }

std::array<int, 3> Grid::multi_index(std::size_t flat) const noexcept {
    std::array<int, 3> idx{0, 0, 0};
    for (int a = dim_ - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(flat % n_);
        flat /= n_;
    }
    return idx;
}

std::size_t Grid::flat_index(const std::array<int, 3>& idx) const noexcept {
    std::size_t flat = 0;
    for (int a = 0; a < dim_; ++a) flat = flat * n_ + idx[a];
    return flat;
}

std::array<int, 3> Grid::wavevector(std::size_t flat) const noexcept {
    auto idx = multi_index(flat);
    for (int a = 0; a < dim_; ++a) idx[a] = wavenumber(idx[a]);
    return idx;
}

long Grid::k_norm2(std::size_t flat) const noexcept {
    const auto k = wavevector(flat);
    return static_cast<long>(k[0]) * k[0] + static_cast<long>(k[1]) * k[1] +
           static_cast<long>(k[2]) * k[2];
}

double Grid::xi_norm(std::size_t flat) const noexcept {
    return std::sqrt(static_cast<double>(k_norm2(flat))) * xi_unit_;
}

bool Grid::has_nyquist(std::size_t flat) const noexcept {
    const auto idx = multi_index(flat);
    for (int a = 0; a < dim_; ++a)
        if (idx[a] == n_ / 2) return true;
    return false;
}

// ---------------------------------------------------------------------------
// SpectralField
// ---------------------------------------------------------------------------

SpectralField::SpectralField(const Grid& grid) : grid_(grid), coeffs_(grid.size(), cplx(0.0)) {}

SpectralField::SpectralField(const Grid& grid, std::vector<cplx> coeffs)
    : grid_(grid), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != grid_.size()) {
        std::ostringstream os;
        os << "SpectralField: " << coeffs_.size() << " coefficients for a grid of " << grid_.size();
        throw ShapeError(os.str());
    }
}

void require_same_grid(const Grid& a, const Grid& b, const char* where) {
    if (a != b) {
        std::ostringstream os;
        os << where << ": grid mismatch (" << a.dim() << "d n=" << a.n() << " L=" << a.half_width()
           << " vs " << b.dim() << "d n=" << b.n() << " L=" << b.half_width() << ")";
        throw ShapeError(os.str());
    }
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
    require_same_grid(grid_, o.grid_, "SpectralField +=");
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
    require_same_grid(grid_, o.grid_, "SpectralField -=");
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    return *this;
}

SpectralField& SpectralField::operator*=(double s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
}

SpectralField& SpectralField::operator*=(cplx s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }
SpectralField operator*(cplx s, SpectralField a) { return a *= s; }

// ---------------------------------------------------------------------------
// FFT
// ---------------------------------------------------------------------------

namespace {

fftw_plan plan_for(const Grid& g, int sign) {
    static std::mutex mu;
    static std::map<std::tuple<int, int, int>, fftw_plan> plans;
    std::lock_guard<std::mutex> lock(mu);
    const auto key = std::make_tuple(g.dim(), g.n(), sign);
    auto it = plans.find(key);
    if (it != plans.end()) return it->second;
    std::vector<cplx> a(g.size()), b(g.size());
    int dims[3] = {g.n(), g.n(), g.n()};
    fftw_plan p = fftw_plan_dft(g.dim(), dims, reinterpret_cast<fftw_complex*>(a.data()),
                                reinterpret_cast<fftw_complex*>(b.data()), sign,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans.emplace(key, p);
    return p;
}

void run_fft(const Grid& g, int sign, std::vector<cplx>& in, std::vector<cplx>& out) {
    fftw_execute_dft(plan_for(g, sign), reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
}

// (-1)^{k_1 + ... + k_dim}: shifts the transform origin to x = -L.
double phase(const Grid& g, std::size_t flat) {
    const auto idx = g.multi_index(flat);
    int s = 0;
    for (int a = 0; a < g.dim(); ++a) s += idx[a];
    return (s & 1) ? -1.0 : 1.0;
}

void check_size(const Grid& g, std::size_t n, const char* where) {
    if (n != g.size()) {
        std::ostringstream os;
        os << where << ": array of " << n << " values for a grid of " << g.size();
        throw ShapeError(os.str());
    }
}

}  // namespace

SpectralField dft_forward(const Grid& grid, const std::vector<cplx>& values) {
    check_size(grid, values.size(), "dft_forward");
    std::vector<cplx> in(values), out(grid.size());
    run_fft(grid, FFTW_FORWARD, in, out);
    const double scale = 1.0 / static_cast<double>(grid.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= scale * phase(grid, i);
    return SpectralField(grid, std::move(out));
}

SpectralField dft_forward(const Grid& grid, const std::vector<double>& values) {
    check_size(grid, values.size(), "dft_forward");
    return dft_forward(grid, std::vector<cplx>(values.begin(), values.end()));
}

std::vector<cplx> dft_inverse_complex(const SpectralField& f) {
    const Grid& g = f.grid();
    std::vector<cplx> in(f.coeffs()), out(g.size());
    for (std::size_t i = 0; i < in.size(); ++i) in[i] *= phase(g, i);
    run_fft(g, FFTW_BACKWARD, in, out);
    return out;
}

std::vector<double> dft_inverse(const SpectralField& f) {
    const auto c = dft_inverse_complex(f);
    std::vector<double> out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i].real();
    return out;
}

std::vector<double> sample(const Grid& grid, const std::function<double(const std::array<double, 3>&)>& fn) {
    std::vector<double> out(grid.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto idx = grid.multi_index(i);
        std::array<double, 3> x{0.0, 0.0, 0.0};
        for (int a = 0; a < grid.dim(); ++a) x[a] = grid.coord(idx[a]);
        out[i] = fn(x);
    }
    return out;
}

SpectralField from_symbol(const Grid& grid, const std::function<cplx(const std::array<double, 3>&)>& coeff) {
    SpectralField f(grid);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto k = grid.wavevector(i);
        std::array<double, 3> xi{0.0, 0.0, 0.0};
        for (int a = 0; a < grid.dim(); ++a) xi[a] = k[a] * grid.xi_unit();
        f[i] = coeff(xi);
    }
    return f;
}

namespace {

std::size_t mirror(const Grid& g, std::size_t flat) {
    auto idx = g.multi_index(flat);
    for (int a = 0; a < g.dim(); ++a) idx[a] = (g.n() - idx[a]) % g.n();
    return g.flat_index(idx);
}

}  // namespace

SpectralField hermitian_part(const SpectralField& f) {
    SpectralField out(f.grid());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = 0.5 * (f[i] + std::conj(f[mirror(f.grid(), i)]));
    return out;
}

double hermitian_defect(const SpectralField& f) {
    double worst = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        worst = std::max(worst, std::abs(f[i] - std::conj(f[mirror(f.grid(), i)])));
    return worst;
}

// ---------------------------------------------------------------------------
// Norms
// ---------------------------------------------------------------------------

double grid_l2_norm(const Grid& grid, const std::vector<double>& values) {
    check_size(grid, values.size(), "grid_l2_norm");
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s * grid.cell_volume());
}

double coeff_l2_norm(const SpectralField& f) {
    double s = 0.0;
    for (const auto& c : f.coeffs()) s += std::norm(c);
    return std::sqrt(s * f.grid().volume());
}

double sup_abs(const std::vector<double>& values) {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

double grid_lp_norm(const Grid& grid, const std::vector<double>& values, double p) {
    check_size(grid, values.size(), "grid_lp_norm");
    if (!(p >= 1.0)) {
        std::ostringstream os;
        os << "grid_lp_norm: p must be >= 1, got " << p;
        throw ParameterError(os.str());
    }
    if (std::isinf(p)) return sup_abs(values);
    if (p == 2.0) return grid_l2_norm(grid, values);
    // scale by the maximum to keep |v|^p in range
    const double m = sup_abs(values);
    if (m == 0.0) return 0.0;
    double s = 0.0;
    for (double v : values) s += std::pow(std::abs(v) / m, p);
    return m * std::pow(s * grid.cell_volume(), 1.0 / p);
}

// ---------------------------------------------------------------------------
// Model parameters
// ---------------------------------------------------------------------------

const char* to_string(GammaSign s) { return s == GammaSign::damped ? "damped" : "paper"; }

GammaSign parse_gamma_sign(const std::string& s) {
    if (s == "damped") return GammaSign::damped;
    if (s == "paper") return GammaSign::paper;
    throw ParameterError("gamma-sign must be 'damped' or 'paper', got '" + s + "'");
}

void ModelParams::validate(int dim) const {
    std::ostringstream os;
    if (!(alpha > 0.0 && alpha <= 1.0)) os << "alpha must satisfy 0 < alpha <= 1, got " << alpha;
    else if (!(theta > 0.0)) os << "theta must be > 0, got " << theta;
    else if (!(theta1 >= 0.0 && theta1 < dim)) os << "theta1 must satisfy 0 <= theta1 < n = " << dim << ", got " << theta1;
    else if (!(gamma >= 0.0)) os << "gamma must be >= 0, got " << gamma;
    else if (!(chi > 0.0)) os << "chi must be > 0, got " << chi;
    else if (!(kappa > 0.0)) os << "kappa must be > 0, got " << kappa;
    else if (!(D_eta > 0.0)) os << "D_eta must be > 0, got " << D_eta;
    else if (!(D_v > 0.0)) os << "D_v must be > 0, got " << D_v;
    else return;
    throw ParameterError(os.str());
}

std::string ModelParams::window_violation(int dim, double p) const {
    const double n = dim;
    const double lower = std::max(1.0, 1.0 - n / 2.0 - theta1 / 2.0 + n / p);
    const double upper = 1.0 + (n - theta1) / 3.0;
    std::ostringstream os;
    if (!(theta > lower)) {
        os << "theta > max{1, 1 - n/2 - theta1/2 + n/p} = " << lower << " violated (theta = " << theta << ")";
    } else if (!(theta < upper)) {
        os << "theta < 1 + (n - theta1)/3 = " << upper << " violated (theta = " << theta << ")";
    }
    return os.str();
}

void ModelParams::check_window(int dim, double p) const {
    const std::string v = window_violation(dim, p);
    if (!v.empty()) throw ParameterError(v);
}

// ---------------------------------------------------------------------------
// Multipliers
// ---------------------------------------------------------------------------

std::vector<double> radial_table(const Grid& grid, const std::function<double(double)>& symbol,
                                 double zero_mode) {
    std::vector<double> table(static_cast<std::size_t>(grid.max_k_norm2()) + 1,
                              std::numeric_limits<double>::quiet_NaN());
    table[0] = zero_mode;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const long k2 = grid.k_norm2(i);
        if (k2 > 0 && std::isnan(table[k2])) table[k2] = symbol(std::sqrt(static_cast<double>(k2)) * grid.xi_unit());
    }
    return table;
}

SpectralField apply_table(const SpectralField& f, const std::vector<double>& table) {
    const Grid& g = f.grid();
    if (table.size() != static_cast<std::size_t>(g.max_k_norm2()) + 1)
        throw ShapeError("apply_table: table does not match the grid");
    SpectralField out(g);
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i] * table[g.k_norm2(i)];
    return out;
}

SpectralField apply_radial(const SpectralField& f, const std::function<double(double)>& symbol,
                           double zero_mode) {
    return apply_table(f, radial_table(f.grid(), symbol, zero_mode));
}

SpectralField frac_laplacian(const SpectralField& f, double theta) {
    if (!(theta >= 0.0)) {
        std::ostringstream os;
        os << "frac_laplacian: theta must be >= 0, got " << theta;
        throw ParameterError(os.str());
    }
    if (theta == 0.0) return f;
    return apply_radial(f, [theta](double r) { return std::pow(r, theta); }, 0.0);
}

VectorField g_kernel(const SpectralField& v, double theta1) {
    const Grid& g = v.grid();
    if (!(theta1 >= 0.0 && theta1 < g.dim())) {
        std::ostringstream os;
        os << "g_kernel: theta1 must satisfy 0 <= theta1 < n = " << g.dim() << ", got " << theta1;
        throw ParameterError(os.str());
    }
    const auto weight = radial_table(g, [theta1](double r) { return std::pow(r, -theta1); }, 0.0);
    VectorField out(g.dim(), SpectralField(g));
    for (std::size_t i = 1; i < v.size(); ++i) {
        const auto k = g.wavevector(i);
        const double w = weight[g.k_norm2(i)];
        for (int a = 0; a < g.dim(); ++a) {
            if (k[a] == 0 || k[a] == -g.n() / 2) continue;
            out[a][i] = cplx(0.0, k[a] * g.xi_unit() * w) * v[i];
        }
    }
    return out;
}

VectorField gradient(const SpectralField& f) { return g_kernel(f, 0.0); }

SpectralField heat_semigroup(const SpectralField& f, double t, double theta) {
    if (!(t >= 0.0)) throw ParameterError("heat_semigroup: t must be >= 0");
    if (t == 0.0) return f;
    return apply_radial(f, [t, theta](double r) { return std::exp(-t * std::pow(r, theta)); }, 1.0);
}

double ml_symbol(const ModelParams& params, double xi_norm, bool gamma_shift, double diffusion) {
    double m = diffusion * (xi_norm == 0.0 ? 0.0 : std::pow(xi_norm, params.theta));
    if (gamma_shift) m += params.gamma_sign == GammaSign::damped ? params.gamma : -params.gamma;
    return m;
}

double ml_multiplier(const ModelParams& params, MLFamily family, double t, double xi_norm,
                     bool gamma_shift, double diffusion) {
    const double beta = family == MLFamily::E_alpha ? 1.0 : params.alpha;
    const double arg = std::pow(t, params.alpha) * ml_symbol(params, xi_norm, gamma_shift, diffusion);
    if (arg >= 0.0) return ml_eval({params.alpha, beta}, arg).value;
    return ml_eval_signed({params.alpha, beta}, -arg);
}

std::vector<double> ml_table(const Grid& grid, const ModelParams& params, MLFamily family, double t,
                             bool gamma_shift, double diffusion) {
    if (!(t >= 0.0)) throw ParameterError("ml_operator: t must be >= 0");
    auto sym = [&](double r) { return ml_multiplier(params, family, t, r, gamma_shift, diffusion); };
    return radial_table(grid, sym, sym(0.0));
}

SpectralField ml_operator(const SpectralField& f, double t, const ModelParams& params,
                          MLFamily family, bool gamma_shift, double diffusion) {
    params.validate(f.grid().dim());
    return apply_table(f, ml_table(f.grid(), params, family, t, gamma_shift, diffusion));
}

SpectralField divergence(const VectorField& fields) {
    if (fields.empty()) throw ShapeError("divergence: empty vector field");
    const Grid& g = fields[0].grid();
    if (static_cast<int>(fields.size()) != g.dim()) {
        std::ostringstream os;
        os << "divergence: " << fields.size() << " components for a " << g.dim() << "-d grid";
        throw ShapeError(os.str());
    }
    for (const auto& f : fields) require_same_grid(g, f.grid(), "divergence");
    SpectralField out(g);
    for (std::size_t i = 1; i < out.size(); ++i) {
        const auto k = g.wavevector(i);
        cplx s = 0.0;
        for (int a = 0; a < g.dim(); ++a) {
            if (k[a] == -g.n() / 2) continue;
            s += cplx(0.0, k[a] * g.xi_unit()) * fields[a][i];
        }
        out[i] = s;
    }
    return out;
}

namespace {

bool retained(const Grid& g, std::size_t flat) {
    const auto k = g.wavevector(flat);
    for (int a = 0; a < g.dim(); ++a)
        if (3 * std::abs(k[a]) > g.n()) return false;
    return true;
}

}  // namespace

SpectralField dealias(const SpectralField& f) {
    SpectralField out(f);
    for (std::size_t i = 0; i < out.size(); ++i)
        if (!retained(f.grid(), i)) out[i] = 0.0;
    return out;
}

bool is_dealiased(const SpectralField& f) {
    for (std::size_t i = 0; i < f.size(); ++i)
        if (!retained(f.grid(), i) && f[i] != cplx(0.0)) return false;
    return true;
}

SpectralField pointwise_product(const SpectralField& f, const SpectralField& g, bool dealias_on) {
    require_same_grid(f.grid(), g.grid(), "pointwise_product");
    auto a = dft_inverse_complex(dealias_on ? dealias(f) : f);
    const auto b = dft_inverse_complex(dealias_on ? dealias(g) : g);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i];
    SpectralField out = dft_forward(f.grid(), a);
    return dealias_on ? dealias(out) : out;
}

// ---------------------------------------------------------------------------
// Resampling
// ---------------------------------------------------------------------------

namespace {

// Row j: basis functions of the source grid's axis evaluated at points[j];
// rows for points outside [-L, L) are zero.
std::vector<cplx> basis_matrix(const Grid& src, const std::vector<double>& points) {
    const int n = src.n();
    const double L = src.half_width();
    std::vector<cplx> m(points.size() * n, cplx(0.0));
    for (std::size_t j = 0; j < points.size(); ++j) {
        const double x = points[j];
        if (!(x >= -L && x < L)) continue;
        for (int i = 0; i < n; ++i) {
            const int k = src.wavenumber(i);
            const double arg = k * src.xi_unit() * x;
            m[j * n + i] = k == -n / 2 ? cplx(std::cos(arg), 0.0) : std::polar(1.0, arg);
        }
    }
    return m;
}

// Contracts axis a of a dim-d tensor of extent n_in with a (m_out x n_in) matrix.
std::vector<cplx> contract_axis(const std::vector<cplx>& data, int dim, int axis, int n_in, int m_out,
                                const std::vector<cplx>& mat, const std::array<int, 3>& extents) {
    std::array<int, 3> ext_out = extents;
    ext_out[axis] = m_out;
    std::size_t total_out = 1;
    for (int a = 0; a < dim; ++a) total_out *= ext_out[a];
    std::vector<cplx> out(total_out, cplx(0.0));
    std::size_t stride_in = 1, stride_out = 1;
    for (int a = dim - 1; a > axis; --a) {
        stride_in *= extents[a];
        stride_out *= ext_out[a];
    }
    std::size_t outer = 1;
    for (int a = 0; a < axis; ++a) outer *= extents[a];
    const std::size_t inner = stride_in;
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t in = 0; in < inner; ++in) {
            const std::size_t base_in = o * n_in * stride_in + in;
            const std::size_t base_out = o * m_out * stride_out + in;
            for (int j = 0; j < m_out; ++j) {
                cplx s = 0.0;
                const cplx* row = &mat[static_cast<std::size_t>(j) * n_in];
                for (int i = 0; i < n_in; ++i) s += row[i] * data[base_in + i * stride_in];
                out[base_out + j * stride_out] = s;
            }
        }
    }
    return out;
}

std::vector<cplx> values_at_tensor_points(const SpectralField& f, const std::vector<double>& points) {
    const Grid& g = f.grid();
    const auto mat = basis_matrix(g, points);
    std::vector<cplx> data = f.coeffs();
    std::array<int, 3> ext{1, 1, 1};
    for (int a = 0; a < g.dim(); ++a) ext[a] = g.n();
    for (int a = 0; a < g.dim(); ++a) {
        data = contract_axis(data, g.dim(), a, g.n(), static_cast<int>(points.size()), mat, ext);
        ext[a] = static_cast<int>(points.size());
    }
    return data;
}

}  // namespace

std::vector<double> interpolate_1d(const SpectralField& f, const std::vector<double>& points) {
    if (f.grid().dim() != 1) throw ShapeError("interpolate_1d: field is not 1-d");
    const auto v = values_at_tensor_points(f, points);
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i].real();
    return out;
}

SpectralField resample(const SpectralField& f, const Grid& target) {
    if (target.dim() != f.grid().dim()) throw ShapeError("resample: dimension mismatch");
    std::vector<double> pts(target.n());
    for (int j = 0; j < target.n(); ++j) pts[j] = target.coord(j);
    return dft_forward(target, values_at_tensor_points(f, pts));
}

SpectralField dilate(const SpectralField& f, double sigma) {
    if (!(sigma > 0.0)) throw ParameterError("dilate: sigma must be > 0");
    const Grid& g = f.grid();
    std::vector<double> pts(g.n());
    for (int j = 0; j < g.n(); ++j) pts[j] = sigma * g.coord(j);
    return dft_forward(g, values_at_tensor_points(f, pts));
}

// ---------------------------------------------------------------------------
// Snapshots
// ---------------------------------------------------------------------------

void write_fkf(const std::string& path, const SpectralField& f, const std::string& name, double time) {
    static_assert(std::endian::native == std::endian::little, ".fkf writer assumes a little-endian host");
    const Grid& g = f.grid();
    nlohmann::json h;
    h["format"] = "fkf";
    h["version"] = 1;
    h["dim"] = g.dim();
    h["n"] = g.n();
    h["half_width"] = g.half_width();
    h["field"] = name;
    h["time"] = time;
    h["count"] = f.size();
    h["layout"] = "complex128 little-endian, row-major, FFT wavenumber order";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_fkf: cannot open " + path);
    out << h.dump() << '\n';
    out.write(reinterpret_cast<const char*>(f.coeffs().data()),
              static_cast<std::streamsize>(f.size() * sizeof(cplx)));
    if (!out) throw std::runtime_error("write_fkf: write failed for " + path);
}

Snapshot read_fkf(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_fkf: cannot open " + path);
    std::string header;
    std::getline(in, header);
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(header);
    } catch (const std::exception& e) {
        throw ShapeError("read_fkf: bad header in " + path + ": " + e.what());
    }
    if (h.value("format", "") != "fkf") throw ShapeError("read_fkf: not an .fkf file: " + path);
    const Grid g(h.at("dim").get<int>(), h.at("n").get<int>(), h.at("half_width").get<double>());
    const auto count = h.at("count").get<std::size_t>();
    if (count != g.size()) throw ShapeError("read_fkf: count does not match grid in " + path);
    std::vector<cplx> c(count);
    in.read(reinterpret_cast<char*>(c.data()), static_cast<std::streamsize>(count * sizeof(cplx)));
    if (!in) throw ShapeError("read_fkf: truncated payload in " + path);
    return {SpectralField(g, std::move(c)), h.value("field", ""), h.value("time", 0.0)};
}

}  // namespace fracks
