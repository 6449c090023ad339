#pragma once

#include "fracks/besov.hpp"
#include "fracks/duhamel.hpp"
#include "fracks/spectral.hpp"

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace fracks {

enum class Verdict { pass, fail, inconclusive };
const char* to_string(Verdict v);

/// One row of a check report.
struct RatioReport {
    std::string check_id;
    std::string params_json;  ///< compact JSON of the inputs
    double measured = 0.0;    ///< fitted slope or maximal ratio
    double predicted = 0.0;
    double rel_dev = 0.0;     ///< |measured - predicted| / |predicted|, or |measured| when predicted = 0
    std::size_t ensemble = 1;
    std::uint64_t seed = 0;
    std::string grid;         ///< e.g. "1d-N1024-L201.06"
    Verdict verdict = Verdict::inconclusive;
};

/// CSV schema: check_id,params_json,measured,predicted,rel_dev,ensemble,seed,grid,verdict
void write_csv_header(std::ostream& os);
void write_csv_row(std::ostream& os, const RatioReport& r);

/// Grid tag used in reports.
std::string grid_tag(const Grid& grid);

enum class DecayFamily {
    heat,           ///< e^{-t (-Delta)^{theta/2}}
    E_alpha,        ///< E_alpha(-t^alpha (-Delta)^{theta/2})
    E_alpha_alpha,  ///< E_{alpha,alpha}(-t^alpha (-Delta)^{theta/2})
};
const char* to_string(DecayFamily f);

struct DecaySpec {
    double zeta = 0.0;
    double theta = 1.5;
    double alpha = 1.0;
    double s1 = 0.0;
    double s2 = 0.0;
    double p1 = 2.0;
    double p2 = 2.0;
    /// gamma shift of the symbol, applied with gamma_sign (0 for the plain families)
    double gamma = 0.0;
    GammaSign gamma_sign = GammaSign::damped;
    std::vector<double> times;  ///< increasing, positive; log_times() when empty
    double tolerance = 0.05;

    static std::vector<double> log_times(double t_min, double t_max, int per_decade);

    /// (s2 - s1 + zeta + n/p1 - n/p2) / theta
    double exponent(int dim) const;
    /// -alpha * exponent (alpha = 1 for the heat family)
    double predicted_slope(int dim, DecayFamily family) const;
    /// zeta >= 0, theta > 0, s1 <= s2, 1 <= p1 <= p2, and exponent < 1
    /// (E_alpha) or < 2 (E_{alpha,alpha}). Throws ParameterError naming the bound.
    void validate(int dim, DecayFamily family) const;
};

struct DecayFit {
    RatioReport report;
    std::vector<double> t;
    std::vector<double> norm;     ///< ||(-Delta)^{zeta/2} S(t) f||_{B^{s2}_{p2,inf}}
    std::vector<int> top_shell;   ///< shell attaining the sup
    double norm_at_zero = 0.0;
    double window_lo = 0.0;       ///< fitted time window
    double window_hi = 0.0;
    double intercept = 0.0;       ///< log-log fit: log norm = intercept + slope log t
    double decades() const;
};

/// The curve t -> ||(-Delta)^{zeta/2} S(t) f||_{B^{s2}_{p2,inf}} with the
/// maximizing shell per time.
DecayFit decay_curve(const SpectralField& f, const DecaySpec& spec, DecayFamily family);

/// Fits the log-log slope over the scaling window: the longest run of times
/// where the norm is below 95% of its t = 0 value (skipped when the predicted
/// slope is 0), above 1e3 machine epsilon relative to it, and attained in a
/// shell with two resolved shells on either side. Throws RangeError when the
/// window spans less than one decade; 1 to 1.5 decades is INCONCLUSIVE.
DecayFit decay_fit_heat(const SpectralField& f, const DecaySpec& spec);
DecayFit decay_fit_ml(const SpectralField& f, const DecaySpec& spec, DecayFamily family);

/// Log-log plot with the data and the fitted line over the window.
void write_decay_svg(std::ostream& os, const DecayFit& fit);

/// Power-law data whose LP profile 2^{js} ||Delta_j f||_{L^p} is flat, for
/// decay fits: f^(xi) ~ |xi|^{-(n + s - n/p)} between xi_unit and the
/// resolved band, with smooth cutoffs.
SpectralField decay_data(const Grid& grid, double s, double p);

/// Seeded random fields |xi|^{-(s + n/2 + extra_decay)} times complex
/// Gaussians on 1 <= |k|_inf <= kmax. Each coefficient is drawn from its own
/// seed (seed, member, tag, k), so a refined grid holds the same modes plus new
/// ones.
struct EnsembleSpec {
    std::size_t members = 50;
    std::uint64_t seed = 1;
    int kmax = 0;              ///< 0: n/3
    double extra_decay = 0.5;
    double amplitude = 1.0;

    int band(const Grid& grid) const;
};
SpectralField ensemble_member(const Grid& grid, const EnsembleSpec& spec, double s, std::size_t member,
                              unsigned tag);

/// Maximal ratio per final time, and its spread. The report carries the
/// overall maximum as `measured`, NaN as `predicted` (the constants are
/// existential) and the spread over T as `rel_dev`.
struct ConstantStudy {
    std::vector<double> T_values;
    std::vector<double> constant;  ///< max over members, per T
    double max = 0.0;
    double variation = 0.0;        ///< (max - min) / max over T
    std::size_t members = 0;
    std::size_t skipped = 0;       ///< degenerate members
    RatioReport report;
};

/// K(T) = max over members of sup_t ||B(eta, v)||_X / (sup_t ||eta||_X sup_t ||v||_Y)
/// with eta, v the linear evolutions of the member data on a graded mesh with
/// `steps` steps on (0, T].
ConstantStudy bilinear_constant_study(const std::vector<SpectralField>& eta0, const std::vector<SpectralField>& v0,
                                      const ModelParams& params, const std::vector<double>& T_values,
                                      std::size_t steps, double p = 2.0, double q = 2.0);

/// C(T) = max over members of sup_t ||T(eta)||_Y / sup_t ||eta||_X.
ConstantStudy linear_operator_study(const std::vector<SpectralField>& eta0, const ModelParams& params,
                                    const std::vector<double>& T_values, std::size_t steps, double p = 2.0,
                                    double q = 2.0);

/// Max product-estimate ratio over an ensemble of (f, g) pairs.
struct ProductStudy {
    double max_ratio = 0.0;
    std::size_t members = 0;
    std::size_t skipped = 0;
};
ProductStudy product_study(const std::vector<SpectralField>& f, const std::vector<SpectralField>& g,
                           const ProductParams& params);

struct OperatorBParams {
    double p = 2.0;
    double s = 0.0;
    double s0 = 0.0;
    double theta = 1.2;
    double alpha = 0.8;

    /// -s + theta - 1 = -s0, p >= 1, 0 < alpha <= 1.
    void check() const;
};

struct OperatorBResult {
    double value_norm = 0.0;  ///< ||B(f)||_{B^s_{p,inf}}
    double input_norm = 0.0;  ///< sup_t ||f(t)||_{B^{s0}_{p,inf}}
    double ratio = 0.0;
};

/// B(f) = int_0^inf tau^{alpha-1} div E_{alpha,alpha}(-tau^alpha (-Delta)^{theta/2}) f(tau) dtau
/// for a vector field f given at the nodes of a uniform mesh, held constant at
/// f(t_final) beyond it (the tail is integrated in closed form).
OperatorBResult operator_B_study(const std::vector<VectorField>& f, const TimeMesh& mesh,
                                 const OperatorBParams& params, const DyadicCutoff& cutoff);

/// Yamazaki ratios for increasing final times.
struct YamazakiStudy {
    std::vector<double> t_final;
    std::vector<double> ratio;
    std::vector<double> tail_exponent;
    bool converging = false;  ///< successive changes shrink and every tail exponent is < -1
    double last_change = 0.0;
};
YamazakiStudy yamazaki_study(const SpectralField& f, const YamazakiParams& params, const DyadicCutoff& cutoff,
                             const std::vector<double>& t_finals, int points_per_decade = 16);

}  // namespace fracks
