#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace fracks {

// ---------------------------------------------------------------------------
// Gamma helpers
// ---------------------------------------------------------------------------

/// Gamma function for real x. Throws PoleError at nonpositive integers.
double gamma_fn(double x);

/// Reciprocal gamma 1/Gamma(x); entire, so poles map to exactly 0.
double rgamma(double x);

/// sin(pi x) with exact argument reduction (exact zeros at integers).
double sinpi(double x);

// ---------------------------------------------------------------------------
// Mittag-Leffler function on the negative real axis
// ---------------------------------------------------------------------------

struct MLParams {
    double alpha = 1.0;  ///< 0 < alpha <= 1
    double beta = 1.0;   ///< beta > 0

    /// Throws ParameterError when the pair is outside the supported domain.
    void validate() const;
};

enum class MLBranch { series, asymptotic, contour };

const char* to_string(MLBranch b);

struct EvalReport {
    double value = 0.0;
    double est_abs_error = 0.0;
    MLBranch branch = MLBranch::series;
};

/// Evaluates E_{alpha,beta}(-x) for x >= 0.
///
/// Three branches are tried in order: the power series (only while the
/// largest term stays small enough that cancellation is harmless), the
/// large-argument asymptotic expansion (when its first omitted term is
/// negligible), and otherwise the Hankel contour collapsed onto the branch
/// cut, which gives a real integral with a positive, non-oscillating
/// integrand that is evaluated by adaptive quadrature. Values of beta at or
/// above 1 + alpha reach the contour through the three-term recurrence
/// E_{a,b}(z) = 1/Gamma(b) + z E_{a,a+b}(z).
///
/// The reported error bounds |value - E(-x)| and stays below 1e-10 over
/// [0, 1e6]; see data/ml_oracle.tsv for the validation table.
EvalReport ml_eval(const MLParams& params, double x);

/// Evaluates E_{alpha,beta}(-x) with one specific branch. Throws RangeError
/// when that branch cannot reach its accuracy target at this x.
EvalReport ml_eval_branch(const MLParams& params, double x, MLBranch branch);

/// Shorthand for ml_eval(params, x).value.
double ml_value(double alpha, double beta, double x);

/// Truncated power series sum_{k<terms} z^k / Gamma(alpha k + beta).
/// Throws RangeError when |z| exceeds radius.
double ml_eval_series(const MLParams& params, double z, int terms, double radius = 5.0);

/// E_{alpha,beta}(z) for real z of either sign. Negative z is ml_eval;
/// positive z uses the (positive-term) series or the exponential asymptote.
double ml_eval_signed(const MLParams& params, double z);

// ---------------------------------------------------------------------------
// Mainardi function
// ---------------------------------------------------------------------------

/// Largest z for which mainardi_eval is supported for this alpha: beyond it the
/// series terms exceed the extended-precision cancellation guard.
double mainardi_range(double alpha);

/// M_alpha(z) = sum_n z^n / (n! Gamma(1 - alpha(1+n))), 0 < alpha < 1, z >= 0.
/// Summed in 50-digit arithmetic against a per-alpha coefficient table.
/// Throws RangeError for z > mainardi_range(alpha).
double mainardi_eval(double alpha, double z);

struct QuadSpec {
    double abs_tol = 1e-13;
    double rel_tol = 1e-12;
    /// Weight*M_alpha must fall below this at the truncation point.
    double tail_tol = 1e-14;
};

/// Integral of weight(t) M_alpha(t) over [0, infinity), truncated at
/// mainardi_range(alpha). The weight may be singular at 0 but must be
/// integrable. Throws QuadratureError if the truncated tail is not negligible.
double mainardi_integral(double alpha, const std::function<double(double)>& weight,
                         const QuadSpec& quad = {});

/// Fixed Gauss-Legendre rule for int_0^inf w(t) M_alpha(t) dt: 20 points on
/// geometric panels [2^{-j-1}, 2^{-j}] toward 0 and panels of width
/// min(1, (1 - alpha)/2) from 1/2 up to mainardi_range(alpha). M_alpha is
/// evaluated once at construction, so many weights (e.g. e^{-lambda t} for a
/// range of lambda) are cheap. tail() = M_alpha(z_max) z_max, with M_alpha from
/// its large-z asymptotics, bounds the mass left out.
class MainardiRule {
public:
    explicit MainardiRule(double alpha);
    double alpha() const noexcept { return alpha_; }
    double tail() const noexcept { return tail_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    double integrate(const std::function<double(double)>& weight) const;

private:
    double alpha_;
    double tail_ = 0.0;
    std::vector<double> nodes_;
    std::vector<double> weights_;  // Gauss weight times M_alpha(node)
};

/// Integral of t^r M_alpha(t) over [0, infinity), r > -1.
double mainardi_moment(double alpha, double r, const QuadSpec& quad = {});

}  // namespace fracks
