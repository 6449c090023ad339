#include "fracks/specfun.hpp"

#include "fracks/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/sin_pi.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <vector>

namespace fracks {

namespace {

using mp50 = boost::multiprecision::cpp_bin_float_50;

// Largest series term tolerated, relative to the ~1e-50 working precision.
constexpr double kMaxTermLog10 = 30.0;
// Terms below this (absolute) are dropped.
constexpr double kDropLog10 = -40.0;
constexpr int kMaxTerms = 3000;

struct Table {
    double alpha = 0.0;
    double z_max = 0.0;
    std::vector<mp50> coeff;       // 1 / (n! Gamma(1 - alpha(1+n)))
    std::vector<double> log10_abs; // log10 |coeff|, -inf for zero coefficients
};

double log10_max_term(const Table& t, double z) {
    const double lz = std::log10(z);
    double best = -INFINITY;
    for (std::size_t n = 0; n < t.log10_abs.size(); ++n)
        best = std::max(best, t.log10_abs[n] + n * lz);
    return best;
}

std::shared_ptr<const Table> build_table(double alpha) {
    auto t = std::make_shared<Table>();
    t->alpha = alpha;
    // Coefficients for the double alpha as given; near-pole terms are tiny
    // but not negligible against the largest terms of the sum.
    const mp50 a(alpha);
    const mp50 pi = boost::math::constants::pi<mp50>();
    mp50 fact = 1;
    t->coeff.reserve(kMaxTerms);
    t->log10_abs.reserve(kMaxTerms);
    for (int n = 0; n < kMaxTerms; ++n) {
        if (n > 0) fact *= mp50(n);
        const mp50 y = 1 - a * mp50(n + 1);
        mp50 rg;
        if (y > 0) rg = 1 / boost::math::tgamma(y);
        else if (y == floor(y)) rg = 0;
        else rg = boost::math::tgamma(1 - y) * boost::math::sin_pi(y) / pi;
        const mp50 c = rg / fact;
        t->coeff.push_back(c);
        t->log10_abs.push_back(c == 0 ? -INFINITY : static_cast<double>(log10(abs(c))));
    }

    double lo = 0.0, hi = 1.0;
    while (log10_max_term(*t, hi) < kMaxTermLog10 && hi < 1e4) hi *= 2.0;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (log10_max_term(*t, mid) < kMaxTermLog10 ? lo : hi) = mid;
    }
    t->z_max = lo;

    // Keep only the terms that matter on [0, z_max].
    const double lz = std::log10(std::max(t->z_max, 1.0));
    std::size_t used = t->log10_abs.size();
    while (used > 1 && t->log10_abs[used - 1] + (used - 1) * lz < kDropLog10) --used;
    t->log10_abs.resize(used);
    t->coeff.resize(used);
    return t;
}

std::shared_ptr<const Table> table_for(double alpha) {
    static std::mutex mu;
    static std::map<double, std::shared_ptr<const Table>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(alpha);
    if (it != cache.end()) return it->second;
    auto t = build_table(alpha);
    cache.emplace(alpha, t);
    return t;
}

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        std::ostringstream os;
        os << "Mainardi function: alpha must satisfy 0 < alpha < 1, got " << alpha;
        throw ParameterError(os.str());
    }
}

}  // namespace

double mainardi_range(double alpha) {
    check_alpha(alpha);
    return table_for(alpha)->z_max;
}

double mainardi_eval(double alpha, double z) {
    check_alpha(alpha);
    if (std::isnan(z) || z < 0.0) {
        std::ostringstream os;
        os << "mainardi_eval: z must be >= 0, got " << z;
        throw ParameterError(os.str());
    }
    const auto t = table_for(alpha);
    if (z > t->z_max) {
        std::ostringstream os;
        os << "mainardi_eval: z = " << z << " exceeds the supported range " << t->z_max
           << " for alpha = " << alpha;
        throw RangeError(os.str());
    }
    if (z == 0.0) return static_cast<double>(t->coeff[0]);
    const double lz = std::log10(z);
    const mp50 zz(z);
    mp50 sum = 0, zn = 1;
    bool past_peak = false;
    double prev = -INFINITY;
    for (std::size_t n = 0; n < t->coeff.size(); ++n) {
        sum += t->coeff[n] * zn;
        zn *= -zz;
        const double lt = t->log10_abs[n] + n * lz;
        if (std::isfinite(lt)) {
            if (lt < prev) past_peak = true;
            if (past_peak && lt < kDropLog10 - 5.0) break;
            prev = lt;
        }
    }
    return static_cast<double>(sum);
}

namespace {

// Leading large-z asymptotics of M_alpha. At z_max the series value is rounding
// noise, while this stays accurate (relative error < 1e-2 once M < 1e-5).
double mainardi_envelope(double alpha, double z) {
    const double x = alpha * z;
    return std::pow(x, (alpha - 0.5) / (1.0 - alpha)) / std::sqrt(2.0 * std::numbers::pi * (1.0 - alpha)) *
           std::exp(-(1.0 - alpha) / alpha * std::pow(x, 1.0 / (1.0 - alpha)));
}

}  // namespace

double mainardi_integral(double alpha, const std::function<double(double)>& weight,
                         const QuadSpec& quad) {
    check_alpha(alpha);
    const double z_max = mainardi_range(alpha);
    const double tail = std::abs(weight(z_max)) * mainardi_envelope(alpha, z_max) * z_max;
    if (!(tail <= quad.tail_tol)) {
        std::ostringstream os;
        os << "mainardi_integral: integrand " << tail << " at truncation z = " << z_max
           << " exceeds tail tolerance " << quad.tail_tol << " (weight grows too fast)";
        throw QuadratureError(os.str());
    }
    thread_local boost::math::quadrature::tanh_sinh<double> ts;
    auto f = [&](double t) { return weight(t) * mainardi_eval(alpha, t); };

    std::vector<double> cuts{0.0, 0.5};
    for (double c = 1.0; c < z_max; c *= 2.0) cuts.push_back(c);
    cuts.push_back(z_max);

    double total = 0.0, total_err = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] <= cuts[i]) continue;
        double err = 0.0, l1 = 0.0;
        total += ts.integrate(f, cuts[i], cuts[i + 1], quad.rel_tol * 1e-2, &err, &l1);
        total_err += err;
    }
    if (!(total_err <= std::max(quad.abs_tol, quad.rel_tol * std::abs(total)))) {
        std::ostringstream os;
        os << "mainardi_integral: estimated error " << total_err << " above tolerance";
        throw QuadratureError(os.str());
    }
    return total;
}

MainardiRule::MainardiRule(double alpha) : alpha_(alpha) {
    check_alpha(alpha);
    using GL = boost::math::quadrature::gauss<double, 20>;
    const double z_max = mainardi_range(alpha);
    tail_ = mainardi_envelope(alpha, z_max) * z_max;
    // geometric panels toward 0; above 1/2 the width shrinks with 1 - alpha,
    // where M_alpha narrows toward a spike at 1
    std::vector<double> cuts{0.0};
    for (int j = 60; j >= 1; --j) cuts.push_back(std::ldexp(1.0, -j));
    const double h = std::min(1.0, 0.5 * (1.0 - alpha));
    for (double c = 0.5 + h; c < z_max; c += h) cuts.push_back(c);
    cuts.push_back(z_max);
    const auto& x = GL::abscissa();
    const auto& w = GL::weights();
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i], b = cuts[i + 1];
        if (b <= a) continue;
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        for (std::size_t k = 0; k < x.size(); ++k) {
            for (double sgn : {-1.0, 1.0}) {
                if (k == 0 && x[0] == 0.0 && sgn < 0) continue;
                const double t = c + sgn * h * x[k];
                nodes_.push_back(t);
                weights_.push_back(h * w[k] * mainardi_eval(alpha, t));
            }
        }
    }
}

double MainardiRule::integrate(const std::function<double(double)>& weight) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) s += weights_[i] * weight(nodes_[i]);
    return s;
}

double mainardi_moment(double alpha, double r, const QuadSpec& quad) {
    if (!(r > -1.0)) {
        std::ostringstream os;
        os << "mainardi_moment: r must be > -1, got " << r;
        throw ParameterError(os.str());
    }
    return mainardi_integral(alpha, [r](double t) { return std::pow(t, r); }, quad);
}

}  // namespace fracks
