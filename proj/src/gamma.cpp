#include "fracks/specfun.hpp"

#include "fracks/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace fracks {

namespace {

bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

}  // namespace

double sinpi(double x) {
    if (!std::isfinite(x)) return std::numeric_limits<double>::quiet_NaN();
    // fmod by 2 is exact, so integers land on exact zeros.
    double r = std::fmod(x, 2.0);
    if (r > 1.0) r -= 2.0;
    if (r < -1.0) r += 2.0;
    if (r == 0.0 || r == 1.0 || r == -1.0) return 0.0;
    if (r > 0.5) r = 1.0 - r;
    if (r < -0.5) r = -1.0 - r;
    return std::sin(std::numbers::pi * r);
}

double gamma_fn(double x) {
    if (std::isnan(x)) throw ParameterError("gamma_fn: NaN argument");
    if (is_nonpositive_integer(x)) {
        std::ostringstream os;
        os << "gamma_fn: pole at nonpositive integer " << x;
        throw PoleError(os.str());
    }
    return std::tgamma(x);
}

double rgamma(double x) {
    if (std::isnan(x)) return x;
    if (is_nonpositive_integer(x)) return 0.0;
    if (x > 171.0) return std::exp(-std::lgamma(x));
    if (x < -170.0) {
        // 1/Gamma(x) = Gamma(1-x) sin(pi x) / pi, computed in log space.
        const double s = sinpi(x);
        return std::copysign(std::exp(std::lgamma(1.0 - x) + std::log(std::abs(s)) -
                                      std::log(std::numbers::pi)),
                             s);
    }
    return 1.0 / std::tgamma(x);
}

}  // namespace fracks
