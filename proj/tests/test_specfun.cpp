#include <doctest.h>

#include "fracks/errors.hpp"
#include "fracks/specfun.hpp"
#include "fracks/oracle_table.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <numbers>

using namespace fracks;
using mp50 = boost::multiprecision::cpp_bin_float_50;
using mp100 = boost::multiprecision::cpp_bin_float_100;

TEST_CASE("gamma_fn basic values and poles") {
    CHECK(gamma_fn(1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(gamma_fn(0.5) == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-14));
    CHECK(gamma_fn(5.0) == doctest::Approx(24.0).epsilon(1e-14));
    CHECK_THROWS_AS(gamma_fn(0.0), PoleError);
    CHECK_THROWS_AS(gamma_fn(-3.0), PoleError);
    CHECK(rgamma(-2.0) == 0.0);
    CHECK(rgamma(0.0) == 0.0);
}

TEST_CASE("gamma_fn against 50-digit reference") {
    double worst = 0.0;
    for (double x = -169.75; x <= 170.0; x += 0.8125) {
        if (x == std::floor(x) && x <= 0) continue;
        const double ref = static_cast<double>(boost::math::tgamma(mp50(x)));
        if (!std::isfinite(ref) || ref == 0.0) continue;
        worst = std::max(worst, std::abs(gamma_fn(x) / ref - 1.0));
    }
    CHECK(worst <= 1e-13);
}

TEST_CASE("sinpi is exact at integers") {
    CHECK(sinpi(3.0) == 0.0);
    CHECK(sinpi(-7.0) == 0.0);
    CHECK(sinpi(0.5) == doctest::Approx(1.0));
    CHECK(sinpi(-1.5) == doctest::Approx(1.0));
}

TEST_CASE("ml_eval simple values") {
    CHECK(ml_eval({0.7, 1.0}, 0.0).value == 1.0);
    CHECK(ml_eval({1.0, 1.0}, 1.0).value == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK_THROWS_AS(ml_eval({1.2, 1.0}, 1.0), ParameterError);
    CHECK_THROWS_AS(ml_eval({0.5, 0.0}, 1.0), ParameterError);
    CHECK_THROWS_AS(ml_eval({0.5, 1.0}, -1.0), ParameterError);
}

TEST_CASE("E_{1/2}(-x) equals exp(x^2) erfc(x)") {
    for (double x : {0.01, 0.3, 1.0, 2.5, 7.0, 30.0, 400.0, 1e4}) {
        const mp50 xm(x);
        const double ref = static_cast<double>(exp(xm * xm) * boost::math::erfc(xm));
        const EvalReport r = ml_eval({0.5, 1.0}, x);
        CHECK_MESSAGE(std::abs(r.value - ref) <= 1e-13, "x=" << x << " branch=" << std::string(to_string(r.branch)));
        CHECK(std::abs(r.value - ref) <= r.est_abs_error + 1e-16);
    }
}

TEST_CASE("ml_eval against the frozen oracle table") {
    const auto rows = load_ml_oracle();
    REQUIRE(rows.size() >= 200);
    double worst = 0.0;
    int bound_violations = 0;
    for (const auto& row : rows) {
        const EvalReport r = ml_eval({row.alpha, row.beta}, row.x);
        const double err = std::abs(r.value - row.value);
        worst = std::max(worst, err);
        if (err > r.est_abs_error + 1e-16) {
            ++bound_violations;
            MESSAGE("bound miss alpha=" << row.alpha << " beta=" << row.beta << " x=" << row.x << " err " << err << " est " << r.est_abs_error << " via " << std::string(to_string(r.branch)));
        }
        CHECK_MESSAGE(err <= 1e-10, "alpha=" << row.alpha << " beta=" << row.beta << " x=" << row.x
                                            << " got " << r.value << " want " << row.value_text
                                            << " via " << std::string(to_string(r.branch)));
        CHECK_MESSAGE(r.est_abs_error <= 1e-10, "alpha=" << row.alpha << " beta=" << row.beta << " x=" << row.x << " err " << err << " via " << std::string(to_string(r.branch)));
    }
    MESSAGE("worst abs error " << worst << ", error-bound misses " << bound_violations);
    CHECK(bound_violations == 0);
}

TEST_CASE("contour branch agrees with the asymptotic expansion where both apply") {
    for (double a : {0.3, 0.6, 0.9}) {
        for (double b : {1.0, a}) {
            for (double x : {60.0, 300.0, 5e3, 1e5}) {
                const double c = ml_eval_branch({a, b}, x, MLBranch::contour).value;
                const double s = ml_eval_branch({a, b}, x, MLBranch::asymptotic).value;
                CHECK_MESSAGE(std::abs(c - s) <= 1e-13 * std::max(1.0, std::abs(s)),
                              "alpha=" << a << " beta=" << b << " x=" << x);
            }
        }
    }
}

TEST_CASE("ml_eval is decreasing and in (0,1] on the negative axis") {
    for (double a : {0.3, 0.5, 0.7, 0.9}) {
        double prev = 1.0 + 1e-300;
        for (int e = -12; e <= 24; ++e) {
            const double x = std::pow(10.0, e / 4.0);
            const double v = ml_value(a, 1.0, x);
            CHECK(v > 0.0);
            CHECK(v <= 1.0);
            CHECK(v < prev);
            prev = v;
        }
    }
}

TEST_CASE("alpha close to one approaches the exponential") {
    double worst = 0.0;
    for (double x = 0.0; x <= 10.0; x += 0.05) worst = std::max(worst, std::abs(ml_value(0.999, 1.0, x) - std::exp(-x)));
    CHECK(worst <= 1e-2);
    CHECK(worst > 0.0);
}

TEST_CASE("ml_eval_series") {
    CHECK(ml_eval_series({0.5, 0.5}, 0.0, 10) == doctest::Approx(1.0 / std::sqrt(std::numbers::pi)).epsilon(1e-15));
    CHECK(std::abs(ml_eval_series({0.9, 1.0}, -0.1, 30) - ml_value(0.9, 1.0, 0.1)) <= 1e-14);
    CHECK(std::abs(ml_eval_series({1.0, 1.0}, -2.0, 60) - std::exp(-2.0)) <= 1e-12);
    CHECK_THROWS_AS(ml_eval_series({0.5, 1.0}, -6.0, 30), RangeError);

    // extended-precision summation of the same truncated series
    mp100 sum = 0, zk = 1;
    for (int k = 0; k < 30; ++k) {
        sum += zk / boost::math::tgamma(mp100(0.9) * k + 1);
        zk *= mp100(-0.1);
    }
    CHECK(std::abs(ml_eval_series({0.9, 1.0}, -0.1, 30) - static_cast<double>(sum)) <= 1e-15);
}

TEST_CASE("ml_eval_signed on the positive axis") {
    CHECK(ml_eval_signed({1.0, 1.0}, 3.0) == doctest::Approx(std::exp(3.0)).epsilon(1e-13));
    const mp50 z(2.0);
    CHECK(ml_eval_signed({0.5, 1.0}, 2.0) ==
          doctest::Approx(static_cast<double>(exp(z * z) * boost::math::erfc(-z))).epsilon(1e-13));
    CHECK(ml_eval_signed({0.5, 1.0}, 10.0) ==
          doctest::Approx(static_cast<double>(exp(mp50(100)) * boost::math::erfc(-mp50(10)))).epsilon(1e-12));
    CHECK(ml_eval_signed({0.6, 1.0}, -2.0) == ml_value(0.6, 1.0, 2.0));
}

namespace {

double mainardi_reference(double alpha, double z) {
    mp100 a(alpha), zz(z), sum = 0, zn = 1, fact = 1;
    const mp100 pi = boost::math::constants::pi<mp100>();
    for (int n = 0; n < 600; ++n) {
        if (n > 0) fact *= n;
        const mp100 y = 1 - a * (n + 1);
        mp100 rg;
        if (y <= 0 && y == floor(y)) rg = 0;
        else if (y > 0) rg = 1 / boost::math::tgamma(y);
        else rg = boost::math::tgamma(1 - y) * sin(pi * y) / pi;
        sum += zn * rg / fact;
        zn *= -zz;
    }
    return static_cast<double>(sum);
}

}  // namespace

TEST_CASE("mainardi_eval values") {
    CHECK(mainardi_eval(0.4, 0.0) == doctest::Approx(1.0 / std::tgamma(0.6)).epsilon(1e-15));
    const double closed = std::exp(-0.25) / std::sqrt(std::numbers::pi);
    CHECK(std::abs(mainardi_eval(0.5, 1.0) - closed) <= 1e-14);
    CHECK(std::abs(mainardi_reference(0.5, 1.0) - closed) <= 1e-15);
    CHECK(mainardi_eval(0.6, 2.0) >= 0.0);
    for (double a : {0.3, 0.5, 0.7}) {
        for (double z : {0.5, 2.0, 4.0}) {
            CHECK_MESSAGE(std::abs(mainardi_eval(a, z) - mainardi_reference(a, z)) <= 1e-12,
                          "alpha=" << a << " z=" << z);
        }
    }
    CHECK_THROWS_AS(mainardi_eval(0.5, mainardi_range(0.5) * 1.01), RangeError);
    CHECK_THROWS_AS(mainardi_eval(1.0, 1.0), ParameterError);
}

TEST_CASE("mainardi_eval is nonnegative on its range") {
    for (double a : {0.2, 0.4, 0.6, 0.8}) {
        const double zmax = mainardi_range(a);
        for (int i = 0; i <= 200; ++i) CHECK(mainardi_eval(a, std::min(zmax, zmax * i / 200.0)) >= -1e-14);
    }
}

TEST_CASE("mainardi moments match Gamma(r+1)/Gamma(alpha r+1)") {
    for (double a : {0.4, 0.6}) {
        for (double r : {0.0, 0.5, 1.0, 2.0}) {
            const double want = std::tgamma(r + 1) / std::tgamma(a * r + 1);
            CHECK_MESSAGE(std::abs(mainardi_moment(a, r) - want) <= 1e-8, "alpha=" << a << " r=" << r);
        }
    }
    CHECK(mainardi_moment(0.5, 0.0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(mainardi_moment(0.5, 1.0) == doctest::Approx(1.128379167).epsilon(1e-9));
    CHECK(std::abs(mainardi_moment(0.3, 2.0) - 2.0 / std::tgamma(1.6)) <= 1e-8);
    // higher moments: the truncation point sits where the series is rounding noise
    for (double a : {0.25, 0.5, 0.75, 0.9}) {
        const double want = std::tgamma(3.5) / std::tgamma(a * 2.5 + 1);
        CHECK_MESSAGE(std::abs(mainardi_moment(a, 2.5) / want - 1.0) <= 1e-8, "alpha=" << a);
    }
    CHECK_THROWS_AS(mainardi_moment(0.5, -1.0), ParameterError);
    CHECK_THROWS_AS(mainardi_integral(0.5, [](double t) { return std::exp(t * t); }), QuadratureError);
}

TEST_CASE("Laplace transforms of the Mainardi density give E_alpha and E_{alpha,alpha}") {
    for (double a : {0.4, 0.7}) {
        for (double lam : {0.1, 1.0, 10.0}) {
            const double e1 = mainardi_integral(a, [lam](double t) { return std::exp(-lam * t); });
            const double e2 = mainardi_integral(a, [a, lam](double t) { return a * t * std::exp(-lam * t); });
            CHECK(std::abs(e1 - ml_value(a, 1.0, lam)) <= 1e-8);
            CHECK(std::abs(e2 - ml_value(a, a, lam)) <= 1e-8);
        }
    }
}

TEST_CASE("MainardiRule agrees with the adaptive integral and with E_alpha") {
    for (double a : {0.3, 0.6, 0.75}) {
        const MainardiRule rule(a);
        CHECK(rule.alpha() == a);
        CHECK(rule.tail() <= 1e-14);
        CHECK(rule.integrate([](double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-12));
        for (double r : {-0.5, 1.0, 2.5})
            CHECK(rule.integrate([r](double t) { return std::pow(t, r); }) ==
                  doctest::Approx(std::tgamma(r + 1) / std::tgamma(a * r + 1)).epsilon(1e-10));
        for (double lam : {1e-3, 0.5, 20.0, 1e4}) {
            const double e = rule.integrate([lam](double t) { return std::exp(-lam * t); });
            CHECK(std::abs(e - ml_value(a, 1.0, lam)) <= 1e-12);
        }
    }
    const MainardiRule near_one(0.9);
    CHECK(near_one.integrate([](double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(near_one.integrate([](double t) { return std::exp(-3.0 * t); }) - ml_value(0.9, 1.0, 3.0)) <= 1e-12);
    CHECK_THROWS_AS(MainardiRule(1.0), ParameterError);
}
