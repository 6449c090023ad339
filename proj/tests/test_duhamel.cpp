#include <doctest.h>

#include "fracks/duhamel.hpp"
#include "fracks/errors.hpp"
#include "fracks/specfun.hpp"
#include "test_fields.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <numbers>

using namespace fracks;
using fracks::testing::band_limited;
using fracks::testing::max_diff;
using mp50 = boost::multiprecision::cpp_bin_float_50;

namespace {

// E_{a,b}(-x) by the power series in 50 digits (small x only).
double ml_series_mp(double a, double b, double x) {
    mp50 sum = 0, term_x = 1;
    for (int k = 0; k < 400; ++k) {
        sum += term_x / boost::math::tgamma(mp50(a) * k + mp50(b));
        term_x *= -mp50(x);
    }
    return static_cast<double>(sum);
}

std::vector<double> on_mesh(const TimeMesh& mesh, double (*fn)(double)) {
    std::vector<double> v(mesh.size());
    for (std::size_t i = 0; i < mesh.size(); ++i) v[i] = fn(mesh[i]);
    return v;
}

double observed_order(double e_coarse, double e_fine) { return std::log2(e_coarse / e_fine); }

SpectralField mode(const Grid& g, int k, double amp = 1.0) {
    SpectralField f(g);
    f[g.index_of(k)] += 0.5 * amp;
    f[g.index_of(-k)] += 0.5 * amp;
    return f;
}

}  // namespace

TEST_CASE("TimeMesh") {
    const TimeMesh u = TimeMesh::uniform(2.0, 8);
    CHECK(u.size() == 9);
    CHECK(u[0] == 0.0);
    CHECK(u[8] == 2.0);
    CHECK(u[4] == doctest::Approx(1.0));
    const TimeMesh g = TimeMesh::graded(1.0, 10, 0.5);
    CHECK(g.grading() == 4.0);
    CHECK(g[1] == doctest::Approx(1e-4));
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
    CHECK_THROWS_AS(TimeMesh(0.0, 4), ParameterError);
    CHECK_THROWS_AS(TimeMesh(1.0, 0), ParameterError);
    CHECK_THROWS_AS(TimeMesh(1.0, 4, 0.5), ParameterError);
}

TEST_CASE("rl_integral closed forms") {
    const double a = 0.6;
    const TimeMesh mesh = TimeMesh::uniform(2.0, 512);
    const auto one = rl_integral(std::vector<double>(mesh.size(), 1.0), mesh, a);
    const auto lin = rl_integral(on_mesh(mesh, [](double t) { return t; }), mesh, a);
    double e1 = 0, e2 = 0;
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        const double t = mesh[i];
        e1 = std::max(e1, std::abs(one[i] - std::pow(t, a) / std::tgamma(a + 1)));
        e2 = std::max(e2, std::abs(lin[i] - std::pow(t, 1 + a) / std::tgamma(2 + a)));
    }
    CHECK(e1 <= 1e-6);
    CHECK(e2 <= 1e-6);

    // Beta-integral closed form checked against direct quadrature
    boost::math::quadrature::tanh_sinh<double> ts;
    const double t = 2.0;
    const double direct =
        ts.integrate([&](double tau, double tc) { return std::pow(tc > 0 ? tc : t - tau, a - 1) * tau; }, 0.0, t,
                     1e-14) /
        std::tgamma(a);
    CHECK(direct == doctest::Approx(std::pow(t, 1 + a) / std::tgamma(2 + a)).epsilon(1e-10));

    CHECK_THROWS_AS(rl_integral({}, mesh, a), ShapeError);
    CHECK_THROWS_AS(rl_integral(std::vector<double>(3, 1.0), mesh, a), ShapeError);
}

TEST_CASE("rl_integral convergence, semigroup and alpha near one") {
    const double a = 0.4;
    auto err = [&](std::size_t n) {
        const TimeMesh mesh = TimeMesh::uniform(1.0, n);
        const auto r = rl_integral(on_mesh(mesh, [](double t) { return std::sin(3 * t); }), mesh, a);
        // I^a sin(3t) at t = 1 by adaptive quadrature
        boost::math::quadrature::tanh_sinh<double> ts;
        const double want =
            ts.integrate([&](double tau, double tc) { return std::pow(tc > 0 ? tc : 1.0 - tau, a - 1) * std::sin(3 * tau); },
                         0.0, 1.0, 1e-14) /
            std::tgamma(a);
        return std::abs(r.back() - want);
    };
    const double e64 = err(64), e128 = err(128), e256 = err(256);
    CHECK(observed_order(e64, e128) >= 1.0 + a - 0.1);
    CHECK(observed_order(e128, e256) >= 1.0 + a - 0.1);

    // I^0.5 I^0.3 = I^0.8; the inner result has a t^0.3 singularity, hence the graded mesh
    auto semigroup_defect = [](std::size_t n) {
        const TimeMesh mesh(1.0, n, 2.0);
        const auto f = on_mesh(mesh, [](double t) { return std::cos(t); });
        const auto ab = rl_integral(rl_integral(f, mesh, 0.3), mesh, 0.5);
        const auto direct = rl_integral(f, mesh, 0.8);
        double worst = 0.0;
        for (std::size_t i = 0; i < mesh.size(); ++i) worst = std::max(worst, std::abs(ab[i] - direct[i]));
        return worst;
    };
    const double d200 = semigroup_defect(200), d400 = semigroup_defect(400);
    CHECK(d400 <= 1e-4);
    CHECK(observed_order(d200, d400) >= 1.0);

    const TimeMesh mesh = TimeMesh::uniform(1.0, 400);
    const auto f = on_mesh(mesh, [](double t) { return std::cos(t); });
    double worst = 0.0;

    const auto near = rl_integral(f, mesh, 0.999);
    worst = 0.0;
    for (std::size_t i = 0; i < mesh.size(); ++i) worst = std::max(worst, std::abs(near[i] - std::sin(mesh[i])));
    CHECK(worst <= 1e-3);
}

TEST_CASE("kernel weights") {
    const TimeMesh mesh = TimeMesh::graded(1.5, 40, 0.7);
    // m = 0 reduces to the Riemann-Liouville weights
    const auto w0 = kernel_weights(mesh, 40, 0.7, 0.0);
    const auto p0 = power_weights(mesh, 40, 0.7);
    // single weights differ by rounding amplified by t/h; the sums against smooth data agree
    double q0 = 0.0, q1 = 0.0;
    for (std::size_t i = 0; i < w0.size(); ++i) {
        q0 += w0[i] * std::cos(mesh[i]);
        q1 += p0[i] / std::tgamma(0.7) * std::cos(mesh[i]);
    }
    CHECK(q0 == doctest::Approx(q1).epsilon(1e-13));

    // the weights integrate constants exactly: sum = t^a E_{a,a+1}(-m t^a)
    for (double m : {0.3, 5.0, 200.0}) {
        const auto w = kernel_weights(mesh, 40, 0.7, m);
        double sum = 0.0;
        for (double x : w) sum += x;
        const double ta = std::pow(1.5, 0.7);
        CHECK(sum == doctest::Approx(ta * ml_value(0.7, 1.7, m * ta)).epsilon(1e-12));
    }

    // alpha = 1: exponential kernel against linear data
    const TimeMesh um = TimeMesh::uniform(2.0, 16);
    const double m = 1.7;
    const auto w1 = kernel_weights(um, 16, 1.0, m);
    double acc = 0.0;
    for (std::size_t i = 0; i < w1.size(); ++i) acc += w1[i] * um[i];
    const double t = 2.0;
    CHECK(acc == doctest::Approx(t / m - (1 - std::exp(-m * t)) / (m * m)).epsilon(1e-13));

    // literal gamma sign: negative m is allowed
    const auto wn = kernel_weights(um, 16, 0.8, -0.5);
    for (double x : wn) CHECK(std::isfinite(x));
}

TEST_CASE("relaxation identity for duhamel_T") {
    // int_0^t s^{a-1} E_{a,a}(-g s^a) ds = (1 - E_a(-g t^a)) / g, termwise in 50 digits
    const double a = 0.7, g = 1.3, t = 2.0;
    {
        mp50 sum = 0, p = 1;
        const mp50 ta = pow(mp50(t), mp50(a));
        for (int k = 0; k < 300; ++k) {
            sum += p * ta / boost::math::tgamma(mp50(a) * (k + 1) + 1);
            p *= -mp50(g) * ta;
        }
        CHECK(static_cast<double>(sum) == doctest::Approx((1 - ml_value(a, 1.0, g * std::pow(t, a))) / g).epsilon(1e-13));
    }

    const Grid grid(1, 8, std::numbers::pi);
    ModelParams p;
    p.alpha = a;
    p.gamma = g;
    p.kappa = 0.9;
    const double c = 1.7;
    SpectralField eta(grid);
    eta[0] = c;
    for (std::size_t n : {64, 512}) {
        const TimeMesh mesh = TimeMesh::graded(t, n, a);
        History h;
        for (std::size_t i = 0; i < mesh.size(); ++i) h.append(eta, SpectralField(grid));
        const SpectralField T = duhamel_T(h, mesh, p, n);
        const double want = p.kappa * c / g * (1 - ml_value(a, 1.0, g * std::pow(t, a)));
        CHECK(std::abs(T[0].real() - want) <= 1e-12);
        CHECK(std::abs(T[1]) == 0.0);
    }
}

TEST_CASE("duhamel_T converges on tau^a data") {
    // int_0^t (t-s)^{a-1} E_{a,a}(-g (t-s)^a) s^mu ds = Gamma(mu+1) t^{a+mu} E_{a,a+mu+1}(-g t^a)
    const double a = 0.6, g = 0.8, t = 1.0, mu = a;
    const double want = std::tgamma(mu + 1) * std::pow(t, a + mu) * ml_series_mp(a, a + mu + 1, g * std::pow(t, a));
    std::vector<double> errs;
    for (std::size_t n : {64, 128, 256, 512}) {
        const TimeMesh mesh = TimeMesh::graded(t, n, a);
        std::vector<double> w = kernel_weights(mesh, n, a, g);
        double acc = 0.0;
        for (std::size_t i = 0; i <= n; ++i) acc += w[i] * std::pow(mesh[i], mu);
        errs.push_back(std::abs(acc - want));
    }
    for (std::size_t i = 0; i + 1 < errs.size(); ++i) CHECK(observed_order(errs[i], errs[i + 1]) >= 1.0);
    CHECK(errs.back() <= 1e-6);
}

TEST_CASE("duhamel_B basics") {
    const Grid grid(1, 32, std::numbers::pi);
    ModelParams p;
    const TimeMesh mesh = TimeMesh::graded(1.0, 16, p.alpha);
    const SpectralField eta = band_limited(grid, 6, 1), v = band_limited(grid, 6, 2);
    History zero_eta, const_v, full;
    SpectralField cst(grid);
    cst[0] = 3.0;
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        zero_eta.append(SpectralField(grid), v);
        const_v.append(eta, cst);
        full.append(eta, v);
    }
    const DuhamelPlan plan(grid, mesh, p, DuhamelKind::B);
    CHECK(coeff_l2_norm(duhamel_B(zero_eta, plan, 16)) == 0.0);
    CHECK(coeff_l2_norm(duhamel_B(const_v, plan, 16)) == 0.0);
    CHECK(coeff_l2_norm(duhamel_B(full, plan, 16)) > 0.0);
    CHECK(coeff_l2_norm(duhamel_B(full, plan, 0)) == 0.0);
    CHECK_THROWS_AS(duhamel_B(full, plan, 17), ShapeError);
    CHECK_THROWS_AS(duhamel_T(full, plan, 4), ParameterError);

    // bilinearity and recomputation with a fresh plan
    History scaled;
    for (std::size_t i = 0; i < mesh.size(); ++i) scaled.append(2.0 * eta, -3.0 * v);
    CHECK(max_diff(duhamel_B(scaled, plan, 10), -6.0 * duhamel_B(full, plan, 10)) <= 1e-13);
    CHECK(max_diff(duhamel_B(full, mesh, p, 10), duhamel_B(full, plan, 10)) == 0.0);
}

TEST_CASE("duhamel_B matches the exponential convolution at alpha = 1") {
    const Grid grid(1, 32, std::numbers::pi);
    ModelParams p;
    p.alpha = 1.0;
    p.theta = 2.0;
    p.theta1 = 0.0;
    p.chi = 1.5;
    const double t = 0.5;
    const std::size_t n = 256;
    const TimeMesh mesh = TimeMesh::uniform(t, n);
    // eta(tau) = (1 + tau^2) cos(2x), v = cos(3x): source div(eta v_x)
    History h;
    for (std::size_t i = 0; i < mesh.size(); ++i) h.append(mode(grid, 2, 1 + mesh[i] * mesh[i]), mode(grid, 3));
    const SpectralField B = duhamel_B(h, mesh, p, n);
    const SpectralField src = bilinear_source(mode(grid, 2), mode(grid, 3), 0.0);
    boost::math::quadrature::gauss_kronrod<double, 61> gk;
    double worst = 0.0;
    for (int k : {1, 5}) {
        const double k2 = k * k;
        const double integral =
            gk.integrate([&](double tau) { return std::exp(-(t - tau) * k2) * (1 + tau * tau); }, 0.0, t, 10, 1e-14);
        const cplx want = -p.chi * integral * src[grid.index_of(k)];
        worst = std::max(worst, std::abs(B[grid.index_of(k)] - want));
    }
    CHECK(worst <= 1e-5);
    CHECK(std::abs(src[grid.index_of(5)]) > 0.1);
}

TEST_CASE("duhamel_T classical case") {
    const Grid grid(1, 16, std::numbers::pi);
    ModelParams p;
    p.alpha = 1.0;
    p.theta = 2.0;
    p.gamma = 0.0;
    const double t = 1.0;
    boost::math::quadrature::gauss_kronrod<double, 61> gk;
    const double want = gk.integrate([&](double tau) { return std::exp(-(t - tau) * 9.0) * std::sin(tau); }, 0.0, t, 10, 1e-14);
    double prev = INFINITY;
    for (std::size_t n : {64, 128, 256}) {
        const TimeMesh mesh = TimeMesh::uniform(t, n);
        History h;
        for (std::size_t i = 0; i < mesh.size(); ++i) h.append(mode(grid, 3, std::sin(mesh[i])), SpectralField(grid));
        const SpectralField T = duhamel_T(h, mesh, p, n);
        const double err = std::abs(2.0 * T[grid.index_of(3)].real() - want);
        CHECK(err < prev / 3.0);
        prev = err;
    }
    CHECK(prev <= 1e-5);

    History none;
    const TimeMesh mesh = TimeMesh::uniform(t, 4);
    for (std::size_t i = 0; i < mesh.size(); ++i) none.append(SpectralField(grid), SpectralField(grid));
    CHECK(coeff_l2_norm(duhamel_T(none, mesh, p, 4)) == 0.0);
}

TEST_CASE("caputo_residual") {
    const double a = 0.6, lam = 1.0;
    CHECK_THROWS_AS(caputo_residual(std::vector<double>(8, 1.0), a, std::vector<double>(8, 0.0), TimeMesh::uniform(1.0, 7)),
                    ParameterError);
    const TimeMesh m64 = TimeMesh::graded(1.0, 64, a);
    CHECK(caputo_residual(std::vector<double>(65, 2.5), a, std::vector<double>(65, 0.0), m64) <= 1e-12);
    CHECK_THROWS_AS(caputo_residual(std::vector<double>(65, 2.5), a, std::vector<double>(65, 0.0), m64, 1.0),
                    ParameterError);

    std::vector<double> res;
    for (std::size_t n : {64, 128, 256}) {
        const TimeMesh mesh = TimeMesh::graded(1.0, n, a);
        std::vector<double> u(mesh.size()), rhs(mesh.size());
        for (std::size_t i = 0; i < mesh.size(); ++i) {
            u[i] = ml_value(a, 1.0, lam * std::pow(mesh[i], a));
            rhs[i] = -lam * u[i];
        }
        res.push_back(caputo_residual(u, a, rhs, mesh));
    }
    CHECK(observed_order(res[0], res[1]) >= a);
    CHECK(observed_order(res[1], res[2]) >= a);

    // alpha = 1 is the ordinary derivative
    const TimeMesh mesh = TimeMesh::uniform(1.0, 200);
    std::vector<double> u(mesh.size()), rhs(mesh.size());
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        u[i] = std::exp(-mesh[i]);
        rhs[i] = -u[i];
    }
    CHECK(caputo_residual(u, 1.0, rhs, mesh) <= 1e-4);
}

TEST_CASE("yamazaki integral") {
    const Grid grid(1, 256, 16 * std::numbers::pi);
    const DyadicCutoff c(grid);
    YamazakiParams yp;
    yp.alpha = 0.7;
    yp.theta = 1.2;
    yp.zeta = 0.3;
    yp.s = 0.5;
    yp.s0 = yp.s - yp.theta + yp.zeta;
    CHECK_NOTHROW(yp.check());
    YamazakiParams bad = yp;
    bad.s0 += 0.1;
    CHECK_THROWS_WITH_AS(bad.check(), doctest::Contains("-s + theta - zeta = -s0"), ParameterError);

    CHECK(yamazaki_integral_check(SpectralField(grid), yp, c, 100.0).ratio == 0.0);

    const SpectralField f = band_limited(grid, 60, 9);
    std::vector<double> ratios;
    for (double T : {1e2, 1e3, 1e4}) {
        const YamazakiResult r = yamazaki_integral_check(f, yp, c, T, 16);
        CHECK(r.tail_exponent < -1.0);
        ratios.push_back(r.ratio);
    }
    CHECK(std::abs(ratios[2] / ratios[1] - 1.0) < std::abs(ratios[1] / ratios[0] - 1.0) + 1e-12);
    CHECK(std::abs(ratios[2] / ratios[1] - 1.0) <= 1e-2);

    // single shell, zeta = 0: peak near the scale of tau^{a-1} E_{a,a}(-tau^a 2^{j theta})
    YamazakiParams sp = yp;
    sp.zeta = 0.0;
    sp.s0 = sp.s - sp.theta;
    const int j = 1;
    const SpectralField bump = from_symbol(grid, [&](const std::array<double, 3>& xi) {
        return cplx(DyadicCutoff::chi(std::ldexp(std::abs(xi[0]), -j)));
    });
    const YamazakiResult r = yamazaki_integral_check(bump, sp, c, 1e3, 24, 1e-6);
    std::size_t imax = 0;
    for (std::size_t i = 0; i < r.tau.size(); ++i)
        if (r.integrand[i] * r.tau[i] > r.integrand[imax] * r.tau[imax]) imax = i;
    // scalar profile, weighted by tau for the log-scale measure
    double best_tau = 0.0, best = -1.0;
    for (double lt = -6; lt <= 3; lt += 0.01) {
        const double tau = std::pow(10.0, lt);
        const double v = std::pow(tau, sp.alpha) * ml_value(sp.alpha, sp.alpha, std::pow(tau, sp.alpha) * std::exp2(j * sp.theta));
        if (v > best) best = v, best_tau = tau;
    }
    CHECK(std::abs(std::log2(r.tau[imax] / best_tau)) <= 1.5);
}
