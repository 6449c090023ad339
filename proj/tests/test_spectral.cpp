#include <doctest.h>

#include "fracks/errors.hpp"
#include "fracks/specfun.hpp"
#include "fracks/spectral.hpp"
#include "test_fields.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

using namespace fracks;
using fracks::testing::band_limited;
using fracks::testing::max_diff;

namespace {

std::vector<double> random_values(const Grid& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::vector<double> v(g.size());
    for (auto& x : v) x = nd(rng);
    return v;
}

}  // namespace

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(Grid(4, 16, 1.0), ParameterError);
    CHECK_THROWS_AS(Grid(1, 12, 1.0), ParameterError);
    CHECK_THROWS_AS(Grid(1, 4, 1.0), ParameterError);
    CHECK_THROWS_AS(Grid(1, 16, 0.0), ParameterError);
    const Grid g(2, 16, std::numbers::pi);
    CHECK(g.size() == 256);
    CHECK(g.wavenumber(8) == -8);
    CHECK(g.index_of(-3) == 13);
    CHECK(g.xi_unit() == doctest::Approx(1.0));
}

TEST_CASE("transform of constants and plane waves") {
    const Grid g(1, 32, 3.0);
    const auto c = dft_forward(g, std::vector<double>(g.size(), 2.5));
    CHECK(std::abs(c[0] - cplx(2.5)) < 1e-15);
    for (std::size_t i = 1; i < c.size(); ++i) CHECK(std::abs(c[i]) < 1e-15);

    const int k0 = 5;
    std::vector<cplx> w(g.size());
    for (int j = 0; j < g.n(); ++j) w[j] = std::polar(1.0, k0 * g.xi_unit() * g.coord(j));
    const auto f = dft_forward(g, w);
    for (std::size_t i = 0; i < f.size(); ++i)
        CHECK(std::abs(f[i] - cplx(g.wavenumber(static_cast<int>(i)) == k0 ? 1.0 : 0.0)) < 1e-14);
}

TEST_CASE("round trip and Plancherel in 1, 2 and 3 dimensions") {
    for (int d = 1; d <= 3; ++d) {
        const Grid g(d, d == 3 ? 16 : 64, 2.0 + d);
        const auto v = random_values(g, 11u + d);
        const auto f = dft_forward(g, v);
        const auto back = dft_inverse(f);
        double err = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) err = std::max(err, std::abs(back[i] - v[i]));
        CHECK(err <= 1e-12);
        CHECK(std::abs(grid_l2_norm(g, v) - coeff_l2_norm(f)) <= 1e-12 * grid_l2_norm(g, v));
        CHECK(hermitian_defect(f) <= 1e-13);
    }
    const Grid g(1, 16, 1.0);
    CHECK_THROWS_AS(dft_forward(g, std::vector<double>(15)), ShapeError);
}

TEST_CASE("fractional Laplacian") {
    const Grid g(2, 32, std::numbers::pi);
    SpectralField wave(g);
    const std::size_t idx = g.flat_index({g.index_of(3), g.index_of(-4), 0});
    wave[idx] = 1.0;
    const auto lw = frac_laplacian(wave, 0.7);
    CHECK(std::abs(lw[idx] - std::pow(5.0, 0.7)) < 1e-13);

    const auto f = band_limited(g, 10, 3);
    CHECK(max_diff(frac_laplacian(f, 0.0), f) == 0.0);

    // theta = 2 against -div grad
    const auto lap = frac_laplacian(f, 2.0);
    const auto dd = -1.0 * divergence(gradient(f));
    CHECK(max_diff(lap, dd) <= 1e-10);

    const auto ab = frac_laplacian(frac_laplacian(f, 0.4), 0.9);
    const auto direct = frac_laplacian(f, 1.3);
    CHECK(max_diff(ab, direct) <= 1e-12 * std::pow(10 * std::sqrt(2.0), 1.3));
    CHECK(hermitian_defect(lap) <= 1e-12);
}

TEST_CASE("g_kernel") {
    const Grid g(2, 16, std::numbers::pi);
    SpectralField v(g);
    const std::size_t idx = g.flat_index({g.index_of(2), g.index_of(1), 0});
    v[idx] = 1.0;
    const auto G = g_kernel(v, 0.5);
    const double w = std::pow(std::sqrt(5.0), -0.5);
    CHECK(std::abs(G[0][idx] - cplx(0, 2 * w)) < 1e-14);
    CHECK(std::abs(G[1][idx] - cplx(0, 1 * w)) < 1e-14);

    const auto f = band_limited(g, 5, 7);
    const auto g0 = g_kernel(f, 0.0);
    const auto grad = gradient(f);
    CHECK(max_diff(g0[0], grad[0]) == 0.0);
    for (const auto& c : g_kernel(f, 1.3)) CHECK(hermitian_defect(c) <= 1e-14);

    SpectralField mean_only(g);
    mean_only[0] = 3.0;
    for (const auto& c : g_kernel(mean_only, 0.5))
        for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i] == cplx(0.0));
    CHECK_THROWS_AS(g_kernel(f, 2.0), ParameterError);
}

TEST_CASE("heat semigroup") {
    const Grid g(1, 256, 8.0 * std::numbers::pi);
    const double s0 = 1.0;
    const auto f0 = dft_forward(g, sample(g, [&](const auto& x) { return std::exp(-x[0] * x[0] / (4 * s0)); }));
    CHECK(max_diff(heat_semigroup(f0, 0.0, 1.5), f0) == 0.0);

    const auto a = heat_semigroup(heat_semigroup(f0, 0.3, 1.5), 0.5, 1.5);
    const auto b = heat_semigroup(f0, 0.8, 1.5);
    CHECK(max_diff(a, b) <= 1e-16);

    for (double t : {0.5, 1.0, 3.0}) {
        const auto u = dft_inverse(heat_semigroup(f0, t, 2.0));
        const auto exact = sample(g, [&](const auto& x) {
            return std::sqrt(s0 / (s0 + t)) * std::exp(-x[0] * x[0] / (4 * (s0 + t)));
        });
        double err = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) err = std::max(err, std::abs(u[i] - exact[i]));
        CHECK(err <= 1e-8);
    }
}

TEST_CASE("Mittag-Leffler operator") {
    const Grid g(1, 64, 4.0);
    const auto f = band_limited(g, 20, 9);
    ModelParams p;
    p.alpha = 0.6;
    p.theta = 1.2;
    p.gamma = 0.5;

    CHECK(max_diff(ml_operator(f, 0.0, p, MLFamily::E_alpha, true), f) <= 1e-15);
    const auto aa = ml_operator(f, 0.0, p, MLFamily::E_alpha_alpha, false);
    CHECK(max_diff(aa, (1.0 / std::tgamma(0.6)) * f) <= 1e-14);

    ModelParams one = p;
    one.alpha = 1.0;
    CHECK(max_diff(ml_operator(f, 0.7, one, MLFamily::E_alpha, false), heat_semigroup(f, 0.7, 1.2)) <= 1e-15);

    SpectralField wave(g);
    wave[g.index_of(5)] = 1.0;
    const double xi = 5 * g.xi_unit();
    const double t = 1.3;
    const auto mw = ml_operator(wave, t, p, MLFamily::E_alpha, true);
    CHECK(std::abs(mw[g.index_of(5)].real() -
                   ml_value(0.6, 1.0, std::pow(t, 0.6) * (std::pow(xi, 1.2) + 0.5))) <= 1e-15);

    p.gamma_sign = GammaSign::paper;
    const auto mp = ml_operator(wave, t, p, MLFamily::E_alpha, true);
    CHECK(std::abs(mp[g.index_of(5)].real() -
                   ml_eval_signed({0.6, 1.0}, -std::pow(t, 0.6) * (std::pow(xi, 1.2) - 0.5))) <= 1e-14);

    // contraction: every E_alpha multiplier lies in (0, 1]
    p.gamma_sign = GammaSign::damped;
    for (double tt : {0.01, 1.0, 50.0}) {
        const auto tab = ml_table(g, p, MLFamily::E_alpha, tt, false);
        for (double m : tab)
            if (!std::isnan(m)) CHECK((m > 0.0 && m <= 1.0));
    }
}

TEST_CASE("divergence") {
    const Grid g(2, 16, std::numbers::pi);
    VectorField F(2, SpectralField(g));
    const std::size_t idx = g.flat_index({g.index_of(1), g.index_of(2), 0});
    F[0][idx] = 1.0;
    F[1][idx] = 2.0;
    CHECK(std::abs(divergence(F)[idx] - cplx(0, 1 + 4)) < 1e-14);
    VectorField C(2, SpectralField(g));
    C[0][0] = 1.0;
    C[1][0] = -2.0;
    const SpectralField dc = divergence(C);
    for (const auto& c : dc.coeffs()) CHECK(c == cplx(0.0));
    CHECK_THROWS_AS(divergence(VectorField(1, SpectralField(g))), ShapeError);
}

TEST_CASE("pointwise products") {
    const Grid g(1, 32, std::numbers::pi);
    const auto f = band_limited(g, 8, 21);
    SpectralField one(g);
    one[0] = 1.0;
    CHECK(max_diff(pointwise_product(one, f, true), f) <= 1e-14);

    SpectralField a(g), b(g);
    a[g.index_of(3)] = 1.0;
    b[g.index_of(4)] = 2.0;
    const auto ab = pointwise_product(a, b, false);
    for (std::size_t i = 0; i < ab.size(); ++i)
        CHECK(std::abs(ab[i] - cplx(g.wavenumber(static_cast<int>(i)) == 7 ? 2.0 : 0.0)) < 1e-14);

    // direct convolution of band-limited coefficients on retained modes
    const Grid s(1, 16, 2.0);
    const auto p = band_limited(s, 5, 1), q = band_limited(s, 5, 2);
    const auto pq = pointwise_product(p, q, true);
    for (int k = -5; k <= 5; ++k) {
        cplx conv = 0.0;
        for (int k1 = -5; k1 <= 5; ++k1) {
            const int k2 = k - k1;
            if (std::abs(k2) > 5) continue;
            conv += p[s.index_of(k1)] * q[s.index_of(k2)];
        }
        CHECK(std::abs(pq[s.index_of(k)] - conv) < 1e-13);
    }
    CHECK(is_dealiased(pq));
    CHECK_THROWS_AS(pointwise_product(p, f, true), ShapeError);
}

TEST_CASE("dilation and resampling of a Gaussian") {
    const Grid g(1, 256, 10.0);
    auto gauss = [](double x) { return std::exp(-x * x); };
    const auto f = dft_forward(g, sample(g, [&](const auto& x) { return gauss(x[0]); }));
    const auto half = dft_inverse(dilate(f, 0.5));
    const auto twice = dft_inverse(dilate(f, 2.0));
    double e1 = 0.0, e2 = 0.0;
    for (int j = 0; j < g.n(); ++j) {
        e1 = std::max(e1, std::abs(half[j] - gauss(0.5 * g.coord(j))));
        e2 = std::max(e2, std::abs(twice[j] - gauss(2.0 * g.coord(j))));
    }
    CHECK(e1 <= 1e-12);
    CHECK(e2 <= 1e-12);

    const Grid fine(1, 512, 20.0);
    const auto r = dft_inverse(resample(f, fine));
    double e3 = 0.0;
    for (int j = 0; j < fine.n(); ++j) e3 = std::max(e3, std::abs(r[j] - (std::abs(fine.coord(j)) < 10.0 ? gauss(fine.coord(j)) : 0.0)));
    CHECK(e3 <= 1e-12);

    const auto vals = interpolate_1d(f, {0.123, -3.3});
    CHECK(std::abs(vals[0] - gauss(0.123)) < 1e-12);
    CHECK(std::abs(vals[1] - gauss(-3.3)) < 1e-12);
}

TEST_CASE("fkf snapshot round trip") {
    const Grid g(2, 16, 1.5);
    const auto f = band_limited(g, 5, 99);
    const std::string path = "test_snapshot.fkf";
    write_fkf(path, f, "eta", 0.25);
    const Snapshot s = read_fkf(path);
    CHECK(s.name == "eta");
    CHECK(s.time == 0.25);
    CHECK(s.field.grid() == g);
    CHECK(max_diff(s.field, f) == 0.0);
    std::remove(path.c_str());
}

TEST_CASE("admissibility window") {
    ModelParams p;
    p.theta1 = 0.25;
    p.theta = 1.2;
    CHECK(p.window_violation(1, 2.0).empty());
    p.theta = 1.6;
    CHECK_THROWS_AS(p.check_window(1, 2.0), ParameterError);
    CHECK(p.window_violation(1, 2.0).find("1 + (n - theta1)/3") != std::string::npos);
    p.theta = 0.9;
    CHECK(p.window_violation(1, 2.0).find("max{1") != std::string::npos);
    p.alpha = 1.5;
    CHECK_THROWS_AS(p.validate(1), ParameterError);
}
