#pragma once

#include "fracks/besov.hpp"
#include "fracks/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace fracks::testing {

// Random real field with modes |k_a| <= kmax only.
inline SpectralField band_limited(const Grid& g, int kmax, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    SpectralField f(g);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto k = g.wavevector(i);
        bool keep = true;
        for (int a = 0; a < g.dim(); ++a) keep = keep && std::abs(k[a]) <= kmax;
        if (keep) f[i] = cplx(nd(rng), nd(rng));
    }
    return hermitian_part(f);
}

// Fixed radial profile chi(|xi| / 2^j), concentrated on dyadic shell j.
inline SpectralField shell_bump(const Grid& g, int j) {
    return from_symbol(g, [j](const std::array<double, 3>& xi) {
        const double r = std::sqrt(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
        return cplx(DyadicCutoff::chi(std::ldexp(r, -j)));
    });
}

inline double max_diff(const SpectralField& a, const SpectralField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace fracks::testing
