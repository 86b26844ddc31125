#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "mulharm/torus_grid.hpp"

namespace mulharm::testing {

inline SampledFunction random_function(const TorusGrid& grid, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss;
    std::vector<cplx> v(grid.size());
    for (auto& z : v) z = {gauss(rng), gauss(rng)};
    return SampledFunction(grid, std::move(v));
}

inline SampledFunction random_real_function(const TorusGrid& grid, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss;
    std::vector<cplx> v(grid.size());
    for (auto& z : v) z = {gauss(rng), 0.0};
    return SampledFunction(grid, std::move(v));
}

// Trigonometric polynomial with Gaussian coefficients on max-norm |xi| <= band.
inline SampledFunction random_band_limited(const TorusGrid& grid, long band, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss;
    std::vector<cplx> coeffs(grid.size());
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        const auto k = grid.frequency(i);
        if (std::abs(k[0]) <= band && std::abs(k[1]) <= band) coeffs[i] = {gauss(rng), gauss(rng)};
    }
    return inverse_transform(SpectrumFunction(grid, std::move(coeffs)));
}

// Samples that are multiples of 2^-20 in [-8, 8): sums and shifts by small
// integers stay exact in double precision.
inline SampledFunction random_dyadic_function(const TorusGrid& grid, std::mt19937_64& rng) {
    std::uniform_int_distribution<long> dist(-(1L << 23), (1L << 23) - 1);
    std::vector<cplx> v(grid.size());
    for (auto& z : v) z = {std::ldexp(static_cast<double>(dist(rng)), -20), std::ldexp(static_cast<double>(dist(rng)), -20)};
    return SampledFunction(grid, std::move(v));
}

inline double max_abs_diff(const SampledFunction& a, const SampledFunction& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double relative_diff(const SampledFunction& a, const SampledFunction& b) {
    const double scale = std::max(a.max_modulus(), b.max_modulus());
    return scale == 0.0 ? 0.0 : max_abs_diff(a, b) / scale;
}

}  // namespace mulharm::testing
