#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mulharm/torus_grid.hpp"

namespace mulharm {

struct CorpusSpec {
    // Random tuples with Gaussian coefficients.
    std::size_t count = 8;
    // Max-norm band limit; defaults to N/4 of the grid it is generated on.
    std::optional<long> band;
    // Append smoothed indicators, single modes, constants and a mixed tuple.
    bool structured = true;
    // Functions per tuple.
    int arity = 2;

    static CorpusSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct CorpusTuple {
    std::string id;
    std::string kind;
    std::vector<SampledFunction> components;
};

// Deterministic in (grid, spec, seed). Coefficients are drawn in a fixed
// frequency order over the band, so the same seed yields the same
// trigonometric polynomials on every grid whose N/2 exceeds the band.
std::vector<CorpusTuple> generate_corpus(const TorusGrid& grid, const CorpusSpec& spec, std::uint64_t seed);

// Standard complex Gaussian coefficients on max-norm |k| <= band, scaled to
// unit mean square.
SampledFunction gaussian_polynomial(const TorusGrid& grid, long band, std::uint64_t seed);

// Indicator of the box prod_i [lo_i, hi_i) (one interval per axis), convolved
// with a Gaussian of width sigma in Fourier space and truncated to |k| <= band.
SampledFunction smoothed_indicator(const TorusGrid& grid, const std::vector<std::pair<double, double>>& box, long band,
                                   double sigma = kPeriod / 16.0);

// Share of sum |f^|^2 outside max-norm |k| <= band.
double spectral_mass_outside(const SampledFunction& f, long band);

}  // namespace mulharm
