#include "mulharm/corpus.hpp"

#include <cmath>
#include <random>

#include "mulharm/error.hpp"

namespace mulharm {
namespace {

void check_band(const TorusGrid& grid, long band) {
    if (band < 1) throw RejectedInput("corpus: band limit must be >= 1");
    if (2 * band >= static_cast<long>(grid.points_per_axis()))
        throw RejectedInput("corpus: band limit must stay below N/2 (aliasing)");
}

long effective_band(const TorusGrid& grid, const CorpusSpec& spec) {
    return spec.band.value_or(static_cast<long>(grid.points_per_axis() / 4));
}

// Fourier coefficient of the indicator of [lo, hi) on the circle.
cplx interval_coefficient(double lo, double hi, long k) {
    if (k == 0) return (hi - lo) / kPeriod;
    const double kk = static_cast<double>(k);
    return (std::polar(1.0, -kk * lo) - std::polar(1.0, -kk * hi)) / (cplx(0.0, kk) * kPeriod);
}

SampledFunction single_mode(const TorusGrid& grid, long k) {
    std::vector<cplx> c(grid.size());
    c[grid.flat_of_frequency({k, 0})] = 1.0;
    return inverse_transform(SpectrumFunction(grid, std::move(c)));
}

}  // namespace

CorpusSpec CorpusSpec::from_json(const nlohmann::json& j) {
    CorpusSpec s;
    if (!j.is_object()) throw ConfigError("corpus spec must be an object");
    const long count = j.value("count", static_cast<long>(s.count));
    if (count < 0) throw ConfigError("corpus: count must be >= 0");
    s.count = static_cast<std::size_t>(count);
    if (j.contains("band") && !j.at("band").is_null()) s.band = j.at("band").get<long>();
    s.structured = j.value("structured", s.structured);
    s.arity = j.value("arity", s.arity);
    if (s.arity < 1 || s.arity > 4) throw ConfigError("corpus: arity must be in 1..4");
    return s;
}

nlohmann::json CorpusSpec::to_json() const {
    return {{"count", count},
            {"band", band ? nlohmann::json(*band) : nlohmann::json(nullptr)},
            {"structured", structured},
            {"arity", arity}};
}

SampledFunction gaussian_polynomial(const TorusGrid& grid, long band, std::uint64_t seed) {
    check_band(grid, band);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::vector<cplx> c(grid.size());
    double mass = 0.0;
    const long k1_band = grid.dimension() == 2 ? band : 0;
    for (long k0 = -band; k0 <= band; ++k0)
        for (long k1 = -k1_band; k1 <= k1_band; ++k1) {
            const cplx z(gauss(rng), gauss(rng));
            c[grid.flat_of_frequency({k0, k1})] = z;
            mass += std::norm(z);
        }
    const double scale = 1.0 / std::sqrt(mass);
    for (auto& z : c) z *= scale;
    return inverse_transform(SpectrumFunction(grid, std::move(c)));
}

SampledFunction smoothed_indicator(const TorusGrid& grid, const std::vector<std::pair<double, double>>& box, long band,
                                   double sigma) {
    check_band(grid, band);
    if (static_cast<int>(box.size()) != grid.dimension()) throw RejectedInput("smoothed_indicator: one interval per axis");
    std::vector<cplx> c(grid.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        const auto k = grid.frequency(i);
        double k2 = 0.0;
        bool inside = true;
        cplx v = 1.0;
        for (int a = 0; a < grid.dimension(); ++a) {
            const long ka = k[static_cast<std::size_t>(a)];
            inside = inside && std::abs(ka) <= band;
            k2 += static_cast<double>(ka * ka);
            v *= interval_coefficient(box[static_cast<std::size_t>(a)].first, box[static_cast<std::size_t>(a)].second, ka);
        }
        if (inside) c[i] = v * std::exp(-0.5 * sigma * sigma * k2);
    }
    return inverse_transform(SpectrumFunction(grid, std::move(c)));
}

double spectral_mass_outside(const SampledFunction& f, long band) {
    const auto s = forward_transform(f);
    const auto& grid = f.grid();
    double total = 0.0, outer = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto k = grid.frequency(i);
        const double w = std::norm(s[i]);
        total += w;
        if (std::abs(k[0]) > band || std::abs(k[1]) > band) outer += w;
    }
    return total == 0.0 ? 0.0 : outer / total;
}

std::vector<CorpusTuple> generate_corpus(const TorusGrid& grid, const CorpusSpec& spec, std::uint64_t seed) {
    const long band = effective_band(grid, spec);
    check_band(grid, band);
    const auto arity = static_cast<std::size_t>(spec.arity);

    // One independent stream per component, derived from the master seed.
    std::mt19937_64 master(seed);
    std::vector<CorpusTuple> out;
    for (std::size_t t = 0; t < spec.count; ++t) {
        CorpusTuple tuple{"gaussian_" + std::to_string(t), "gaussian", {}};
        for (std::size_t j = 0; j < arity; ++j) tuple.components.push_back(gaussian_polynomial(grid, band, master()));
        out.push_back(std::move(tuple));
    }
    if (!spec.structured) return out;

    const std::vector<std::pair<double, double>> middle(static_cast<std::size_t>(grid.dimension()),
                                                        {kPeriod / 4.0, 3.0 * kPeriod / 4.0});
    const auto indicator = smoothed_indicator(grid, middle, band);
    auto mode = [&](std::size_t j) { return single_mode(grid, std::min<long>(2 + static_cast<long>(j), band)); };

    CorpusTuple ind{"smoothed_indicator", "indicator", {}};
    CorpusTuple modes{"single_modes", "mode", {}};
    CorpusTuple consts{"constants", "constant", {}};
    CorpusTuple mixed{"indicator_mode", "mixed", {}};
    for (std::size_t j = 0; j < arity; ++j) {
        ind.components.push_back(indicator);
        modes.components.push_back(mode(j));
        consts.components.push_back(SampledFunction::constant(grid, 1.0));
        mixed.components.push_back(j % 2 == 0 ? indicator : mode(j));
    }
    out.push_back(std::move(ind));
    out.push_back(std::move(modes));
    out.push_back(std::move(consts));
    out.push_back(std::move(mixed));
    return out;
}

}  // namespace mulharm
