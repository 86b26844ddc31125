#include "mulharm/maximal_ops.hpp"

#include <cmath>

#include "mulharm/error.hpp"

namespace mulharm {
namespace {

void check_grid(const SampledFunction& f, const MaximalConfig& cfg) {
    if (!(f.grid() == cfg.family.grid())) throw GridMismatch("maximal operator: function and cube family grids differ");
}

std::vector<double> powered_moduli(const SampledFunction& f, double power) {
    auto mods = f.moduli();
    if (power != 1.0)
        for (auto& v : mods) v = std::pow(v, power);
    return mods;
}

SampledFunction to_function(const TorusGrid& grid, const std::vector<double>& v, double root = 1.0) {
    std::vector<cplx> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = root == 1.0 ? v[i] : std::pow(v[i], 1.0 / root);
    return SampledFunction(grid, std::move(out));
}

std::vector<double> maximal_of(std::span<const double> values, const MaximalConfig& cfg) {
    const auto means = cube_means(values, cfg.family, cfg.path);
    return max_over_containing(means, cfg.family, cfg.path);
}

std::vector<double> sharp_of(std::span<const cplx> values, const MaximalConfig& cfg) {
    const auto osc = cube_oscillations(values, cfg.family, cfg.path);
    return max_over_containing(osc, cfg.family, cfg.path);
}

}  // namespace

void MaximalConfig::validate() const {
    if (family.cubes().empty()) throw RejectedInput("maximal operator: empty cube family");
    if (!(delta > 0.0) || !std::isfinite(delta)) throw InvalidExponent("maximal operator: delta must be > 0");
    if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidExponent("maximal operator: p must be >= 1");
}

SampledFunction hl_maximal(const SampledFunction& f, const MaximalConfig& cfg) {
    cfg.validate();
    check_grid(f, cfg);
    return to_function(f.grid(), maximal_of(f.moduli(), cfg));
}

SampledFunction m_delta(const SampledFunction& f, const MaximalConfig& cfg) {
    cfg.validate();
    check_grid(f, cfg);
    return to_function(f.grid(), maximal_of(powered_moduli(f, cfg.delta), cfg), cfg.delta);
}

SampledFunction sharp_maximal(const SampledFunction& f, const MaximalConfig& cfg) {
    cfg.validate();
    check_grid(f, cfg);
    return to_function(f.grid(), sharp_of(f.values(), cfg));
}

SampledFunction sharp_m_delta(const SampledFunction& f, const MaximalConfig& cfg) {
    cfg.validate();
    check_grid(f, cfg);
    const auto powered = powered_moduli(f, cfg.delta);
    const std::vector<cplx> as_complex(powered.begin(), powered.end());
    return to_function(f.grid(), sharp_of(as_complex, cfg), cfg.delta);
}

SampledFunction multilinear_maximal(std::span<const SampledFunction> fs, const MaximalConfig& cfg) {
    cfg.validate();
    if (fs.empty()) throw RejectedInput("multilinear_maximal: needs at least one function");
    for (const auto& f : fs) check_grid(f, cfg);

    std::vector<double> product(cfg.family.cubes().size(), 1.0);
    for (const auto& f : fs) {
        const auto means = cube_means(powered_moduli(f, cfg.p), cfg.family, cfg.path);
        for (std::size_t k = 0; k < product.size(); ++k)
            product[k] *= cfg.p == 1.0 ? means[k] : std::pow(means[k], 1.0 / cfg.p);
    }
    return to_function(fs.front().grid(), max_over_containing(product, cfg.family, cfg.path));
}

}  // namespace mulharm
