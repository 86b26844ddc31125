#include "mulharm/weights.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mulharm/cube_statistics.hpp"
#include "mulharm/error.hpp"

namespace mulharm {
namespace {

MaximalPath path_for(const CubeFamily& family) {
    return family.is_dyadic() ? MaximalPath::fast : MaximalPath::oracle;
}

// A-constants are invariant under w -> c w; dividing by the maximum makes
// constant weights evaluate to exactly 1.
std::vector<double> normalized(const Weight& w) {
    const double top = *std::max_element(w.values().begin(), w.values().end());
    std::vector<double> u(w.values().begin(), w.values().end());
    for (auto& v : u) v /= top;
    return u;
}

std::vector<double> powered(std::span<const double> v, double e) {
    std::vector<double> out(v.begin(), v.end());
    for (auto& x : out) x = std::pow(x, e);
    return out;
}

void check_family(const TorusGrid& grid, const CubeFamily& family) {
    if (!(grid == family.grid())) throw GridMismatch("weights: weight and cube family grids differ");
}

std::size_t argmax(const std::vector<double>& v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

// Local A_P expression on every cube for already-normalized weights.
std::vector<double> multi_local(const std::vector<std::vector<double>>& u, const ExponentVector& exps,
                                const CubeFamily& family) {
    const auto path = path_for(family);
    const double p = exps.combined();
    const std::size_t n = u.front().size();

    std::vector<double> v(n, 1.0);
    for (std::size_t j = 0; j < u.size(); ++j)
        for (std::size_t x = 0; x < n; ++x) v[x] *= std::pow(u[j][x], p / exps[j]);

    auto local = cube_means(v, family, path);
    for (auto& a : local) a = std::pow(a, 1.0 / p);

    for (std::size_t j = 0; j < u.size(); ++j) {
        const double pj = exps[j];
        if (pj == 1.0) {
            const auto mins = cube_minima(u[j], family, path);
            for (std::size_t k = 0; k < local.size(); ++k) local[k] /= mins[k];
        } else {
            const double pj_dual = pj / (pj - 1.0);
            const auto means = cube_means(powered(u[j], 1.0 - pj_dual), family, path);
            for (std::size_t k = 0; k < local.size(); ++k) local[k] *= std::pow(means[k], 1.0 / pj_dual);
        }
    }
    return local;
}

std::vector<std::vector<double>> normalized_all(const WeightVector& ws) {
    std::vector<std::vector<double>> u;
    for (std::size_t j = 0; j < ws.size(); ++j) u.push_back(normalized(ws[j]));
    return u;
}

void check_multi(const WeightVector& ws, const ExponentVector& exps, const CubeFamily& family) {
    if (ws.size() != exps.size()) throw GridMismatch("multi_ap_constant: weight and exponent counts differ");
    check_family(ws.grid(), family);
    for (double pj : exps.values())
        if (pj < 1.0) throw InvalidExponent("multi_ap_constant: every p_j must be >= 1");
}

}  // namespace

Weight::Weight(TorusGrid grid, std::vector<double> samples) : grid_(grid), samples_(std::move(samples)) {
    if (samples_.size() != grid_.size()) throw GridMismatch("Weight: sample count does not match the grid");
    for (double v : samples_)
        if (!(v > 0.0) || !std::isfinite(v)) throw RejectedInput("Weight: samples must be finite and > 0");
}

ExponentVector::ExponentVector(std::vector<double> exponents) : p_(std::move(exponents)) {
    if (p_.empty()) throw InvalidExponent("ExponentVector: needs at least one exponent");
    for (double v : p_)
        if (!(v > 0.0) || !std::isfinite(v)) throw InvalidExponent("ExponentVector: exponents must lie in (0, inf)");
}

double ExponentVector::combined() const noexcept {
    double inv = 0.0;
    for (double v : p_) inv += 1.0 / v;
    return 1.0 / inv;
}

double ExponentVector::min() const noexcept { return *std::min_element(p_.begin(), p_.end()); }

WeightVector::WeightVector(std::vector<Weight> weights) : w_(std::move(weights)) {
    if (w_.empty()) throw RejectedInput("WeightVector: needs at least one weight");
    for (const auto& w : w_)
        if (!(w.grid() == w_.front().grid())) throw GridMismatch("WeightVector: weights on different grids");
}

double power_weight_value(double a, const Point& x, const TorusGrid& grid) {
    double d2 = 0.0;
    for (int ax = 0; ax < grid.dimension(); ++ax) {
        const double t = std::fmod(std::abs(x[static_cast<std::size_t>(ax)]), kPeriod);
        const double d = std::min(t, kPeriod - t);
        d2 += d * d;
    }
    return std::pow(std::max(std::sqrt(d2), grid.spacing() / 2.0), a);
}

Weight power_weight(double a, const TorusGrid& grid) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = power_weight_value(a, grid.point(i), grid);
    return Weight(grid, std::move(v));
}

bool power_weight_in_ap_range(double a, int dimension, double p) {
    return a > -dimension && a < dimension * (p - 1.0);
}

Weight product_weight(const WeightVector& weights, const ExponentVector& exponents) {
    if (weights.size() != exponents.size()) throw GridMismatch("product_weight: weight and exponent counts differ");
    const double p = exponents.combined();
    std::vector<double> v(weights.grid().size(), 1.0);
    for (std::size_t j = 0; j < weights.size(); ++j) {
        const double e = p / exponents[j];
        for (std::size_t x = 0; x < v.size(); ++x) v[x] *= std::pow(weights[j][x], e);
    }
    return Weight(weights.grid(), std::move(v));
}

std::vector<double> ap_local_constants(const Weight& w, double p, const CubeFamily& family) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidExponent("ap_constant: p must be a finite p >= 1");
    check_family(w.grid(), family);
    const auto path = path_for(family);
    const auto u = normalized(w);
    auto local = cube_means(u, family, path);
    if (p == 1.0) {
        const auto mins = cube_minima(u, family, path);
        for (std::size_t k = 0; k < local.size(); ++k) local[k] /= mins[k];
        return local;
    }
    const double dual = p / (p - 1.0);
    const auto means = cube_means(powered(u, 1.0 - dual), family, path);
    for (std::size_t k = 0; k < local.size(); ++k) local[k] *= std::pow(means[k], p - 1.0);
    return local;
}

double ap_constant(const Weight& w, double p, const CubeFamily& family) {
    const auto local = ap_local_constants(w, p, family);
    return *std::max_element(local.begin(), local.end());
}

ExponentVector scale_exponents(const ExponentVector& exponents, double r) {
    if (!(r > 0.0) || !std::isfinite(r)) throw InvalidExponent("scale_exponents: r must be > 0");
    std::vector<double> out(exponents.values().begin(), exponents.values().end());
    for (auto& v : out) v /= r;
    return ExponentVector(std::move(out));
}

MultiWeightReport multi_ap_constant(const WeightVector& weights, const ExponentVector& exponents,
                                    const CubeFamily& family, const MultiWeightOptions& options) {
    check_multi(weights, exponents, family);
    const auto u = normalized_all(weights);

    MultiWeightReport report;
    report.local = multi_local(u, exponents, family);
    report.maximizer = argmax(report.local);
    report.constant = report.local[report.maximizer];
    report.maximizer_level = family.cubes()[report.maximizer].level();
    for (double pj : exponents.values()) report.uses_inf_convention.push_back(pj == 1.0);

    const double amp = static_cast<double>(exponents.size()) * exponents.combined();
    report.product_weight_amp = amp >= 1.0 ? ap_constant(product_weight(weights, exponents), amp, family) : 0.0;

    if (options.find_openness) {
        auto constant_at = [&](double r) {
            const auto local = multi_local(u, scale_exponents(exponents, r), family);
            return *std::max_element(local.begin(), local.end());
        };
        // A_{P/r} grows with r; keep lo admissible, hi inadmissible (or the open end).
        double lo = 1.0;
        double hi = exponents.min();
        if (!(constant_at(lo) <= options.openness_cap)) {
            report.openness_r = 1.0;
        } else {
            const double near_top = hi * (1.0 - 1e-9);
            if (near_top > lo && constant_at(near_top) <= options.openness_cap) {
                report.openness_r = near_top;
            } else {
                for (int it = 0; it < 60 && hi - lo > 1e-12 * hi; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    if (constant_at(mid) <= options.openness_cap) lo = mid;
                    else hi = mid;
                }
                report.openness_r = lo;
            }
        }
    }
    return report;
}

double bmo_norm(const SampledFunction& b, const CubeFamily& family) {
    check_family(b.grid(), family);
    const auto osc = cube_oscillations(b.values(), family, path_for(family));
    return *std::max_element(osc.begin(), osc.end());
}

double bmo_norm(std::span<const SampledFunction> bs, const CubeFamily& family) {
    double best = 0.0;
    for (const auto& b : bs) best = std::max(best, bmo_norm(b, family));
    return best;
}

double lp_norm(const SampledFunction& f, double p, const Weight& w) {
    if (!(f.grid() == w.grid())) throw GridMismatch("lp_norm: function and weight grids differ");
    return lp_norm(f, p, w.values());
}

}  // namespace mulharm
