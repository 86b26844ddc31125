#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mulharm/torus_grid.hpp"

namespace mulharm {

// Strictly positive, finite samples on a grid.
class Weight {
public:
    Weight(TorusGrid grid, std::vector<double> samples);

    const TorusGrid& grid() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return samples_; }
    double operator[](std::size_t i) const noexcept { return samples_[i]; }
    std::size_t size() const noexcept { return samples_.size(); }

private:
    TorusGrid grid_;
    std::vector<double> samples_;
};

// (p_1, ..., p_m) with the harmonic combination 1/p = sum 1/p_j.
class ExponentVector {
public:
    explicit ExponentVector(std::vector<double> exponents);

    std::size_t size() const noexcept { return p_.size(); }
    double operator[](std::size_t j) const noexcept { return p_[j]; }
    std::span<const double> values() const noexcept { return p_; }
    // Recomputed on every call.
    double combined() const noexcept;
    double min() const noexcept;

private:
    std::vector<double> p_;
};

class WeightVector {
public:
    explicit WeightVector(std::vector<Weight> weights);

    std::size_t size() const noexcept { return w_.size(); }
    const Weight& operator[](std::size_t j) const noexcept { return w_[j]; }
    const TorusGrid& grid() const noexcept { return w_.front().grid(); }

private:
    std::vector<Weight> w_;
};

struct MultiWeightOptions {
    // Search for the r with A_{P/r} constant <= cap.
    bool find_openness = true;
    double openness_cap = 1e4;
};

struct MultiWeightReport {
    double constant = 0.0;
    // Index into family.cubes() attaining the supremum, and its level.
    std::size_t maximizer = 0;
    int maximizer_level = 0;
    // Local value of the A_P expression on every cube of the family.
    std::vector<double> local;
    // Largest r in [1, min p_j) with A_{P/r} constant <= cap (1 when even
    // r -> 1 exceeds it); empty when not requested.
    std::optional<double> openness_r;
    // p_j == 1 components, handled through (inf_Q w_j)^{-1}.
    std::vector<bool> uses_inf_convention;
    // A_{mp} constant of the product weight v.
    double product_weight_amp = 0.0;
};

// max(d(x, 0), h/2)^a with d the torus distance to the origin.
double power_weight_value(double a, const Point& x, const TorusGrid& grid);
Weight power_weight(double a, const TorusGrid& grid);
// Classical membership of |x|^a in A_p: -n < a < n(p - 1). Only used to
// label corpora; every discrete weight has a finite constant.
bool power_weight_in_ap_range(double a, int dimension, double p);

// v = prod_j w_j^{p/p_j}
Weight product_weight(const WeightVector& weights, const ExponentVector& exponents);

// sup_Q avg_Q(w) * avg_Q(w^{1-p'})^{p-1}; p = 1 uses (min_Q w)^{-1}.
double ap_constant(const Weight& w, double p, const CubeFamily& family);
std::vector<double> ap_local_constants(const Weight& w, double p, const CubeFamily& family);

MultiWeightReport multi_ap_constant(const WeightVector& weights, const ExponentVector& exponents,
                                    const CubeFamily& family, const MultiWeightOptions& options = {});

// P / r; rejects r <= 0.
ExponentVector scale_exponents(const ExponentVector& exponents, double r);

double bmo_norm(const SampledFunction& b, const CubeFamily& family);
// max_j ||b_j||_BMO
double bmo_norm(std::span<const SampledFunction> bs, const CubeFamily& family);

double lp_norm(const SampledFunction& f, double p, const Weight& w);

}  // namespace mulharm
