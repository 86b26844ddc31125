#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mulharm/corpus.hpp"
#include "mulharm/maximal_ops.hpp"
#include "mulharm/multiplier_op.hpp"
#include "mulharm/weights.hpp"

namespace mulharm {

inline constexpr const char* kReportSchemaVersion = "1.0";

struct Tolerances {
    // Bounded constant: C(2N) <= factor * C(N) on the top resolution pair.
    double stability_factor = 1.5;
    // Ratios skip denominators below floor * numerator scale.
    double denominator_floor = 1e-10;
    // Decay probe: slope <= -s + slope_slack, |slope(2N) - slope(N)| <= slope_drift.
    double slope_slack = 0.5;
    double slope_drift = 0.25;
};

/**
 * One validated experiment. Defaults follow n = 1, s = 2, r0 = 2n/s,
 * P = (4, 4), p0 = alpha r0 with alpha = (1 + min p_j / r0) / 2,
 * delta = 1/4, epsilon = 3/8, q0 = 1.25 p0.
 */
struct ExperimentConfig {
    std::string experiment;  // E1..E7
    std::uint64_t seed = 0;
    int n = 1;
    std::size_t N = 64;
    int resolutions = 3;

    std::string symbol_family = "cm_homogeneous";
    nlohmann::json symbol_params = nlohmann::json::object();
    int s = 2;

    std::vector<double> P{4.0, 4.0};
    double p0 = 0.0;
    double q0 = 0.0;
    double delta_sharp = 0.25;
    double epsilon = 0.375;
    double p = 2.0;  // E1 weighted L^p exponent

    // Power-weight exponents a (w_j = |x|^a for every j).
    std::vector<double> weight_exponents;
    CorpusSpec corpus;

    // E5 multipliers b_1, b_2: "half_indicator", "cosine", "zero" or a number.
    nlohmann::json commutator_b = nlohmann::json::array({"half_indicator", "zero"});

    // E6 probe.
    int probe_level = 4;
    double probe_p = 1.5;

    // E7: expected audit outcome; empty = derived from the declared order.
    std::optional<bool> expect_divergent;

    Tolerances tol;

    // Reads and validates; throws ConfigError on any violated constraint.
    static ExperimentConfig from_json(const nlohmann::json& j);
    // Normalized form with every default filled in (hashed into reports).
    nlohmann::json to_json() const;
    void validate() const;

    double r0() const { return 2.0 * n / s; }
    double combined_p() const;
    std::vector<std::size_t> sweep() const;
    long band() const { return corpus.band.value_or(static_cast<long>(N / 4)); }
};

struct InstanceRatio {
    std::string id;
    double ratio = 0.0;
};

struct Exclusion {
    std::string id;
    std::string reason;
};

struct EmpiricalSummary {
    double sup = 0.0;
    double median = 0.0;
    std::string maximizer;
    std::size_t count = 0;
};

// Throws RejectedInput on an empty list.
EmpiricalSummary empirical_constant(std::span<const InstanceRatio> ratios);

struct ResolutionResult {
    std::size_t N = 0;
    std::string family;  // e.g. weight label; empty for single-family experiments
    std::vector<InstanceRatio> ratios;
    std::vector<Exclusion> exclusions;
    EmpiricalSummary summary;
    std::optional<double> slope;
    nlohmann::json extra = nlohmann::json::object();
};

struct Criterion {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ExperimentReport {
    std::string experiment;
    std::string config_hash;
    std::uint64_t seed = 0;
    nlohmann::json config;
    std::vector<ResolutionResult> results;
    std::vector<Criterion> criteria;
    std::vector<std::string> notes;
    nlohmann::json replay;
    // Plot-ready CSV tables by file name.
    std::map<std::string, std::string> tables;

    bool pass() const;
    // Results of one family in sweep order.
    std::vector<const ResolutionResult*> family(const std::string& name) const;
    nlohmann::json to_json() const;
};

ExperimentReport run_experiment(const ExperimentConfig& cfg);

// SHA-256 of the canonical JSON text, lowercase hex.
std::string config_hash(const nlohmann::json& normalized);

// ---------------------------------------------------------------- ratios
// Instance-level quantities, exposed for testing. Each returns the pair
// (numerator, denominator) before flooring.

struct RatioParts {
    double numerator = 0.0;
    double denominator = 0.0;
};

// ||M_delta f||_{L^p(w)} over ||M^sharp_delta f||_{L^p(w)}
RatioParts fefferman_stein_parts(const SampledFunction& f, const Weight& w, double p, double delta,
                                 const CubeFamily& family);
// ||M_{p0}(f)||_{L^p(v)} over prod_j ||f_j||_{L^{p_j}(w_j)}
RatioParts maximal_weight_parts(std::span<const SampledFunction> fs, const WeightVector& ws, const ExponentVector& P,
                                double p0, const CubeFamily& family);
// ||T(f)||_{L^p(v)} over prod_j ||f_j||_{L^{p_j}(w_j)}
RatioParts operator_weight_parts(const BilinearOperator& T, std::span<const SampledFunction> fs,
                                 const WeightVector& ws, const ExponentVector& P);
// ||T_b(f)||_{L^p(v)} over prod_j ||f_j||_{L^{p_j}(w_j)}
RatioParts commutator_weight_parts(const BilinearOperator& T, std::span<const SampledFunction> bs,
                                   std::span<const SampledFunction> fs, const WeightVector& ws,
                                   const ExponentVector& P);

struct PointwiseRatio {
    double sup = 0.0;
    std::size_t excluded_points = 0;
    bool all_excluded = false;
};
// sup_x M^sharp_delta(T f)(x) / M_{p0}(f)(x), skipping points whose
// denominator is below floor * max_x numerator.
PointwiseRatio sharp_pointwise_ratio(const BilinearOperator& T, std::span<const SampledFunction> fs, double delta,
                                     double p0, const CubeFamily& family, double floor);

// Commutator multiplier by name ("half_indicator", "cosine", "zero") or constant value.
SampledFunction commutator_multiplier(const TorusGrid& grid, const nlohmann::json& spec, long band);

}  // namespace mulharm
