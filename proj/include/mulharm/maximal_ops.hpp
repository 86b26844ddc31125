#pragma once

#include <span>
#include <vector>

#include "mulharm/cube_statistics.hpp"
#include "mulharm/torus_grid.hpp"

namespace mulharm {

// Which cubes the suprema range over, how they are evaluated, and the
// exponents of the powered variants.
struct MaximalConfig {
    CubeFamily family;
    MaximalPath path = MaximalPath::fast;
    // delta_sharp: exponent of M_delta and M^sharp_delta.
    double delta = 1.0;
    // p of the multilinear M_p.
    double p = 1.0;

    explicit MaximalConfig(CubeFamily fam, MaximalPath pth = MaximalPath::fast, double dlt = 1.0, double pp = 1.0)
        : family(std::move(fam)), path(pth), delta(dlt), p(pp) {}
    void validate() const;
};

// Mf(x) = max_{Q ∋ x} (1/#Q) sum_Q |f|
SampledFunction hl_maximal(const SampledFunction& f, const MaximalConfig& cfg);
// M_delta f = M(|f|^delta)^{1/delta}
SampledFunction m_delta(const SampledFunction& f, const MaximalConfig& cfg);
// M^sharp f(x) = max_{Q ∋ x} (1/#Q) sum_Q |f - f_Q|
SampledFunction sharp_maximal(const SampledFunction& f, const MaximalConfig& cfg);
// M^sharp_delta f = M^sharp(|f|^delta)^{1/delta}
SampledFunction sharp_m_delta(const SampledFunction& f, const MaximalConfig& cfg);
// M_p(f_1..f_m)(x) = max_{Q ∋ x} prod_j ((1/#Q) sum_Q |f_j|^p)^{1/p}
SampledFunction multilinear_maximal(std::span<const SampledFunction> fs, const MaximalConfig& cfg);

}  // namespace mulharm
