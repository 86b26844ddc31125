#pragma once

#include <span>
#include <vector>

#include "mulharm/torus_grid.hpp"

namespace mulharm {

// How a supremum over the cube family is evaluated.
//   fast   - bottom-up dyadic aggregation, O(N^n log N); dyadic families only.
//   oracle - exhaustive scan: every cube, membership tested at every point.
enum class MaximalPath { fast, oracle };

// Per-cube statistics, indexed like family.cubes(). Both paths accumulate in
// the same fixed-point scale, so they agree bit for bit.
std::vector<double> cube_means(std::span<const double> values, const CubeFamily& family, MaximalPath path);
std::vector<cplx> cube_means(std::span<const cplx> values, const CubeFamily& family, MaximalPath path);
std::vector<double> cube_minima(std::span<const double> values, const CubeFamily& family, MaximalPath path);
// (1/#Q) sum_{y in Q} |f(y) - f_Q| with the complex mean f_Q.
std::vector<double> cube_oscillations(std::span<const cplx> values, const CubeFamily& family, MaximalPath path);

// out(x) = max over cubes Q containing x of per_cube[Q].
std::vector<double> max_over_containing(std::span<const double> per_cube, const CubeFamily& family, MaximalPath path);

}  // namespace mulharm
