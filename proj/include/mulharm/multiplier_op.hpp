#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include <json.hpp>

#include "mulharm/symbols.hpp"
#include "mulharm/torus_grid.hpp"

namespace mulharm {

// T_m on a grid: the sampled symbol plus an optional factorization for the
// fast path.
class BilinearOperator {
public:
    explicit BilinearOperator(SymbolGrid symbol);
    BilinearOperator(SymbolGrid symbol, LowRankSymbol factors);
    static BilinearOperator from_symbol(const Symbol& m, const TorusGrid& grid);

    // Copy carrying a factorization at the given residual tolerance.
    BilinearOperator factorized(double tol) const;

    const TorusGrid& grid() const noexcept { return symbol_.grid(); }
    const SymbolGrid& symbol() const noexcept { return symbol_; }
    const std::optional<LowRankSymbol>& low_rank() const noexcept { return factors_; }

private:
    SymbolGrid symbol_;
    std::optional<LowRankSymbol> factors_;
};

enum class ApplyPath { direct, fast };

struct AliasingDiagnostic {
    // Share of sum |f^|^2 outside max-norm |xi| <= N/4, per input.
    double outer_fraction_f = 0.0;
    double outer_fraction_g = 0.0;
    bool warning = false;  // either share above 1%
};

double outer_spectral_fraction(const SampledFunction& f);

// g^ = m1 f^ with m1 given in FFT slot order.
SampledFunction apply_linear(std::span<const cplx> m1, const SampledFunction& f);

// Oracle: h^(k) = sum_xi m(xi, k - xi) f^(xi) g^(k - xi), indices wrapped.
SampledFunction apply_bilinear_direct(const BilinearOperator& T, const SampledFunction& f, const SampledFunction& g,
                                      AliasingDiagnostic* diagnostic = nullptr);
// sum_r (T_{a_r} f)(T_{b_r} g); needs a factorized operator.
SampledFunction apply_bilinear_fast(const BilinearOperator& T, const SampledFunction& f, const SampledFunction& g);
SampledFunction apply_bilinear(const BilinearOperator& T, const SampledFunction& f, const SampledFunction& g,
                               ApplyPath path);

// R * residual * ||f^||_1 * ||g^||_1
double fast_path_bound(const BilinearOperator& T, const SampledFunction& f, const SampledFunction& g);
// Wall-clock ratio direct / fast over a few repetitions.
double fast_path_speedup(const BilinearOperator& T, const SampledFunction& f, const SampledFunction& g,
                         int repeats = 20);

// K(u, v) = (2pi)^{-2n} sum_{xi, eta} m(xi, eta) e^{i(xi.u + eta.v)} at grid
// points u, v, so that T(f, g)(x) = sum_{y1, y2} K(x - y1, x - y2) f(y1) g(y2) h^{2n}.
class KernelGrid {
public:
    KernelGrid(TorusGrid grid, std::vector<cplx> values);

    const TorusGrid& grid() const noexcept { return grid_; }
    std::span<const cplx> values() const noexcept { return values_; }
    const cplx& operator()(std::size_t u, std::size_t v) const noexcept { return values_[u * grid_.size() + v]; }
    // K(x - y1, x - y2) for flat point indices.
    const cplx& at_differences(std::size_t x, std::size_t y1, std::size_t y2) const noexcept;

private:
    TorusGrid grid_;
    std::vector<cplx> values_;
};

KernelGrid extract_kernel(const BilinearOperator& T);

// Flat index of x - y on the grid.
std::size_t difference_index(const TorusGrid& grid, std::size_t x, std::size_t y) noexcept;

struct DecayEntry {
    int j = 0;
    int k = 0;
    double value = 0.0;  // A_{j,k}
};

struct DecayProbe {
    DyadicCube cube;
    std::size_t x = 0;
    std::size_t x_bar = 0;
    double separation = 0.0;  // |x - x_bar| on the torus
    double p = 2.0;
    double p_dual = 2.0;
    double s = 2.0;
    // Regularity exponent of the kernel condition implied by s; kept apart
    // from the sharp-maximal exponent.
    double delta_reg = 1.0;
    std::vector<DecayEntry> table;
    // Least-squares fit of log2 A_{j,k} on max{j, k} over max{j, k} >= 2 and
    // A_{j,k} > 0; empty when fewer than two usable levels.
    std::optional<double> slope;
    std::optional<double> intercept;
    // max A_{j,k} |Q|^{s/n} 2^{s max{j,k}} / |x - x_bar|^{s - 2n/p}
    double constant = 0.0;

    nlohmann::json to_json() const;
    void write_csv(std::ostream& out) const;
};

// A_{j,k} = (sum_{y1 in S_k(Q)} sum_{y2 in S_j(Q)} |K(x-y1, x-y2) - K(xb-y1, xb-y2)|^{p'} h^{2n})^{1/p'}
// over every (j, k) != (0, 0) whose dilates fit the torus, capped at j_max.
DecayProbe kernel_decay_probe(const KernelGrid& K, const DyadicCube& cube, std::size_t x, std::size_t x_bar, double p,
                              double s, std::optional<int> j_max = std::nullopt);

// b_1 T(f_1, f_2) - T(b_1 f_1, f_2) for which == 1, the analogue for 2, and
// their sum when which is empty. The torus mean of each b_j is removed
// first, which leaves the commutator unchanged and makes constants vanish exactly.
SampledFunction commutator_apply(const BilinearOperator& T, const SampledFunction& b1, const SampledFunction& b2,
                                 const SampledFunction& f1, const SampledFunction& f2, std::optional<int> which,
                                 ApplyPath path = ApplyPath::direct);

}  // namespace mulharm
