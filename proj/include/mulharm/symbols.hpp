#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mulharm/torus_grid.hpp"

namespace mulharm {

/**
 * Closed-form multiplier on R^d (d = n for linear symbols, d = 2n for
 * bilinear ones, with coordinates ordered (xi, eta)).
 *
 * The rule is never called at the origin: the symbol answers with its
 * origin value there, which is 0 for families that are undefined at 0.
 */
class Symbol {
public:
    using Rule = std::function<cplx(std::span<const double>)>;

    Symbol(std::string name, int variables, Rule rule, std::optional<int> declared_order, cplx origin_value = 0.0);

    cplx operator()(std::span<const double> z) const;
    cplx at(const Frequency& xi) const;                            // linear symbols
    cplx at(const Frequency& xi, const Frequency& eta) const;      // bilinear symbols

    const std::string& name() const noexcept { return name_; }
    // Number of real variables the rule takes (n or 2n).
    int variables() const noexcept { return variables_; }
    // Smoothness order the family guarantees; empty means C^infinity away from 0.
    std::optional<int> declared_order() const noexcept { return order_; }
    cplx origin_value() const noexcept { return origin_; }

private:
    std::string name_;
    int variables_;
    Rule rule_;
    std::optional<int> order_;
    cplx origin_;
};

// Linear families: one, lowpass{radius}, bessel{order}, derivative,
// sign, indicator{frequency}, modulation{shift}.
Symbol linear_symbol(const std::string& family, const nlohmann::json& params, int dimension);

// Bilinear families: one, tensor{first, second}, cm_homogeneous{form, norm},
// smoothed_truncation{radius | radius_fraction, base}, sign_control.
// radius_fraction needs the grid size N.
Symbol builtin_symbol(const std::string& family, const nlohmann::json& params, int dimension,
                      std::optional<std::size_t> points_per_axis = std::nullopt);
std::vector<std::string> builtin_symbol_families();

// |xi| + |eta| for a point z = (xi, eta) of R^{2n}.
double anisotropic_radius(std::span<const double> z, int dimension);

// ----------------------------------------------------------- sampled symbols

// Linear symbol on the frequency lattice, in FFT slot order.
std::vector<cplx> sample_linear(const Symbol& m, const TorusGrid& grid);

// m(xi, eta) on the product lattice; entry (a, b) = m(freq(a), freq(b)) for
// flat spectral indices a, b, stored at a * N^n + b.
class SymbolGrid {
public:
    SymbolGrid(TorusGrid grid, std::vector<cplx> values);
    static SymbolGrid sample(const Symbol& m, const TorusGrid& grid);

    const TorusGrid& grid() const noexcept { return grid_; }
    std::span<const cplx> values() const noexcept { return values_; }
    const cplx& operator()(std::size_t xi, std::size_t eta) const noexcept { return values_[xi * grid_.size() + eta]; }
    std::size_t side() const noexcept { return grid_.size(); }

private:
    TorusGrid grid_;
    std::vector<cplx> values_;
};

// ------------------------------------------------------------ Hormander audit

struct AuditLattice {
    double r_min = 1.0 / 64.0;
    double r_max = 1024.0;
    int radii = 24;
    int directions = 16;
};

struct HormanderEntry {
    std::vector<int> alpha;
    std::vector<int> beta;
    // sup (|xi|+|eta|)^{|a|+|b|} |d^a_xi d^b_eta m| at the policy step and at half of it.
    double constant = 0.0;
    double refined = 0.0;
    bool divergent = false;
};

struct HormanderReport {
    int order = 0;
    std::vector<HormanderEntry> entries;
    AuditLattice lattice;
    std::string step_policy;
    // Evaluation failures (non-finite values near the origin); not fatal.
    std::vector<std::string> flags;

    bool any_divergent() const;
    nlohmann::json to_json() const;
};

double fd_step(double radius);
// Iterated central differences; multi_index has one entry per variable.
cplx fd_derivative(const Symbol& m, std::span<const double> z, std::span<const int> multi_index, double step);

HormanderReport hormander_constants(const Symbol& m, int order, const AuditLattice& lattice = {});

// ------------------------------------------------------ Littlewood-Paley

// chi = 1 on [0, 1], 0 on [2, inf), C^infinity in between.
double smooth_cutoff(double t);
// Psi(r) = chi(r) - chi(2r), supported in [1/2, 2]; sum_j Psi(2^-j r) = 1 for r > 0.
double lp_bump(double r);

struct LPPiece {
    int j = 0;
    SymbolGrid piece;
};

// Nonempty pieces m_j = Psi(2^-j .) m on the lattice for j in [j_min, j_max].
// Throws RejectedInput naming the missed shells when the range does not cover
// every lattice point off the origin.
std::vector<LPPiece> littlewood_paley_decompose(const Symbol& m, const TorusGrid& grid, int j_min, int j_max);
// Shells j whose bump touches some nonzero lattice point.
std::vector<int> lattice_shells(const TorusGrid& grid);

// --------------------------------------------------------- low-rank symbols

struct LowRankSymbol {
    TorusGrid grid;
    // a[r] indexed by xi slot, b[r] by eta slot.
    std::vector<std::vector<cplx>> a;
    std::vector<std::vector<cplx>> b;
    // max |m - sum_r a_r b_r| over the lattice.
    double residual = 0.0;
    bool converged = false;

    std::size_t rank() const noexcept { return a.size(); }
};

// Fully pivoted cross approximation, rank grown until the max-norm residual
// is <= tol or the rank reaches N^n / 2.
LowRankSymbol low_rank_factorize(const SymbolGrid& m, double tol);

}  // namespace mulharm
