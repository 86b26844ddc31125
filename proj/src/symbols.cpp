#include "mulharm/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "mulharm/error.hpp"

namespace mulharm {
namespace {

using nlohmann::json;

bool all_zero(std::span<const double> z) {
    return std::all_of(z.begin(), z.end(), [](double v) { return v == 0.0; });
}

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// C^infinity step: 0 for t <= 0, 1 for t >= 1.
double smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / t);
    const double b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

// Nested symbol description: either "family" or {"family": ..., "params": {...}}.
std::pair<std::string, json> split_spec(const json& spec, const char* what) {
    if (spec.is_string()) return {spec.get<std::string>(), json::object()};
    if (spec.is_object() && spec.contains("family"))
        return {spec.at("family").get<std::string>(), spec.value("params", json::object())};
    throw ConfigError(std::string("symbol parameter '") + what + "' must name a family");
}

double positive_param(const json& params, const char* key, double fallback) {
    const double v = params.value(key, fallback);
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("symbol parameter '") + key + "' must be > 0");
    return v;
}

void require_dimension(int dimension) {
    if (dimension != 1 && dimension != 2) throw RejectedInput("symbols: dimension must be 1 or 2");
}

}  // namespace

Symbol::Symbol(std::string name, int variables, Rule rule, std::optional<int> declared_order, cplx origin_value)
    : name_(std::move(name)), variables_(variables), rule_(std::move(rule)), order_(declared_order),
      origin_(origin_value) {}

cplx Symbol::operator()(std::span<const double> z) const {
    if (static_cast<int>(z.size()) != variables_) throw GridMismatch("Symbol: wrong number of variables");
    if (all_zero(z)) return origin_;
    return rule_(z);
}

cplx Symbol::at(const Frequency& xi) const {
    const int n = variables_;
    std::array<double, 2> z{};
    for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i)] = static_cast<double>(xi[static_cast<std::size_t>(i)]);
    return (*this)(std::span<const double>(z.data(), static_cast<std::size_t>(n)));
}

cplx Symbol::at(const Frequency& xi, const Frequency& eta) const {
    const int n = variables_ / 2;
    std::array<double, 4> z{};
    for (int i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        z[k] = static_cast<double>(xi[k]);
        z[k + static_cast<std::size_t>(n)] = static_cast<double>(eta[k]);
    }
    return (*this)(std::span<const double>(z.data(), static_cast<std::size_t>(variables_)));
}

double anisotropic_radius(std::span<const double> z, int dimension) {
    const auto n = static_cast<std::size_t>(dimension);
    return norm2(z.subspan(0, n)) + norm2(z.subspan(n, n));
}

double smooth_cutoff(double t) { return 1.0 - smooth_step(t - 1.0); }

double lp_bump(double r) { return smooth_cutoff(r) - smooth_cutoff(2.0 * r); }

// ------------------------------------------------------------------ families

Symbol linear_symbol(const std::string& family, const json& params, int dimension) {
    require_dimension(dimension);
    const int n = dimension;
    if (family == "one") return Symbol("one", n, [](std::span<const double>) { return cplx(1.0); }, std::nullopt, 1.0);
    if (family == "lowpass") {
        const double R = positive_param(params, "radius", 4.0);
        return Symbol("lowpass", n, [R](std::span<const double> z) { return cplx(smooth_cutoff(norm2(z) / R)); },
                      std::nullopt, 1.0);
    }
    if (family == "bessel") {
        const double s = params.value("order", 1.0);
        return Symbol("bessel", n,
                      [s](std::span<const double> z) {
                          const double r = norm2(z);
                          return cplx(std::pow(1.0 + r * r, -s / 2.0));
                      },
                      std::nullopt, 1.0);
    }
    if (family == "derivative")
        return Symbol("derivative", n, [](std::span<const double> z) { return cplx(0.0, z[0]); }, std::nullopt, 0.0);
    if (family == "sign")
        return Symbol("sign", n, [](std::span<const double> z) { return cplx(sign(z[0])); }, 0, 0.0);
    if (family == "indicator") {
        const auto k = params.value("frequency", std::vector<double>{0.0});
        if (static_cast<int>(k.size()) != n) throw ConfigError("indicator: frequency needs one entry per axis");
        const bool at_origin = all_zero(k);
        return Symbol("indicator", n,
                      [k](std::span<const double> z) { return cplx(std::equal(z.begin(), z.end(), k.begin()) ? 1.0 : 0.0); },
                      0, at_origin ? 1.0 : 0.0);
    }
    if (family == "modulation") {
        const auto t = params.value("shift", std::vector<double>(static_cast<std::size_t>(n), 0.0));
        if (static_cast<int>(t.size()) != n) throw ConfigError("modulation: shift needs one entry per axis");
        return Symbol("modulation", n,
                      [t](std::span<const double> z) {
                          double ph = 0.0;
                          for (std::size_t i = 0; i < t.size(); ++i) ph += z[i] * t[i];
                          return std::polar(1.0, ph);
                      },
                      std::nullopt, 1.0);
    }
    throw ConfigError("unknown linear symbol family '" + family + "'");
}

std::vector<std::string> builtin_symbol_families() {
    return {"one", "tensor", "cm_homogeneous", "smoothed_truncation", "sign_control"};
}

Symbol builtin_symbol(const std::string& family, const json& params, int dimension,
                      std::optional<std::size_t> points_per_axis) {
    require_dimension(dimension);
    const int n = dimension;
    const auto un = static_cast<std::size_t>(n);
    const int vars = 2 * n;

    if (family == "one")
        return Symbol("one", vars, [](std::span<const double>) { return cplx(1.0); }, std::nullopt, 1.0);

    if (family == "tensor") {
        const auto [f1, p1] = split_spec(params.value("first", json("one")), "first");
        const auto [f2, p2] = split_spec(params.value("second", json("one")), "second");
        const auto m1 = linear_symbol(f1, p1, n);
        const auto m2 = linear_symbol(f2, p2, n);
        std::optional<int> order;
        if (m1.declared_order() || m2.declared_order())
            order = std::min(m1.declared_order().value_or(1 << 20), m2.declared_order().value_or(1 << 20));
        // Separable symbols keep their closed-form origin value so that
        // T_{m1 (x) m2}(f, g) = T_{m1} f * T_{m2} g holds exactly.
        return Symbol("tensor", vars,
                      [m1, m2, un](std::span<const double> z) { return m1(z.subspan(0, un)) * m2(z.subspan(un, un)); },
                      order, m1.origin_value() * m2.origin_value());
    }

    if (family == "cm_homogeneous") {
        const auto form = params.value("form", std::string("xi"));
        const auto norm = params.value("norm", std::string("euclidean"));
        if (norm != "euclidean" && norm != "l1") throw ConfigError("cm_homogeneous: norm must be euclidean or l1");
        if (form != "xi" && form != "eta" && form != "xi_eta")
            throw ConfigError("cm_homogeneous: form must be xi, eta or xi_eta");
        const bool l1 = norm == "l1";
        auto rho = [l1, un](std::span<const double> z) {
            return l1 ? norm2(z.subspan(0, un)) + norm2(z.subspan(un, un)) : norm2(z);
        };
        Symbol::Rule rule;
        if (form == "xi") rule = [rho](std::span<const double> z) { return cplx(z[0] / rho(z)); };
        else if (form == "eta") rule = [rho, un](std::span<const double> z) { return cplx(z[un] / rho(z)); };
        else rule = [rho, un](std::span<const double> z) {
            const double r = rho(z);
            return cplx(z[0] / r * (z[un] / r));
        };
        // The l1 norm has kinks on the coordinate axes, so it is only C^0.
        return Symbol("cm_homogeneous", vars, std::move(rule), l1 ? std::optional<int>(0) : std::nullopt, 0.0);
    }

    if (family == "smoothed_truncation") {
        double R = 0.0;
        if (params.contains("radius")) {
            R = positive_param(params, "radius", 1.0);
        } else {
            const double frac = positive_param(params, "radius_fraction", 0.25);
            if (!points_per_axis) throw ConfigError("smoothed_truncation: radius_fraction needs the grid size");
            R = frac * static_cast<double>(*points_per_axis);
        }
        const auto [bf, bp] = split_spec(params.value("base", json("cm_homogeneous")), "base");
        if (bf == "smoothed_truncation") throw ConfigError("smoothed_truncation: base cannot be nested");
        const auto base = builtin_symbol(bf, bp, n, points_per_axis);
        return Symbol("smoothed_truncation", vars,
                      [base, R, n](std::span<const double> z) {
                          return smooth_cutoff(anisotropic_radius(z, n) / R) * base(z);
                      },
                      base.declared_order(), smooth_cutoff(0.0) * base.origin_value());
    }

    if (family == "sign_control")
        return Symbol("sign_control", vars, [](std::span<const double> z) { return cplx(sign(z[0])); }, 0, 0.0);

    throw ConfigError("unknown symbol family '" + family + "'");
}

// ----------------------------------------------------------- sampled symbols

std::vector<cplx> sample_linear(const Symbol& m, const TorusGrid& grid) {
    if (m.variables() != grid.dimension()) throw GridMismatch("sample_linear: symbol is not linear on this grid");
    std::vector<cplx> out(grid.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = m.at(grid.frequency(k));
    return out;
}

SymbolGrid::SymbolGrid(TorusGrid grid, std::vector<cplx> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size() * grid_.size()) throw GridMismatch("SymbolGrid: expected N^{2n} entries");
    for (const auto& v : values_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw RejectedInput("SymbolGrid: non-finite entry");
}

SymbolGrid SymbolGrid::sample(const Symbol& m, const TorusGrid& grid) {
    if (m.variables() != 2 * grid.dimension()) throw GridMismatch("SymbolGrid: symbol is not bilinear on this grid");
    const std::size_t M = grid.size();
    std::vector<cplx> v(M * M);
    for (std::size_t a = 0; a < M; ++a) {
        const auto xi = grid.frequency(a);
        for (std::size_t b = 0; b < M; ++b) v[a * M + b] = m.at(xi, grid.frequency(b));
    }
    return SymbolGrid(grid, std::move(v));
}

// ------------------------------------------------------------ Hormander audit

double fd_step(double radius) { return std::max(1e-3 * radius, 1e-6); }

cplx fd_derivative(const Symbol& m, std::span<const double> z, std::span<const int> multi_index, double step) {
    const std::size_t d = z.size();
    if (multi_index.size() != d) throw GridMismatch("fd_derivative: one order per variable expected");
    std::vector<double> p(z.begin(), z.end());
    // Tensor product of one-dimensional central stencils
    // sum_l (-1)^l C(k, l) f(x + (k/2 - l) h) / h^k.
    auto recurse = [&](auto&& self, std::size_t axis) -> cplx {
        if (axis == d) return m(p);
        const int k = multi_index[axis];
        if (k == 0) return self(self, axis + 1);
        cplx acc = 0.0;
        double binom = 1.0;
        for (int l = 0; l <= k; ++l) {
            p[axis] = z[axis] + (0.5 * k - l) * step;
            acc += ((l % 2) ? -binom : binom) * self(self, axis + 1);
            binom = binom * (k - l) / (l + 1);
        }
        p[axis] = z[axis];
        return acc / std::pow(step, k);
    };
    return recurse(recurse, 0);
}

namespace {

// Points on {|xi| + |eta| = 1}.
std::vector<std::vector<double>> audit_directions(int n, int count) {
    std::vector<std::vector<double>> dirs;
    const double pi = std::numbers::pi;
    for (int k = 0; k < count; ++k) {
        if (n == 1) {
            const double th = 2.0 * pi * k / count;
            double c = std::cos(th), s = std::sin(th);
            // Snap the axis directions to exact zeros.
            if (std::abs(c) < 1e-12) c = 0.0;
            if (std::abs(s) < 1e-12) s = 0.0;
            const double r = std::abs(c) + std::abs(s);
            dirs.push_back({c / r, s / r});
        } else {
            const double phi = std::numbers::phi;
            const double a = 0.5 * pi * (k + 0.5) / count;
            const double b = 2.0 * pi * std::fmod(k * phi, 1.0);
            const double c = 2.0 * pi * std::fmod(k * phi * phi, 1.0);
            const double u = std::cos(a), v = std::sin(a);
            const double r = u + v;
            dirs.push_back({u * std::cos(b) / r, u * std::sin(b) / r, v * std::cos(c) / r, v * std::sin(c) / r});
        }
    }
    return dirs;
}

void multi_indices(int vars, int max_order, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (static_cast<int>(cur.size()) == vars) {
        out.push_back(cur);
        return;
    }
    int used = 0;
    for (int c : cur) used += c;
    for (int k = 0; k + used <= max_order; ++k) {
        cur.push_back(k);
        multi_indices(vars, max_order, cur, out);
        cur.pop_back();
    }
}

}  // namespace

bool HormanderReport::any_divergent() const {
    return std::any_of(entries.begin(), entries.end(), [](const auto& e) { return e.divergent; });
}

json HormanderReport::to_json() const {
    json pairs = json::array();
    for (const auto& e : entries)
        pairs.push_back({{"alpha", e.alpha}, {"beta", e.beta}, {"constant", e.constant},
                         {"refined_constant", e.refined}, {"divergent", e.divergent}});
    return {{"order", order},
            {"pairs", pairs},
            {"lattice",
             {{"r_min", lattice.r_min}, {"r_max", lattice.r_max}, {"radii", lattice.radii},
              {"directions", lattice.directions}, {"norm", "|xi|+|eta|"}}},
            {"step_policy", step_policy},
            {"any_divergent", any_divergent()},
            {"flags", flags}};
}

HormanderReport hormander_constants(const Symbol& m, int order, const AuditLattice& lattice) {
    const int vars = m.variables();
    const int n = vars / 2;
    if (vars % 2 != 0 || (n != 1 && n != 2)) throw RejectedInput("hormander_constants: needs a bilinear symbol");
    if (order < 0 || order > 2 * n + 2) throw RejectedInput("hormander_constants: order must lie in [0, 2n + 2]");
    if (lattice.radii < 1 || lattice.directions < 1 || !(lattice.r_min > 0.0) || !(lattice.r_max >= lattice.r_min))
        throw RejectedInput("hormander_constants: malformed audit lattice");
    // Refined step is half the policy step; both must stay well inside the radius.
    if (lattice.r_min < 10.0 * fd_step(lattice.r_min))
        throw RejectedInput("hormander_constants: audit lattice comes closer to the origin than 10 steps");

    HormanderReport report;
    report.order = order;
    report.lattice = lattice;
    report.step_policy = "central differences, step = max(1e-3 * (|xi|+|eta|), 1e-6), refined at step / 2";

    std::vector<std::vector<int>> gammas;
    std::vector<int> cur;
    multi_indices(vars, order, cur, gammas);

    const auto dirs = audit_directions(n, lattice.directions);
    std::vector<double> radii(static_cast<std::size_t>(lattice.radii));
    for (int i = 0; i < lattice.radii; ++i) {
        const double t = lattice.radii == 1 ? 0.0 : static_cast<double>(i) / (lattice.radii - 1);
        radii[static_cast<std::size_t>(i)] = lattice.r_min * std::pow(lattice.r_max / lattice.r_min, t);
    }

    std::set<std::string> flagged;
    for (const auto& g : gammas) {
        HormanderEntry e;
        e.alpha.assign(g.begin(), g.begin() + n);
        e.beta.assign(g.begin() + n, g.end());
        int total = 0;
        for (int c : g) total += c;
        for (double r : radii) {
            for (const auto& d : dirs) {
                std::vector<double> z(d.size());
                for (std::size_t i = 0; i < z.size(); ++i) z[i] = r * d[i];
                const double h = fd_step(r);
                const cplx c0 = fd_derivative(m, z, g, h);
                const cplx c1 = fd_derivative(m, z, g, h / 2.0);
                if (!std::isfinite(std::abs(c0)) || !std::isfinite(std::abs(c1))) {
                    std::ostringstream os;
                    os << "non-finite derivative at radius " << r;
                    flagged.insert(os.str());
                    continue;
                }
                const double scale = std::pow(r, total);
                e.constant = std::max(e.constant, scale * std::abs(c0));
                e.refined = std::max(e.refined, scale * std::abs(c1));
            }
        }
        // A bounded derivative gives refinement-stable sups; a jump or kink
        // makes the difference quotient scale like step^-1 or worse.
        e.divergent = e.refined > 1.5 * e.constant + 1e-6;
        report.entries.push_back(std::move(e));
    }
    report.flags.assign(flagged.begin(), flagged.end());
    return report;
}

// ------------------------------------------------------ Littlewood-Paley

namespace {

std::vector<double> lattice_radii(const TorusGrid& grid) {
    const std::size_t M = grid.size();
    const int n = grid.dimension();
    std::vector<double> norms(M);
    for (std::size_t a = 0; a < M; ++a) {
        const auto k = grid.frequency(a);
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += static_cast<double>(k[static_cast<std::size_t>(i)] * k[static_cast<std::size_t>(i)]);
        norms[a] = std::sqrt(s);
    }
    return norms;
}

}  // namespace

std::vector<int> lattice_shells(const TorusGrid& grid) {
    const auto norms = lattice_radii(grid);
    std::set<int> shells;
    for (double x : norms)
        for (double y : norms) {
            const double r = x + y;
            if (r == 0.0) continue;
            const int j0 = static_cast<int>(std::floor(std::log2(r)));
            for (int j = j0 - 1; j <= j0 + 2; ++j)
                if (lp_bump(std::ldexp(r, -j)) != 0.0) shells.insert(j);
        }
    return {shells.begin(), shells.end()};
}

std::vector<LPPiece> littlewood_paley_decompose(const Symbol& m, const TorusGrid& grid, int j_min, int j_max) {
    if (j_min > j_max) throw RejectedInput("littlewood_paley_decompose: empty j range");
    std::vector<int> missed;
    for (int j : lattice_shells(grid))
        if (j < j_min || j > j_max) missed.push_back(j);
    if (!missed.empty()) {
        std::ostringstream os;
        os << "littlewood_paley_decompose: incomplete cover, missed shells";
        for (int j : missed) os << ' ' << j;
        throw RejectedInput(os.str());
    }

    const auto full = SymbolGrid::sample(m, grid);
    const auto norms = lattice_radii(grid);
    const std::size_t M = grid.size();
    std::vector<LPPiece> pieces;
    for (int j = j_min; j <= j_max; ++j) {
        std::vector<cplx> v(M * M);
        bool nonempty = false;
        for (std::size_t a = 0; a < M; ++a)
            for (std::size_t b = 0; b < M; ++b) {
                const double r = norms[a] + norms[b];
                if (r == 0.0) continue;
                const double psi = lp_bump(std::ldexp(r, -j));
                if (psi == 0.0) continue;
                nonempty = true;
                v[a * M + b] = psi * full(a, b);
            }
        if (nonempty) pieces.push_back({j, SymbolGrid(grid, std::move(v))});
    }
    return pieces;
}

// --------------------------------------------------------- low-rank symbols

LowRankSymbol low_rank_factorize(const SymbolGrid& m, double tol) {
    if (!(tol > 0.0)) throw RejectedInput("low_rank_factorize: tol must be > 0");
    const std::size_t M = m.side();
    const std::size_t cap = std::max<std::size_t>(1, M / 2);
    std::vector<cplx> R(m.values().begin(), m.values().end());

    LowRankSymbol out{m.grid(), {}, {}, 0.0, false};
    auto pivot = [&] {
        std::size_t best = 0;
        double bv = -1.0;
        for (std::size_t i = 0; i < R.size(); ++i)
            if (std::abs(R[i]) > bv) {
                bv = std::abs(R[i]);
                best = i;
            }
        return std::pair{best, bv};
    };

    auto [p, mag] = pivot();
    while (mag > tol && out.rank() < cap) {
        const std::size_t i0 = p / M, j0 = p % M;
        const cplx piv = R[p];
        std::vector<cplx> a(M), b(M);
        for (std::size_t i = 0; i < M; ++i) a[i] = R[i * M + j0] / piv;
        for (std::size_t j = 0; j < M; ++j) b[j] = R[i0 * M + j];
        for (std::size_t i = 0; i < M; ++i)
            for (std::size_t j = 0; j < M; ++j) R[i * M + j] -= a[i] * b[j];
        out.a.push_back(std::move(a));
        out.b.push_back(std::move(b));
        std::tie(p, mag) = pivot();
    }

    // Report the residual of the factors themselves, not of the running update.
    double res = 0.0;
    for (std::size_t i = 0; i < M; ++i)
        for (std::size_t j = 0; j < M; ++j) {
            cplx s = 0.0;
            for (std::size_t r = 0; r < out.rank(); ++r) s += out.a[r][i] * out.b[r][j];
            res = std::max(res, std::abs(m(i, j) - s));
        }
    out.residual = res;
    out.converged = res <= tol;
    return out;
}

}  // namespace mulharm
