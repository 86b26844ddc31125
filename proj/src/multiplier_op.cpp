#include "mulharm/multiplier_op.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>

#include "mulharm/detail/cmul.hpp"
#include "mulharm/error.hpp"
#include "mulharm/fft.hpp"

namespace mulharm {
namespace {

using detail::cmul;

void same_grid(const TorusGrid& a, const TorusGrid& b, const char* what) {
    if (!(a == b)) throw GridMismatch(std::string(what) + ": inputs live on different grids");
}

std::vector<cplx> spectrum_of(const SampledFunction& f) {
    const auto s = forward_transform(f);
    return {s.coefficients().begin(), s.coefficients().end()};
}

SampledFunction from_spectrum(const TorusGrid& grid, std::vector<cplx> coeffs) {
    return inverse_transform(SpectrumFunction(grid, std::move(coeffs)));
}

double l1(std::span<const cplx> v) {
    double s = 0.0;
    for (const auto& z : v) s += std::abs(z);
    return s;
}

double torus_distance(const TorusGrid& grid, std::size_t a, std::size_t b) {
    const auto pa = grid.point(a), pb = grid.point(b);
    double d2 = 0.0;
    for (int ax = 0; ax < grid.dimension(); ++ax) {
        const auto u = static_cast<std::size_t>(ax);
        const double t = std::fmod(std::abs(pa[u] - pb[u]), kPeriod);
        const double d = std::min(t, kPeriod - t);
        d2 += d * d;
    }
    return std::sqrt(d2);
}

SampledFunction mean_free(const SampledFunction& b) {
    cplx sum = 0.0;
    for (const auto& v : b.values()) sum += v;
    return b.shifted(-sum / static_cast<double>(b.size()));
}

}  // namespace

BilinearOperator::BilinearOperator(SymbolGrid symbol) : symbol_(std::move(symbol)) {}

BilinearOperator::BilinearOperator(SymbolGrid symbol, LowRankSymbol factors)
    : symbol_(std::move(symbol)), factors_(std::move(factors)) {
    if (!(factors_->grid == symbol_.grid())) throw GridMismatch("BilinearOperator: factorization grid differs");
}

BilinearOperator BilinearOperator::from_symbol(const Symbol& m, const TorusGrid& grid) {
    return BilinearOperator(SymbolGrid::sample(m, grid));
}

BilinearOperator BilinearOperator::factorized(double tol) const {
    return BilinearOperator(symbol_, low_rank_factorize(symbol_, tol));
}

double outer_spectral_fraction(const SampledFunction& f) {
    const auto& grid = f.grid();
    const auto c = spectrum_of(f);
    const long band = static_cast<long>(grid.points_per_axis() / 4);
    double total = 0.0, outer = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const auto k = grid.frequency(i);
        const double w = std::norm(c[i]);
        total += w;
        if (std::abs(k[0]) > band || std::abs(k[1]) > band) outer += w;
    }
    return total == 0.0 ? 0.0 : outer / total;
}

SampledFunction apply_linear(std::span<const cplx> m1, const SampledFunction& f) {
    if (m1.size() != f.size()) throw GridMismatch("apply_linear: symbol does not cover the frequency lattice");
    auto c = spectrum_of(f);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = cmul(c[i], m1[i]);
    return from_spectrum(f.grid(), std::move(c));
}

SampledFunction apply_bilinear_direct(const BilinearOperator& T, const SampledFunction& f, const SampledFunction& g,
                                      AliasingDiagnostic* diagnostic) {
    const auto& grid = T.grid();
    same_grid(grid, f.grid(), "apply_bilinear_direct");
    same_grid(grid, g.grid(), "apply_bilinear_direct");
    if (diagnostic) {
        diagnostic->outer_fraction_f = outer_spectral_fraction(f);
        diagnostic->outer_fraction_g = outer_spectral_fraction(g);
        diagnostic->warning = diagnostic->outer_fraction_f > 0.01 || diagnostic->outer_fraction_g > 0.01;
    }
    const auto fh = spectrum_of(f);
    const auto gh = spectrum_of(g);
    const std::size_t N = grid.points_per_axis(), M = grid.size(), mask = N - 1;
    const auto& m = T.symbol();
    std::vector<cplx> h(M);
    if (grid.dimension() == 1) {
        for (std::size_t k = 0; k < N; ++k) {
            cplx acc = 0.0;
            for (std::size_t xi = 0; xi < N; ++xi) {
                const std::size_t eta = (k - xi) & mask;
                acc += cmul(cmul(m(xi, eta), fh[xi]), gh[eta]);
            }
            h[k] = acc;
        }
    } else {
        for (std::size_t k0 = 0; k0 < N; ++k0)
            for (std::size_t k1 = 0; k1 < N; ++k1) {
                cplx acc = 0.0;
                for (std::size_t a0 = 0; a0 < N; ++a0)
                    for (std::size_t a1 = 0; a1 < N; ++a1) {
                        const std::size_t xi = a0 * N + a1;
                        const std::size_t eta = ((k0 - a0) & mask) * N + ((k1 - a1) & mask);
                        acc += cmul(cmul(m(xi, eta), fh[xi]), gh[eta]);
                    }
                h[k0 * N + k1] = acc;
            }
    }
    return from_spectrum(grid, std::move(h));
}

SampledFunction apply_bilinear_fast(const BilinearOperator& T, const SampledFunction& f, const SampledFunction& g) {
    if (!T.low_rank()) throw RejectedInput("apply_bilinear_fast: operator has no factorization; call factorized(tol) first");
    const auto& grid = T.grid();
    same_grid(grid, f.grid(), "apply_bilinear_fast");
    same_grid(grid, g.grid(), "apply_bilinear_fast");
    const auto& lr = *T.low_rank();
    const auto fh = spectrum_of(f);
    const auto gh = spectrum_of(g);
    const std::size_t M = grid.size();
    std::vector<int> shape(static_cast<std::size_t>(grid.dimension()), static_cast<int>(grid.points_per_axis()));

    // All rank-one factors go through two batched transforms.
    const std::size_t R = lr.rank();
    if (R == 0) return SampledFunction::zeros(grid);
    fft::AlignedBuffer u(R * M), v(R * M);
    for (std::size_t r = 0; r < R; ++r) {
        const auto* a = lr.a[r].data();
        const auto* b = lr.b[r].data();
        for (std::size_t i = 0; i < M; ++i) {
            u[r * M + i] = cmul(a[i], fh[i]);
            v[r * M + i] = cmul(b[i], gh[i]);
        }
    }
    fft::transform_batch(u.span(), shape, R, fft::Direction::backward);
    fft::transform_batch(v.span(), shape, R, fft::Direction::backward);
    std::vector<cplx> out(M, 0.0);
    for (std::size_t r = 0; r < R; ++r)
        for (std::size_t i = 0; i < M; ++i) out[i] += cmul(u[r * M + i], v[r * M + i]);
    return SampledFunction(grid, std::move(out));
}

SampledFunction apply_bilinear(const BilinearOperator& T, const SampledFunction& f, const SampledFunction& g,
                               ApplyPath path) {
    return path == ApplyPath::fast ? apply_bilinear_fast(T, f, g) : apply_bilinear_direct(T, f, g);
}

double fast_path_bound(const BilinearOperator& T, const SampledFunction& f, const SampledFunction& g) {
    if (!T.low_rank()) throw RejectedInput("fast_path_bound: operator has no factorization");
    const auto& lr = *T.low_rank();
    return static_cast<double>(lr.rank()) * lr.residual * l1(spectrum_of(f)) * l1(spectrum_of(g));
}

double fast_path_speedup(const BilinearOperator& T, const SampledFunction& f, const SampledFunction& g, int repeats) {
    using clock = std::chrono::steady_clock;
    auto time = [&](auto&& fn) {
        fn();  // warm the plan cache
        const auto t0 = clock::now();
        for (int i = 0; i < repeats; ++i) fn();
        return std::chrono::duration<double>(clock::now() - t0).count();
    };
    const double direct = time([&] { (void)apply_bilinear_direct(T, f, g); });
    const double fast = time([&] { (void)apply_bilinear_fast(T, f, g); });
    return direct / fast;
}

// ----------------------------------------------------------------- kernel

KernelGrid::KernelGrid(TorusGrid grid, std::vector<cplx> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size() * grid_.size()) throw GridMismatch("KernelGrid: expected N^{2n} entries");
}

std::size_t difference_index(const TorusGrid& grid, std::size_t x, std::size_t y) noexcept {
    const std::size_t mask = grid.points_per_axis() - 1;
    if (grid.dimension() == 1) return (x - y) & mask;
    const auto a = grid.unflatten(x), b = grid.unflatten(y);
    return grid.flatten({(a[0] - b[0]) & mask, (a[1] - b[1]) & mask});
}

const cplx& KernelGrid::at_differences(std::size_t x, std::size_t y1, std::size_t y2) const noexcept {
    return (*this)(difference_index(grid_, x, y1), difference_index(grid_, x, y2));
}

KernelGrid extract_kernel(const BilinearOperator& T) {
    const auto& grid = T.grid();
    std::vector<cplx> v(T.symbol().values().begin(), T.symbol().values().end());
    std::vector<int> shape(static_cast<std::size_t>(2 * grid.dimension()), static_cast<int>(grid.points_per_axis()));
    fft::transform(v, shape, fft::Direction::backward);
    const double scale = std::pow(2.0 * std::numbers::pi, -2.0 * grid.dimension());
    for (auto& z : v) z *= scale;
    return KernelGrid(grid, std::move(v));
}

// ------------------------------------------------------------ decay probe

nlohmann::json DecayProbe::to_json() const {
    nlohmann::json j = {{"cube", {{"level", cube.level}, {"offset", {cube.offset[0], cube.offset[1]}}}},
                        {"x", x},
                        {"x_bar", x_bar},
                        {"separation", separation},
                        {"p", p},
                        {"p_dual", p_dual},
                        {"s", s},
                        {"delta_reg", delta_reg},
                        {"constant", constant},
                        {"pairs", table.size()}};
    j["slope"] = slope ? nlohmann::json(*slope) : nlohmann::json(nullptr);
    j["intercept"] = intercept ? nlohmann::json(*intercept) : nlohmann::json(nullptr);
    return j;
}

void DecayProbe::write_csv(std::ostream& out) const {
    out << "j,k,A\n";
    out.precision(17);
    for (const auto& e : table) out << e.j << ',' << e.k << ',' << e.value << '\n';
}

DecayProbe kernel_decay_probe(const KernelGrid& K, const DyadicCube& id, std::size_t x, std::size_t x_bar, double p,
                              double s, std::optional<int> j_max) {
    const auto& grid = K.grid();
    const int n = grid.dimension();
    if (!(s > 0.0)) throw InvalidExponent("kernel_decay_probe: s must be > 0");
    if (!(p <= 2.0 && p > 2.0 * n / s)) throw InvalidExponent("kernel_decay_probe: need 2n/s < p <= 2");
    if (x >= grid.size() || x_bar >= grid.size()) throw RejectedInput("kernel_decay_probe: probe point off the grid");
    if (x == x_bar) throw RejectedInput("kernel_decay_probe: x and x_bar must differ");

    const Cube Q = Cube::dyadic(grid, id);
    const Cube half = Q.halved();
    if (!half.contains(x) || !half.contains(x_bar)) throw RejectedInput("kernel_decay_probe: probe points must lie in Q/2");

    // 2^j Q fits the torus exactly for j <= level.
    int top = id.level;
    if (j_max) top = std::min(top, *j_max);
    if (top < 1) throw RejectedInput("kernel_decay_probe: no admissible annulus pair (cube too large)");

    // Annulus index of every point, -1 outside 2^top Q.
    std::vector<int> ring(grid.size(), -1);
    for (int j = top; j >= 0; --j) {
        const Cube D = Q.dilated(static_cast<unsigned>(j));
        for (auto y : D.points()) ring[y] = j;
    }

    const double pd = p / (p - 1.0);
    const auto T = static_cast<std::size_t>(top + 1);
    std::vector<double> sums(T * T, 0.0);
    for (std::size_t y1 = 0; y1 < grid.size(); ++y1) {
        if (ring[y1] < 0) continue;
        const auto dx1 = difference_index(grid, x, y1), db1 = difference_index(grid, x_bar, y1);
        for (std::size_t y2 = 0; y2 < grid.size(); ++y2) {
            if (ring[y2] < 0) continue;
            const double d = std::abs(K(dx1, difference_index(grid, x, y2)) - K(db1, difference_index(grid, x_bar, y2)));
            sums[static_cast<std::size_t>(ring[y2]) * T + static_cast<std::size_t>(ring[y1])] += std::pow(d, pd);
        }
    }

    DecayProbe probe;
    probe.cube = id;
    probe.x = x;
    probe.x_bar = x_bar;
    probe.separation = torus_distance(grid, x, x_bar);
    probe.p = p;
    probe.p_dual = pd;
    probe.s = s;
    probe.delta_reg = s / 2.0;

    const double cell = std::pow(grid.cell_measure(), 2.0);
    const double qs = std::pow(Q.measure(), s / n) / std::pow(probe.separation, s - 2.0 * n / p);
    std::vector<double> xs, ys;
    for (int j = 0; j <= top; ++j)
        for (int k = 0; k <= top; ++k) {
            if (j == 0 && k == 0) continue;
            const double A = std::pow(sums[static_cast<std::size_t>(j) * T + static_cast<std::size_t>(k)] * cell, 1.0 / pd);
            probe.table.push_back({j, k, A});
            const int mx = std::max(j, k);
            probe.constant = std::max(probe.constant, A * qs * std::exp2(s * mx));
            if (mx >= 2 && A > 0.0) {
                xs.push_back(mx);
                ys.push_back(std::log2(A));
            }
        }

    const bool spread = !xs.empty() && *std::min_element(xs.begin(), xs.end()) < *std::max_element(xs.begin(), xs.end());
    if (spread) {
        const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
        const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxy += (xs[i] - mx) * (ys[i] - my);
            sxx += (xs[i] - mx) * (xs[i] - mx);
        }
        probe.slope = sxy / sxx;
        probe.intercept = my - *probe.slope * mx;
    }
    return probe;
}

// -------------------------------------------------------------- commutator

SampledFunction commutator_apply(const BilinearOperator& T, const SampledFunction& b1, const SampledFunction& b2,
                                 const SampledFunction& f1, const SampledFunction& f2, std::optional<int> which,
                                 ApplyPath path) {
    const auto& grid = T.grid();
    for (const auto* u : {&b1, &b2, &f1, &f2}) same_grid(grid, u->grid(), "commutator_apply");
    if (which && *which != 1 && *which != 2) throw RejectedInput("commutator_apply: component must be 1 or 2");

    const auto Tf = apply_bilinear(T, f1, f2, path);
    auto term = [&](int j) {
        if (j == 1) {
            const auto c = mean_free(b1);
            return c * Tf - apply_bilinear(T, c * f1, f2, path);
        }
        const auto c = mean_free(b2);
        return c * Tf - apply_bilinear(T, f1, c * f2, path);
    };
    if (which) return term(*which);
    return term(1) + term(2);
}

}  // namespace mulharm
