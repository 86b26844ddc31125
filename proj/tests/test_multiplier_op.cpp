#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "mulharm/error.hpp"
#include "mulharm/multiplier_op.hpp"
#include "support.hpp"

using namespace mulharm;
using namespace mulharm::testing;
using nlohmann::json;

namespace {

SampledFunction mode(const TorusGrid& grid, long k) {
    return SampledFunction::from(grid, [k](const Point& x) { return std::polar(1.0, static_cast<double>(k) * x[0]); });
}

Symbol tensor_symbol(int n) {
    return builtin_symbol("tensor",
                          {{"first", {{"family", "bessel"}, {"params", {{"order", 1.0}}}}},
                           {"second", {{"family", "lowpass"}, {"params", {{"radius", 3.0}}}}}},
                          n);
}

// Reference inverse DFT (2pi)^{-n} sum_xi m(xi) e^{i xi.u}, by direct summation.
cplx inverse_dft_at(const std::vector<cplx>& m, const TorusGrid& grid, std::size_t u) {
    const auto x = grid.point(u);
    cplx s = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto k = grid.frequency(i);
        s += m[i] * std::polar(1.0, k[0] * x[0] + k[1] * x[1]);
    }
    return s * std::pow(2.0 * std::numbers::pi, -grid.dimension());
}

double band_l1(const SampledFunction& f) {
    double s = 0.0;
    const auto spec = forward_transform(f);
    for (const auto& c : spec.coefficients()) s += std::abs(c);
    return s;
}

}  // namespace

TEST_CASE("linear multipliers") {
    const TorusGrid grid(1, 32);
    std::mt19937_64 rng(1);
    const auto f = random_function(grid, rng);
    const auto one = sample_linear(linear_symbol("one", json::object(), 1), grid);
    CHECK(max_abs_diff(apply_linear(one, f), f) <= 1e-12);

    const auto proj = sample_linear(linear_symbol("indicator", {{"frequency", {3.0}}}, 1), grid);
    CHECK(max_abs_diff(apply_linear(proj, mode(grid, 3) + mode(grid, 5)), mode(grid, 3)) <= 1e-12);

    const auto d = sample_linear(linear_symbol("derivative", json::object(), 1), grid);
    const auto sine = SampledFunction::from(grid, [](const Point& x) { return cplx(std::sin(x[0])); });
    const auto cosine = SampledFunction::from(grid, [](const Point& x) { return cplx(std::cos(x[0])); });
    CHECK(max_abs_diff(apply_linear(d, sine), cosine) <= 1e-10);

    CHECK_THROWS_AS(apply_linear(one, random_function(TorusGrid(1, 16), rng)), GridMismatch);
}

TEST_CASE("constant symbol gives the pointwise product") {
    std::mt19937_64 rng(2);
    for (int n : {1, 2}) {
        const TorusGrid grid(n, n == 1 ? 64 : 16);
        const auto T = BilinearOperator::from_symbol(builtin_symbol("one", json::object(), n), grid);
        const auto f = random_band_limited(grid, static_cast<long>(grid.points_per_axis() / 4), rng);
        const auto g = random_band_limited(grid, static_cast<long>(grid.points_per_axis() / 4), rng);
        AliasingDiagnostic diag;
        const auto h = apply_bilinear_direct(T, f, g, &diag);
        CHECK(max_abs_diff(h, f * g) <= 1e-12 * std::max(1.0, (f * g).max_modulus()));
        CHECK_FALSE(diag.warning);
    }
}

TEST_CASE("single frequencies map to one lattice term") {
    const TorusGrid grid(1, 32);
    const auto m = builtin_symbol("cm_homogeneous", {{"form", "xi_eta"}}, 1);
    const auto T = BilinearOperator::from_symbol(m, grid);
    const auto h = apply_bilinear_direct(T, mode(grid, 2), mode(grid, 3));
    CHECK(max_abs_diff(h, mode(grid, 5).scaled(m.at({2, 0}, {3, 0}))) <= 1e-12);

    double worst = 0.0;
    for (long a = -7; a <= 7; ++a)
        for (long b = -7; b <= 7; ++b) {
            const auto out = apply_bilinear_direct(T, mode(grid, a), mode(grid, b));
            worst = std::max(worst, max_abs_diff(out, mode(grid, a + b).scaled(m.at({a, 0}, {b, 0}))));
        }
    CHECK(worst <= 1e-12);
}

TEST_CASE("tensor symbol composes linear multipliers") {
    std::mt19937_64 rng(3);
    for (int n : {1, 2}) {
        const TorusGrid grid(n, n == 1 ? 64 : 16);
        const auto T = BilinearOperator::from_symbol(tensor_symbol(n), grid);
        const auto m1 = sample_linear(linear_symbol("bessel", {{"order", 1.0}}, n), grid);
        const auto m2 = sample_linear(linear_symbol("lowpass", {{"radius", 3.0}}, n), grid);
        const auto f = random_band_limited(grid, static_cast<long>(grid.points_per_axis() / 4), rng);
        const auto g = random_band_limited(grid, static_cast<long>(grid.points_per_axis() / 4), rng);
        CHECK(max_abs_diff(apply_bilinear_direct(T, f, g), apply_linear(m1, f) * apply_linear(m2, g)) <= 1e-10);
    }
}

TEST_CASE("bilinearity") {
    std::mt19937_64 rng(4);
    const TorusGrid grid(1, 32);
    const auto T = BilinearOperator::from_symbol(builtin_symbol("cm_homogeneous", json::object(), 1), grid);
    for (int t = 0; t < 10; ++t) {
        const auto f = random_function(grid, rng), f2 = random_function(grid, rng), g = random_function(grid, rng);
        const cplx alpha(0.7, -1.3);
        const auto lhs = apply_bilinear_direct(T, f.scaled(alpha) + f2, g);
        const auto rhs = apply_bilinear_direct(T, f, g).scaled(alpha) + apply_bilinear_direct(T, f2, g);
        CHECK(max_abs_diff(lhs, rhs) <= 1e-12 * std::max(1.0, lhs.max_modulus()));
        const auto lhs2 = apply_bilinear_direct(T, g, f.scaled(alpha) + f2);
        const auto rhs2 = apply_bilinear_direct(T, g, f).scaled(alpha) + apply_bilinear_direct(T, g, f2);
        CHECK(max_abs_diff(lhs2, rhs2) <= 1e-12 * std::max(1.0, lhs2.max_modulus()));
    }
}

TEST_CASE("aliasing warning fires on broadband input") {
    std::mt19937_64 rng(5);
    const TorusGrid grid(1, 32);
    const auto T = BilinearOperator::from_symbol(builtin_symbol("one", json::object(), 1), grid);
    AliasingDiagnostic diag;
    apply_bilinear_direct(T, random_function(grid, rng), random_band_limited(grid, 8, rng), &diag);
    CHECK(diag.warning);
    CHECK(diag.outer_fraction_f > 0.01);
    CHECK(diag.outer_fraction_g == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("grid mismatch is rejected") {
    std::mt19937_64 rng(6);
    const auto T = BilinearOperator::from_symbol(builtin_symbol("one", json::object(), 1), TorusGrid(1, 16));
    CHECK_THROWS_AS(apply_bilinear_direct(T, random_function(TorusGrid(1, 32), rng), random_function(TorusGrid(1, 16), rng)),
                    GridMismatch);
}

TEST_CASE("fast path requires a factorization") {
    std::mt19937_64 rng(7);
    const TorusGrid grid(1, 16);
    const auto T = BilinearOperator::from_symbol(builtin_symbol("one", json::object(), 1), grid);
    CHECK_THROWS_AS(apply_bilinear_fast(T, random_function(grid, rng), random_function(grid, rng)), RejectedInput);
}

TEST_CASE("fast path on exactly separable symbols") {
    std::mt19937_64 rng(8);
    const TorusGrid grid(1, 64);
    const auto f = random_band_limited(grid, 16, rng), g = random_band_limited(grid, 16, rng);
    const auto T = BilinearOperator::from_symbol(tensor_symbol(1), grid).factorized(1e-12);
    CHECK(T.low_rank()->rank() == 1);
    CHECK(max_abs_diff(apply_bilinear_fast(T, f, g), apply_bilinear_direct(T, f, g)) <= 1e-12);

    const auto I = BilinearOperator::from_symbol(builtin_symbol("one", json::object(), 1), grid).factorized(1e-12);
    CHECK(max_abs_diff(apply_bilinear_fast(I, f, g), f * g) <= 1e-12);
}

TEST_CASE("fast path on the degree-zero symbol") {
    std::mt19937_64 rng(9);
    const TorusGrid grid(1, 64);
    const auto T = BilinearOperator::from_symbol(builtin_symbol("cm_homogeneous", json::object(), 1), grid).factorized(1e-8);
    REQUIRE(T.low_rank()->converged);
    for (int t = 0; t < 5; ++t) {
        const auto f = random_band_limited(grid, 16, rng), g = random_band_limited(grid, 16, rng);
        const double dev = max_abs_diff(apply_bilinear_fast(T, f, g), apply_bilinear_direct(T, f, g));
        CHECK(dev <= 1e-6);
        CHECK(dev <= fast_path_bound(T, f, g));
    }
}

TEST_CASE("fast path stays within its certificate for every builtin family") {
    std::mt19937_64 rng(10);
    for (std::size_t N : {32u, 64u}) {
        const TorusGrid grid(1, N);
        for (const auto& fam : builtin_symbol_families()) {
            json params = json::object();
            if (fam == "smoothed_truncation") params = {{"radius_fraction", 0.25}};
            const auto T = BilinearOperator::from_symbol(builtin_symbol(fam, params, 1, N), grid).factorized(1e-10);
            for (int t = 0; t < 20; ++t) {
                const auto f = random_band_limited(grid, static_cast<long>(N / 4), rng);
                const auto g = random_band_limited(grid, static_cast<long>(N / 4), rng);
                const double dev = max_abs_diff(apply_bilinear_fast(T, f, g), apply_bilinear_direct(T, f, g));
                // Floating-point slack on top of the certificate.
                const double slack = 1e-13 * band_l1(f) * band_l1(g);
                CHECK_MESSAGE(dev <= fast_path_bound(T, f, g) + slack, fam << " N=" << N);
            }
        }
    }
}

TEST_CASE("fast path is not slower than the oracle from N = 64") {
    std::mt19937_64 rng(11);
    for (std::size_t N : {64u, 128u, 256u}) {
        const TorusGrid grid(1, N);
        const auto T =
            BilinearOperator::from_symbol(builtin_symbol("cm_homogeneous", json::object(), 1), grid).factorized(1e-8);
        const auto f = random_band_limited(grid, static_cast<long>(N / 4), rng);
        const auto g = random_band_limited(grid, static_cast<long>(N / 4), rng);
        const double speedup = fast_path_speedup(T, f, g);
        MESSAGE("N=" << N << " rank " << T.low_rank()->rank() << ", speedup " << speedup);
        CHECK(speedup >= 1.0);
    }
}

TEST_CASE("kernel of the constant symbol is a scaled delta") {
    for (int n : {1, 2}) {
        const TorusGrid grid(n, n == 1 ? 16 : 8);
        const auto K = extract_kernel(BilinearOperator::from_symbol(builtin_symbol("one", json::object(), n), grid));
        const double peak = std::pow(grid.spacing(), -2.0 * n);
        for (std::size_t u = 0; u < grid.size(); ++u)
            for (std::size_t v = 0; v < grid.size(); ++v) {
                const double expect = (u == 0 && v == 0) ? peak : 0.0;
                CHECK(std::abs(K(u, v) - expect) <= 1e-12 * peak);
            }
    }
}

TEST_CASE("kernel of a tensor symbol separates") {
    for (int n : {1, 2}) {
        const TorusGrid grid(n, n == 1 ? 32 : 8);
        const auto K = extract_kernel(BilinearOperator::from_symbol(tensor_symbol(n), grid));
        const auto m1 = sample_linear(linear_symbol("bessel", {{"order", 1.0}}, n), grid);
        const auto m2 = sample_linear(linear_symbol("lowpass", {{"radius", 3.0}}, n), grid);
        std::vector<cplx> k1(grid.size()), k2(grid.size());
        for (std::size_t u = 0; u < grid.size(); ++u) {
            k1[u] = inverse_dft_at(m1, grid, u);
            k2[u] = inverse_dft_at(m2, grid, u);
        }
        double worst = 0.0;
        for (std::size_t u = 0; u < grid.size(); ++u)
            for (std::size_t v = 0; v < grid.size(); ++v) worst = std::max(worst, std::abs(K(u, v) - k1[u] * k2[v]));
        CHECK(worst <= 1e-10);
    }
}

TEST_CASE("kernel double sum reproduces the operator") {
    std::mt19937_64 rng(12);
    for (int n : {1, 2}) {
        const TorusGrid grid(n, n == 1 ? 32 : 8);
        const auto T = BilinearOperator::from_symbol(builtin_symbol("cm_homogeneous", json::object(), n), grid);
        const auto K = extract_kernel(T);
        const double cell2 = std::pow(grid.cell_measure(), 2.0);
        for (int t = 0; t < 5; ++t) {
            const auto f = random_band_limited(grid, static_cast<long>(grid.points_per_axis() / 4), rng);
            const auto g = random_band_limited(grid, static_cast<long>(grid.points_per_axis() / 4), rng);
            const auto h = apply_bilinear_direct(T, f, g);
            double worst = 0.0;
            for (std::size_t x = 0; x < grid.size(); ++x) {
                cplx s = 0.0;
                for (std::size_t y1 = 0; y1 < grid.size(); ++y1)
                    for (std::size_t y2 = 0; y2 < grid.size(); ++y2) s += K.at_differences(x, y1, y2) * f[y1] * g[y2];
                worst = std::max(worst, std::abs(s * cell2 - h[x]));
            }
            CHECK(worst <= 1e-8);
        }
    }
}

TEST_CASE("decay probe of the delta kernel vanishes off the diagonal cell") {
    const TorusGrid grid(1, 64);
    const auto K = extract_kernel(BilinearOperator::from_symbol(builtin_symbol("one", json::object(), 1), grid));
    const DyadicCube Q{3, {2, 0}};  // points 16..23, half cube 18..21
    const auto probe = kernel_decay_probe(K, Q, 18, 20, 2.0, 2.0);
    for (const auto& e : probe.table)
        if (std::max(e.j, e.k) >= 1) CHECK(e.value == 0.0);
    CHECK_FALSE(probe.slope.has_value());
    CHECK(probe.delta_reg == 1.0);
}

TEST_CASE("decay probe rejects bad inputs") {
    const TorusGrid grid(1, 64);
    const auto K = extract_kernel(BilinearOperator::from_symbol(builtin_symbol("one", json::object(), 1), grid));
    const DyadicCube Q{3, {2, 0}};
    CHECK_THROWS_AS(kernel_decay_probe(K, Q, 18, 20, 2.5, 2.0), InvalidExponent);
    CHECK_THROWS_AS(kernel_decay_probe(K, Q, 18, 20, 1.0, 2.0), InvalidExponent);
    CHECK_THROWS_AS(kernel_decay_probe(K, Q, 18, 18, 2.0, 2.0), RejectedInput);
    CHECK_THROWS_AS(kernel_decay_probe(K, Q, 16, 20, 2.0, 2.0), RejectedInput);
    CHECK_THROWS_AS(kernel_decay_probe(K, DyadicCube{0, {0, 0}}, 20, 40, 2.0, 2.0), RejectedInput);
}

TEST_CASE("decay probe of the smoothed degree-zero symbol") {
    std::optional<double> slopes[2];
    int idx = 0;
    for (std::size_t N : {256u, 512u}) {
        const TorusGrid grid(1, N);
        const auto m = builtin_symbol("smoothed_truncation", {{"radius_fraction", 0.25}}, 1, N);
        const auto K = extract_kernel(BilinearOperator::from_symbol(m, grid));
        const std::size_t w = N / 16;  // level-4 cube width in points
        const DyadicCube Q{4, {5, 0}};
        const std::size_t lo = 5 * w;
        const auto probe = kernel_decay_probe(K, Q, lo + w / 4 + 1, lo + w / 2, 2.0, 2.0);
        REQUIRE(probe.slope.has_value());
        MESSAGE("N=" << N << " slope " << *probe.slope << " constant " << probe.constant);
        CHECK(*probe.slope <= -2.0 + 0.5);
        slopes[idx++] = probe.slope;
    }
    CHECK(std::abs(*slopes[0] - *slopes[1]) <= 0.25);
}

TEST_CASE("doubling the probe separation scales A by about 2^(s - 2n/p)") {
    // The cutoff must sit well below Nyquist so that the kernel is smooth on
    // the scale of one or two grid steps.
    const std::size_t N = 256;
    const TorusGrid grid(1, N);
    const auto m = builtin_symbol("smoothed_truncation", {{"radius_fraction", 1.0 / 16.0}}, 1, N);
    const auto K = extract_kernel(BilinearOperator::from_symbol(m, grid));
    const DyadicCube Q{4, {5, 0}};
    const std::size_t lo = 5 * 16;
    const auto near = kernel_decay_probe(K, Q, lo + 6, lo + 7, 2.0, 2.0);
    const auto far = kernel_decay_probe(K, Q, lo + 6, lo + 8, 2.0, 2.0);
    const double predicted = std::exp2(2.0 - 2.0 / 2.0);
    for (std::size_t i = 0; i < near.table.size(); ++i) {
        if (std::max(near.table[i].j, near.table[i].k) < 2) continue;
        const double ratio = far.table[i].value / near.table[i].value;
        CHECK(ratio >= predicted / 2.0);
        CHECK(ratio <= predicted * 2.0);
    }
}

TEST_CASE("decay probe serializes") {
    const TorusGrid grid(1, 64);
    const auto K = extract_kernel(BilinearOperator::from_symbol(builtin_symbol("cm_homogeneous", json::object(), 1), grid));
    const auto probe = kernel_decay_probe(K, DyadicCube{3, {2, 0}}, 18, 20, 2.0, 2.0);
    std::ostringstream csv;
    probe.write_csv(csv);
    CHECK(csv.str().rfind("j,k,A\n", 0) == 0);
    const auto j = probe.to_json();
    CHECK(j["pairs"] == probe.table.size());
    CHECK(j["delta_reg"] == 1.0);
    CHECK(probe.table.size() == 15);  // (j, k) in {0..3}^2 minus the origin
}

TEST_CASE("commutators vanish on constants") {
    std::mt19937_64 rng(13);
    const TorusGrid grid(1, 32);
    const auto T = BilinearOperator::from_symbol(builtin_symbol("cm_homogeneous", json::object(), 1), grid);
    const auto f1 = random_band_limited(grid, 8, rng), f2 = random_band_limited(grid, 8, rng);
    const auto five = SampledFunction::constant(grid, 5.0);
    const auto b2 = random_real_function(grid, rng);
    CHECK(commutator_apply(T, five, b2, f1, f2, 1).max_modulus() <= 1e-12);
    CHECK(commutator_apply(T, five, SampledFunction::constant(grid, -2.0), f1, f2, std::nullopt).max_modulus() <= 1e-12);

    const auto I = BilinearOperator::from_symbol(builtin_symbol("one", json::object(), 1), grid);
    const auto b1 = random_real_function(grid, rng);
    CHECK(commutator_apply(I, b1, b2, f1, f2, std::nullopt).max_modulus() <= 1e-12);
}

TEST_CASE("full commutator is the sum of its components and linear in f") {
    std::mt19937_64 rng(14);
    const TorusGrid grid(1, 32);
    const auto T = BilinearOperator::from_symbol(builtin_symbol("cm_homogeneous", {{"form", "xi_eta"}}, 1), grid);
    const auto b1 = SampledFunction::from(grid, [](const Point& x) { return cplx(std::cos(x[0])); });
    const auto b2 = random_real_function(grid, rng);
    const auto f1 = random_band_limited(grid, 8, rng), f2 = random_band_limited(grid, 8, rng);
    const auto full = commutator_apply(T, b1, b2, f1, f2, std::nullopt);
    const auto parts = commutator_apply(T, b1, b2, f1, f2, 1) + commutator_apply(T, b1, b2, f1, f2, 2);
    CHECK(max_abs_diff(full, parts) <= 1e-12);

    const auto f1b = random_band_limited(grid, 8, rng);
    const auto lhs = commutator_apply(T, b1, b2, f1.scaled(2.0) + f1b, f2, std::nullopt);
    const auto rhs = full.scaled(2.0) + commutator_apply(T, b1, b2, f1b, f2, std::nullopt);
    CHECK(max_abs_diff(lhs, rhs) <= 1e-12 * std::max(1.0, lhs.max_modulus()));
    CHECK_THROWS_AS(commutator_apply(T, b1, b2, f1, f2, 3), RejectedInput);
}
