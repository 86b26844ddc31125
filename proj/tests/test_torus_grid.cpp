#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "mulharm/csv_io.hpp"
#include "mulharm/error.hpp"
#include "mulharm/torus_grid.hpp"
#include "support.hpp"

using namespace mulharm;
using mulharm::testing::max_abs_diff;
using mulharm::testing::random_function;
using mulharm::testing::relative_diff;

TEST_CASE("grid construction validates dimension and size") {
    CHECK_THROWS_AS(TorusGrid(1, 12), RejectedInput);
    CHECK_THROWS_AS(TorusGrid(1, 4), RejectedInput);
    CHECK_THROWS_AS(TorusGrid(3, 16), RejectedInput);
    const TorusGrid g(2, 16);
    CHECK(g.size() == 256);
    CHECK(g.max_level() == 4);
    CHECK(g.spacing() == doctest::Approx(2 * std::numbers::pi / 16));
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(g.flatten(g.unflatten(i)) == i);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(g.flat_of_frequency(g.frequency(i)) == i);
}

TEST_CASE("sampled functions reject non-finite samples") {
    const TorusGrid g(1, 8);
    std::vector<cplx> v(8, 1.0);
    v[3] = {std::nan(""), 0.0};
    CHECK_THROWS_AS(SampledFunction(g, v), RejectedInput);
    v[3] = {0.0, INFINITY};
    CHECK_THROWS_AS(SampledFunction(g, v), RejectedInput);
    CHECK_THROWS_AS(SampledFunction(g, std::vector<cplx>(7)), GridMismatch);
}

TEST_CASE("forward transform of a constant is a delta at zero") {
    const TorusGrid g(2, 16);
    const auto F = forward_transform(SampledFunction::constant(g, {2.5, -1.0}));
    for (std::size_t i = 0; i < F.size(); ++i) {
        const auto k = g.frequency(i);
        const cplx expect = (k[0] == 0 && k[1] == 0) ? cplx{2.5, -1.0} : cplx{};
        CHECK(std::abs(F[i] - expect) < 1e-14);
    }
}

TEST_CASE("forward transform of a pure mode") {
    const TorusGrid g(1, 16);
    const auto f = SampledFunction::from(g, [](const Point& x) { return std::exp(cplx{0.0, 3.0 * x[0]}); });
    const auto F = forward_transform(f);
    for (std::size_t i = 0; i < F.size(); ++i) {
        const double expect = g.frequency(i)[0] == 3 ? 1.0 : 0.0;
        CHECK(std::abs(F[i] - expect) < 1e-14);
    }
}

TEST_CASE("inverse transform of known spectra") {
    const TorusGrid g(1, 32);
    std::vector<cplx> delta(32);
    delta[g.slot_of_frequency(0)] = 1.0;
    const auto one = inverse_transform(SpectrumFunction(g, delta));
    for (std::size_t i = 0; i < one.size(); ++i) CHECK(std::abs(one[i] - 1.0) < 1e-15);

    std::vector<cplx> cosine(32);
    cosine[g.slot_of_frequency(5)] = 0.5;
    cosine[g.slot_of_frequency(-5)] = 0.5;
    const auto c = inverse_transform(SpectrumFunction(g, cosine));
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(std::abs(c[i] - std::cos(5.0 * g.point(i)[0])) < 1e-13);
}

TEST_CASE("Fourier round trip and Parseval on random functions") {
    std::mt19937_64 rng(11);
    double worst_roundtrip = 0.0;
    double worst_parseval = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + trial % 2;
        const std::size_t N = std::size_t{8} << (trial % 6);
        const TorusGrid g(n, N);
        const auto f = random_function(g, rng);
        const auto F = forward_transform(f);
        worst_roundtrip = std::max(worst_roundtrip, relative_diff(inverse_transform(F), f));

        double lhs = 0.0, rhs = 0.0;
        for (const auto& z : f.values()) lhs += std::norm(z);
        lhs /= static_cast<double>(g.size());
        for (const auto& z : F.coefficients()) rhs += std::norm(z);
        worst_parseval = std::max(worst_parseval, std::abs(lhs - rhs) / lhs);
    }
    CHECK(worst_roundtrip <= 1e-12);
    CHECK(worst_parseval <= 1e-10);
}

TEST_CASE("lp norm examples") {
    for (int n : {1, 2}) {
        const TorusGrid g(n, 32);
        const auto one = SampledFunction::constant(g, 1.0);
        for (double p : {0.5, 1.0, 2.0, 3.5}) CHECK(lp_norm(one, p) == doctest::Approx(std::pow(2 * std::numbers::pi, n / p)).epsilon(1e-13));
    }
    const TorusGrid g(1, 64);
    std::mt19937_64 rng(3);
    const auto f = random_function(g, rng);
    CHECK(lp_norm(f.scaled(3.0), 2.5) == doctest::Approx(3.0 * lp_norm(f, 2.5)).epsilon(1e-14));
    CHECK(lp_norm(SampledFunction::zeros(g), 2.0) == 0.0);

    // Half-grid indicator: N/2 points of measure h -> sqrt(pi).
    const auto half = SampledFunction::from(g, [](const Point& x) { return x[0] < std::numbers::pi ? 1.0 : 0.0; });
    CHECK(lp_norm(half, 2.0) == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-14));

    CHECK_THROWS_AS(lp_norm(f, 0.0), InvalidExponent);
    CHECK_THROWS_AS(lp_norm(f, -1.0), InvalidExponent);
    std::vector<double> bad(64, 1.0);
    bad[5] = 0.0;
    CHECK_THROWS_AS(lp_norm(f, 2.0, bad), RejectedInput);
}

TEST_CASE("weak Lq quasinorm") {
    const TorusGrid g(1, 64);
    CHECK(weak_lp_quasinorm(SampledFunction::zeros(g), 2.0) == 0.0);

    // Indicator of 24 points: measure 24h, weak norm approached from below a level 1.
    const double mu = 24.0 * g.spacing();
    const auto ind = SampledFunction::from(g, [&](const Point& x) { return x[0] < 24 * g.spacing() - 1e-9 ? 1.0 : 0.0; });
    for (double q : {1.0, 2.0, 4.0}) CHECK(weak_lp_quasinorm(ind, q) == doctest::Approx(std::pow(mu, 1.0 / q)).epsilon(1e-14));

    std::mt19937_64 rng(5);
    for (int t = 0; t < 50; ++t) {
        const TorusGrid gg(1 + t % 2, 16);
        const auto f = random_function(gg, rng);
        for (double q : {1.0, 2.0, 4.0}) CHECK(weak_lp_quasinorm(f, q) <= lp_norm(f, q) * (1 + 1e-14));
    }
    CHECK_THROWS_AS(weak_lp_quasinorm(ind, 0.0), InvalidExponent);
}

TEST_CASE("dyadic cubes partition every level") {
    for (int n : {1, 2}) {
        const TorusGrid g(n, 32);
        const auto fam = CubeFamily::dyadic(g);
        for (int l = 0; l <= fam.max_level(); ++l) {
            std::vector<int> hits(g.size(), 0);
            for (std::size_t c = fam.level_begin(l); c < fam.level_begin(l + 1); ++c) {
                for (auto p : fam.cubes()[c].points()) {
                    ++hits[p];
                    CHECK(fam.cube_index(l, p) == c);
                }
            }
            for (int h : hits) CHECK(h == 1);
        }
    }
}

TEST_CASE("cube geometry") {
    const TorusGrid g(1, 64);
    const auto q = Cube::dyadic(g, {3, {2, 0}});
    CHECK(q.side() == doctest::Approx(2 * std::numbers::pi / 8));
    CHECK(q.center()[0] == doctest::Approx(2.5 * 2 * std::numbers::pi / 8));
    CHECK(q.points().size() == 8);
    CHECK(q.halved().points().size() == 4);
    CHECK(q.dilated(3).points().size() == 64);
    CHECK_THROWS_AS(q.dilated(4), OutOfRange);
    CHECK_THROWS_AS(Cube::dyadic(g, {7, {0, 0}}), RejectedInput);

    // Dilates wrap around the origin.
    const auto edge = Cube::dyadic(g, {4, {0, 0}});
    const auto big = edge.dilated(1).points();
    CHECK(std::set<std::size_t>(big.begin(), big.end()) ==
          std::set<std::size_t>{62, 63, 0, 1, 2, 3, 4, 5});
}

TEST_CASE("cube averages") {
    const TorusGrid g(2, 32);
    const auto fam = CubeFamily::dyadic(g, 3);
    const auto c = SampledFunction::constant(g, {0.0, -4.0});
    for (const auto& q : fam.cubes())
        for (double p : {1.0, 2.0, 3.0}) CHECK(cube_average(c, q, p) == doctest::Approx(4.0).epsilon(1e-14));

    std::mt19937_64 rng(17);
    const auto f = random_function(g, rng);
    for (std::size_t k = fam.level_begin(3); k < fam.level_begin(4); ++k) {
        const auto& q = fam.cubes()[k];
        const double a1 = cube_average(f, q, 1.0);
        const double a2 = cube_average(f, q, 2.0);
        const double a4 = cube_average(f, q, 4.0);
        CHECK(a1 <= a2);
        CHECK(a2 <= a4);
    }

    // Indicator of the left half of an aligned cube.
    const TorusGrid g1(1, 64);
    const auto q = Cube::dyadic(g1, {2, {1, 0}});  // points 16..31
    const auto ind = SampledFunction::from(g1, [&](const Point& x) {
        const double i = x[0] / g1.spacing();
        return (i > 15.5 && i < 23.5) ? 1.0 : 0.0;
    });
    CHECK(cube_average(ind, q, 1.0) == 0.5);
    CHECK_THROWS_AS(cube_average(ind, q, 0.5), InvalidExponent);
}

TEST_CASE("annuli are disjoint and tile the dilate") {
    const TorusGrid g(1, 64);
    const auto q = Cube::dyadic(g, {4, {5, 0}});
    const auto s0 = annulus_points(q, 0);
    CHECK(s0 == q.points());

    std::set<std::size_t> all;
    std::size_t total = 0;
    for (unsigned j = 0; j <= 3; ++j) {
        const auto s = annulus_points(q, j);
        total += s.size();
        all.insert(s.begin(), s.end());
        const std::size_t expect = j == 0 ? 4 : (std::size_t{1} << j) * 4 - (std::size_t{1} << (j - 1)) * 4;
        CHECK(s.size() == expect);
    }
    CHECK(total == all.size());
    const auto big = q.dilated(3).points();
    CHECK(all == std::set<std::size_t>(big.begin(), big.end()));
    CHECK_THROWS_AS(annulus_points(q, 5), OutOfRange);

    // Two dimensions: counts follow (2^{jn} - 2^{(j-1)n}) #Q.
    const TorusGrid g2(2, 64);
    const auto q2 = Cube::dyadic(g2, {4, {3, 9}});
    for (unsigned j = 1; j <= 3; ++j) {
        const std::size_t expect = ((std::size_t{1} << (2 * j)) - (std::size_t{1} << (2 * (j - 1)))) * 16;
        CHECK(annulus_points(q2, j).size() == expect);
    }
}

TEST_CASE("csv round trip preserves samples and spectra bit-exactly") {
    std::mt19937_64 rng(23);
    for (int n : {1, 2}) {
        const TorusGrid g(n, 16);
        const auto f = random_function(g, rng);
        std::stringstream ss;
        csv::write(ss, f);
        const auto back = csv::read_sampled(ss);
        CHECK(back.grid() == g);
        CHECK(max_abs_diff(back, f) == 0.0);

        const auto F = forward_transform(f);
        std::stringstream sf;
        csv::write(sf, F);
        const auto Fb = csv::read_spectrum(sf);
        for (std::size_t i = 0; i < F.size(); ++i) CHECK(Fb[i] == F[i]);
    }
    std::stringstream bad("i,re,im\n0,1,0\n0,1,0\n");
    CHECK_THROWS_AS(csv::read_sampled(bad), RejectedInput);
}
