#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mulharm/corpus.hpp"
#include "mulharm/error.hpp"

using namespace mulharm;

namespace {

bool identical(const SampledFunction& a, const SampledFunction& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

double mean_square(const SampledFunction& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += std::norm(f[i]);
    return s / static_cast<double>(f.size());
}

}  // namespace

TEST_CASE("same spec and seed give identical corpora") {
    const TorusGrid grid(1, 64);
    CorpusSpec spec;
    spec.count = 3;
    const auto a = generate_corpus(grid, spec, 1);
    const auto b = generate_corpus(grid, spec, 1);
    REQUIRE(a.size() == b.size());
    for (std::size_t t = 0; t < a.size(); ++t) {
        CHECK(a[t].id == b[t].id);
        REQUIRE(a[t].components.size() == b[t].components.size());
        for (std::size_t j = 0; j < a[t].components.size(); ++j) CHECK(identical(a[t].components[j], b[t].components[j]));
    }
    const auto c = generate_corpus(grid, spec, 2);
    CHECK_FALSE(identical(a[0].components[0], c[0].components[0]));
}

TEST_CASE("entries carry no spectral mass outside the band") {
    for (int n : {1, 2}) {
        const TorusGrid grid(n, n == 1 ? 64 : 16);
        CorpusSpec spec;
        spec.count = 5;
        const long band = static_cast<long>(grid.points_per_axis() / 4);
        for (const auto& t : generate_corpus(grid, spec, 9))
            for (const auto& f : t.components) CHECK(spectral_mass_outside(f, band) < 1e-28);
    }
}

TEST_CASE("default corpus has mean L2 norm in [0.1, 10]") {
    const TorusGrid grid(1, 64);
    const auto corpus = generate_corpus(grid, CorpusSpec{}, 5);
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& t : corpus)
        for (const auto& f : t.components) {
            total += std::sqrt(mean_square(f));
            ++count;
        }
    const double mean = total / static_cast<double>(count);
    CHECK(mean >= 0.1);
    CHECK(mean <= 10.0);
}

TEST_CASE("gaussian polynomials have unit mean square") {
    const TorusGrid grid(1, 128);
    for (std::uint64_t seed = 0; seed < 5; ++seed) CHECK(mean_square(gaussian_polynomial(grid, 32, seed)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("a fixed band yields the same polynomial on finer grids") {
    const TorusGrid coarse(1, 64), fine(1, 128);
    const auto f = gaussian_polynomial(coarse, 16, 77);
    const auto g = gaussian_polynomial(fine, 16, 77);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(f[i] - g[2 * i]) < 1e-12);
}

TEST_CASE("structured entries are present and sensible") {
    const TorusGrid grid(1, 64);
    CorpusSpec spec;
    spec.count = 0;
    const auto corpus = generate_corpus(grid, spec, 0);
    REQUIRE(corpus.size() == 4);
    CHECK(corpus[0].id == "smoothed_indicator");
    // Smoothed indicator of [pi/2, 3pi/2): near 1 at pi, near 0 at 0.
    const auto& ind = corpus[0].components[0];
    CHECK(ind[32].real() > 0.9);
    CHECK(std::abs(ind[0]) < 0.1);
    CHECK(std::abs(ind[32].imag()) < 1e-12);
    const auto& mode = corpus[1].components[0];
    for (std::size_t i = 0; i < mode.size(); ++i) CHECK(std::abs(mode[i] - std::polar(1.0, 2.0 * grid.point(i)[0])) < 1e-12);
    for (std::size_t i = 0; i < 64; ++i) CHECK(corpus[2].components[1][i] == cplx(1.0));
}

TEST_CASE("band at or above N/2 is rejected") {
    const TorusGrid grid(1, 32);
    CorpusSpec spec;
    spec.band = 16;
    CHECK_THROWS_AS(generate_corpus(grid, spec, 1), RejectedInput);
    spec.band = 0;
    CHECK_THROWS_AS(generate_corpus(grid, spec, 1), RejectedInput);
    spec.band = 15;
    CHECK_NOTHROW(generate_corpus(grid, spec, 1));
}

TEST_CASE("spec round-trips through JSON") {
    CorpusSpec spec;
    spec.count = 12;
    spec.band = 7;
    spec.arity = 1;
    const auto back = CorpusSpec::from_json(spec.to_json());
    CHECK(back.count == 12);
    CHECK(back.band == 7);
    CHECK(back.arity == 1);
    CHECK_THROWS_AS(CorpusSpec::from_json(nlohmann::json{{"arity", 0}}), ConfigError);
}
