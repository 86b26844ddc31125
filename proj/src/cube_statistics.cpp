#include "mulharm/cube_statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mulharm/detail/fixed_point.hpp"
#include "mulharm/error.hpp"

namespace mulharm {
namespace {

using detail::FixedPointScale;
using Acc = FixedPointScale::Acc;

void require_dyadic(const CubeFamily& family) {
    if (!family.is_dyadic()) throw RejectedInput("fast maximal path needs a dyadic cube family");
}

void require_size(std::size_t n, const CubeFamily& family) {
    if (n != family.grid().size()) throw GridMismatch("cube statistics: sample count does not match the family grid");
}

std::size_t points_per_cube(const CubeFamily& family, int level) {
    return family.grid().size() >> (level * family.grid().dimension());
}

std::size_t parent_index(const CubeFamily& family, const Cube& child) {
    const auto id = *child.dyadic_id();
    const int l = id.level - 1;
    const std::size_t o0 = id.offset[0] / 2;
    const std::size_t within = family.grid().dimension() == 1 ? o0 : (o0 << l) + id.offset[1] / 2;
    return family.level_begin(l) + within;
}

// Exact integer sums per cube of quantized samples.
std::vector<Acc> fast_sums(std::span<const double> values, const CubeFamily& family, const FixedPointScale& scale) {
    const auto cubes = family.cubes();
    std::vector<Acc> sums(cubes.size(), 0);
    const int finest = family.max_level();
    for (std::size_t x = 0; x < values.size(); ++x) sums[family.cube_index(finest, x)] += scale.quantize(values[x]);
    for (int l = finest; l >= 1; --l)
        for (std::size_t k = family.level_begin(l); k < family.level_begin(l + 1); ++k)
            sums[parent_index(family, cubes[k])] += sums[k];
    return sums;
}

struct OracleSum {
    Acc sum = 0;
    std::size_t count = 0;
};

std::vector<OracleSum> oracle_sums(std::span<const double> values, const CubeFamily& family,
                                   const FixedPointScale& scale) {
    const auto cubes = family.cubes();
    std::vector<OracleSum> out(cubes.size());
    for (std::size_t c = 0; c < cubes.size(); ++c) {
        for (std::size_t x = 0; x < values.size(); ++x) {
            if (!cubes[c].contains(x)) continue;
            out[c].sum += scale.quantize(values[x]);
            ++out[c].count;
        }
    }
    return out;
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

std::vector<double> cube_means(std::span<const double> values, const CubeFamily& family, MaximalPath path) {
    require_size(values.size(), family);
    const auto scale = FixedPointScale::for_bound(max_abs(values), values.size());
    std::vector<double> means(family.cubes().size());
    if (path == MaximalPath::fast) {
        require_dyadic(family);
        const auto sums = fast_sums(values, family, scale);
        for (int l = 0; l <= family.max_level(); ++l) {
            const double count = static_cast<double>(points_per_cube(family, l));
            for (std::size_t k = family.level_begin(l); k < family.level_begin(l + 1); ++k)
                means[k] = scale.to_double(sums[k]) / count;
        }
    } else {
        const auto sums = oracle_sums(values, family, scale);
        for (std::size_t k = 0; k < sums.size(); ++k) {
            if (sums[k].count == 0) throw RejectedInput("cube statistics: cube without grid points");
            means[k] = scale.to_double(sums[k].sum) / static_cast<double>(sums[k].count);
        }
    }
    return means;
}

std::vector<cplx> cube_means(std::span<const cplx> values, const CubeFamily& family, MaximalPath path) {
    std::vector<double> re(values.size()), im(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        re[i] = values[i].real();
        im[i] = values[i].imag();
    }
    const auto mr = cube_means(re, family, path);
    const auto mi = cube_means(im, family, path);
    std::vector<cplx> out(mr.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = {mr[k], mi[k]};
    return out;
}

std::vector<double> cube_minima(std::span<const double> values, const CubeFamily& family, MaximalPath path) {
    require_size(values.size(), family);
    const auto cubes = family.cubes();
    std::vector<double> mins(cubes.size(), std::numeric_limits<double>::infinity());
    if (path == MaximalPath::fast) {
        require_dyadic(family);
        const int finest = family.max_level();
        for (std::size_t x = 0; x < values.size(); ++x) {
            auto& m = mins[family.cube_index(finest, x)];
            m = std::min(m, values[x]);
        }
        for (int l = finest; l >= 1; --l)
            for (std::size_t k = family.level_begin(l); k < family.level_begin(l + 1); ++k) {
                auto& m = mins[parent_index(family, cubes[k])];
                m = std::min(m, mins[k]);
            }
    } else {
        for (std::size_t c = 0; c < cubes.size(); ++c)
            for (std::size_t x = 0; x < values.size(); ++x)
                if (cubes[c].contains(x)) mins[c] = std::min(mins[c], values[x]);
    }
    return mins;
}

std::vector<double> cube_oscillations(std::span<const cplx> values, const CubeFamily& family, MaximalPath path) {
    require_size(values.size(), family);
    const auto means = cube_means(values, family, path);
    double bound = 0.0;
    for (const auto& z : values) bound = std::max(bound, std::abs(z));
    // |f(y) - f_Q| <= 2 max |f|
    const auto scale = FixedPointScale::for_bound(2.0 * bound, values.size());
    const auto cubes = family.cubes();
    std::vector<double> osc(cubes.size());
    if (path == MaximalPath::fast) {
        require_dyadic(family);
        std::vector<Acc> sums(cubes.size(), 0);
        for (int l = 0; l <= family.max_level(); ++l)
            for (std::size_t x = 0; x < values.size(); ++x) {
                const auto k = family.cube_index(l, x);
                sums[k] += scale.quantize(std::abs(values[x] - means[k]));
            }
        for (int l = 0; l <= family.max_level(); ++l) {
            const double count = static_cast<double>(points_per_cube(family, l));
            for (std::size_t k = family.level_begin(l); k < family.level_begin(l + 1); ++k)
                osc[k] = scale.to_double(sums[k]) / count;
        }
    } else {
        for (std::size_t c = 0; c < cubes.size(); ++c) {
            Acc sum = 0;
            std::size_t count = 0;
            for (std::size_t x = 0; x < values.size(); ++x) {
                if (!cubes[c].contains(x)) continue;
                sum += scale.quantize(std::abs(values[x] - means[c]));
                ++count;
            }
            osc[c] = scale.to_double(sum) / static_cast<double>(count);
        }
    }
    return osc;
}

std::vector<double> max_over_containing(std::span<const double> per_cube, const CubeFamily& family,
                                        MaximalPath path) {
    const auto cubes = family.cubes();
    if (per_cube.size() != cubes.size()) throw GridMismatch("max_over_containing: one value per cube expected");
    const std::size_t n = family.grid().size();
    std::vector<double> out(n, -std::numeric_limits<double>::infinity());
    if (path == MaximalPath::fast) {
        require_dyadic(family);
        for (std::size_t x = 0; x < n; ++x)
            for (int l = 0; l <= family.max_level(); ++l) out[x] = std::max(out[x], per_cube[family.cube_index(l, x)]);
    } else {
        for (std::size_t c = 0; c < cubes.size(); ++c)
            for (std::size_t x = 0; x < n; ++x)
                if (cubes[c].contains(x)) out[x] = std::max(out[x], per_cube[c]);
    }
    return out;
}

}  // namespace mulharm
