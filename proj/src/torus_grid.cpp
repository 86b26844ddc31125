#include "mulharm/torus_grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "mulharm/error.hpp"
#include "mulharm/fft.hpp"

namespace mulharm {
namespace {

long positive_mod(long a, long m) {
    const long r = a % m;
    return r < 0 ? r + m : r;
}

std::vector<int> fft_shape(const TorusGrid& grid) {
    return std::vector<int>(static_cast<std::size_t>(grid.dimension()), static_cast<int>(grid.points_per_axis()));
}

void require_finite(std::span<const cplx> values, const char* what) {
    for (const auto& v : values) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            throw RejectedInput(std::string(what) + ": non-finite value");
        }
    }
}

}  // namespace

// ---------------------------------------------------------------- TorusGrid

TorusGrid::TorusGrid(int dimension, std::size_t points_per_axis) : dimension_(dimension), n_(points_per_axis) {
    if (dimension != 1 && dimension != 2) {
        throw RejectedInput("TorusGrid: dimension must be 1 or 2, got " + std::to_string(dimension));
    }
    if (points_per_axis < 8 || !std::has_single_bit(points_per_axis)) {
        throw RejectedInput("TorusGrid: points per axis must be a power of two >= 8, got " +
                            std::to_string(points_per_axis));
    }
    size_ = dimension == 1 ? n_ : n_ * n_;
    log2n_ = std::countr_zero(n_);
}

double TorusGrid::cell_measure() const noexcept {
    const double h = spacing();
    return dimension_ == 1 ? h : h * h;
}

GridIndex TorusGrid::unflatten(std::size_t flat) const noexcept {
    if (dimension_ == 1) return {flat, 0};
    return {flat / n_, flat % n_};
}

std::size_t TorusGrid::flatten(const GridIndex& idx) const noexcept {
    return dimension_ == 1 ? idx[0] : idx[0] * n_ + idx[1];
}

Point TorusGrid::point(std::size_t flat) const noexcept {
    const auto idx = unflatten(flat);
    const double h = spacing();
    return {static_cast<double>(idx[0]) * h, dimension_ == 1 ? 0.0 : static_cast<double>(idx[1]) * h};
}

long TorusGrid::frequency_of_slot(std::size_t slot) const noexcept {
    const long s = static_cast<long>(slot);
    const long n = static_cast<long>(n_);
    return s < n / 2 ? s : s - n;
}

std::size_t TorusGrid::slot_of_frequency(long k) const noexcept {
    return static_cast<std::size_t>(positive_mod(k, static_cast<long>(n_)));
}

Frequency TorusGrid::frequency(std::size_t flat) const noexcept {
    const auto idx = unflatten(flat);
    return {frequency_of_slot(idx[0]), dimension_ == 1 ? 0L : frequency_of_slot(idx[1])};
}

std::size_t TorusGrid::flat_of_frequency(const Frequency& k) const noexcept {
    if (dimension_ == 1) return slot_of_frequency(k[0]);
    return slot_of_frequency(k[0]) * n_ + slot_of_frequency(k[1]);
}

// ---------------------------------------------------------- SampledFunction

SampledFunction::SampledFunction(TorusGrid grid, std::vector<cplx> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw GridMismatch("SampledFunction: " + std::to_string(values_.size()) + " values for a grid of " +
                           std::to_string(grid_.size()) + " points");
    }
    require_finite(values_, "SampledFunction");
}

SampledFunction SampledFunction::zeros(const TorusGrid& grid) {
    return SampledFunction(grid, std::vector<cplx>(grid.size()));
}

SampledFunction SampledFunction::constant(const TorusGrid& grid, cplx value) {
    return SampledFunction(grid, std::vector<cplx>(grid.size(), value));
}

SampledFunction SampledFunction::from(const TorusGrid& grid, const std::function<cplx(const Point&)>& fn) {
    std::vector<cplx> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(grid.point(i));
    return SampledFunction(grid, std::move(v));
}

std::vector<double> SampledFunction::moduli() const {
    std::vector<double> out(values_.size());
    std::transform(values_.begin(), values_.end(), out.begin(), [](const cplx& z) { return std::abs(z); });
    return out;
}

double SampledFunction::max_modulus() const {
    double m = 0.0;
    for (const auto& z : values_) m = std::max(m, std::abs(z));
    return m;
}

namespace {

template <typename Op>
SampledFunction zip(const SampledFunction& a, const SampledFunction& b, Op op) {
    if (!(a.grid() == b.grid())) throw GridMismatch("SampledFunction: operands live on different grids");
    std::vector<cplx> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = op(a[i], b[i]);
    return SampledFunction(a.grid(), std::move(v));
}

}  // namespace

SampledFunction SampledFunction::operator+(const SampledFunction& o) const {
    return zip(*this, o, std::plus<>{});
}
SampledFunction SampledFunction::operator-(const SampledFunction& o) const {
    return zip(*this, o, std::minus<>{});
}
SampledFunction SampledFunction::operator*(const SampledFunction& o) const {
    return zip(*this, o, std::multiplies<>{});
}

SampledFunction SampledFunction::scaled(cplx factor) const {
    std::vector<cplx> v(values_);
    for (auto& z : v) z *= factor;
    return SampledFunction(grid_, std::move(v));
}

SampledFunction SampledFunction::shifted(cplx offset) const {
    std::vector<cplx> v(values_);
    for (auto& z : v) z += offset;
    return SampledFunction(grid_, std::move(v));
}

// --------------------------------------------------------- SpectrumFunction

SpectrumFunction::SpectrumFunction(TorusGrid grid, std::vector<cplx> coefficients)
    : grid_(grid), coeffs_(std::move(coefficients)) {
    if (coeffs_.size() != grid_.size()) {
        throw GridMismatch("SpectrumFunction: coefficient count does not match the grid");
    }
    require_finite(coeffs_, "SpectrumFunction");
}

SpectrumFunction forward_transform(const SampledFunction& f) {
    std::vector<cplx> data(f.values().begin(), f.values().end());
    const auto shape = fft_shape(f.grid());
    fft::transform(data, shape, fft::Direction::forward);
    const double scale = 1.0 / static_cast<double>(f.grid().size());
    for (auto& z : data) z *= scale;
    return SpectrumFunction(f.grid(), std::move(data));
}

SampledFunction inverse_transform(const SpectrumFunction& spectrum) {
    std::vector<cplx> data(spectrum.coefficients().begin(), spectrum.coefficients().end());
    const auto shape = fft_shape(spectrum.grid());
    fft::transform(data, shape, fft::Direction::backward);
    return SampledFunction(spectrum.grid(), std::move(data));
}

// --------------------------------------------------------------- DyadicCube

double DyadicCube::side() const noexcept { return std::ldexp(kPeriod, -level); }

Point DyadicCube::center(int dimension) const noexcept {
    const double s = side();
    const double c0 = (static_cast<double>(offset[0]) + 0.5) * s;
    const double c1 = dimension == 1 ? 0.0 : (static_cast<double>(offset[1]) + 0.5) * s;
    return {c0, c1};
}

// --------------------------------------------------------------------- Cube

Cube::Cube(const TorusGrid& grid, std::array<long, 2> lower_quarter, long side_quarter, int level)
    : grid_(grid), lower_q_(lower_quarter), side_q_(side_quarter), level_(level) {
    const long period_q = 4 * static_cast<long>(grid.points_per_axis());
    if (side_quarter <= 0 || side_quarter > period_q) throw OutOfRange("Cube: side outside (0, 2pi]");
    for (auto& c : lower_q_) c = positive_mod(c, period_q);
    if (grid.dimension() == 1) lower_q_[1] = 0;
}

Cube Cube::dyadic(const TorusGrid& grid, const DyadicCube& id) {
    if (id.level < 0 || id.level > grid.max_level()) {
        throw RejectedInput("Cube: level " + std::to_string(id.level) + " holds no grid points for N = " +
                            std::to_string(grid.points_per_axis()));
    }
    const std::size_t per_level = std::size_t{1} << id.level;
    for (int a = 0; a < grid.dimension(); ++a) {
        if (id.offset[static_cast<std::size_t>(a)] >= per_level) throw OutOfRange("Cube: dyadic offset out of range");
    }
    const long side_pts = static_cast<long>(grid.points_per_axis() >> id.level);
    const std::array<long, 2> lower{4 * static_cast<long>(id.offset[0]) * side_pts,
                                    4 * static_cast<long>(id.offset[1]) * side_pts};
    Cube c(grid, lower, 4 * side_pts, id.level);
    c.id_ = id;
    return c;
}

double Cube::side() const noexcept { return static_cast<double>(side_q_) * grid_.spacing() / 4.0; }

double Cube::measure() const noexcept {
    const double s = side();
    return grid_.dimension() == 1 ? s : s * s;
}

Point Cube::center() const noexcept {
    const double q = grid_.spacing() / 4.0;
    const double period_q = 4.0 * static_cast<double>(grid_.points_per_axis());
    auto axis = [&](long lower) {
        return std::fmod(static_cast<double>(lower) + static_cast<double>(side_q_) / 2.0, period_q) * q;
    };
    return {axis(lower_q_[0]), grid_.dimension() == 1 ? 0.0 : axis(lower_q_[1])};
}

Cube Cube::dilated(unsigned j) const {
    const long period_q = 4 * static_cast<long>(grid_.points_per_axis());
    if (j >= 40 || (side_q_ << j) > period_q) {
        throw OutOfRange("Cube: dilate 2^" + std::to_string(j) + " Q exceeds the torus");
    }
    const long new_side = side_q_ << j;
    const long grow = (new_side - side_q_) / 2;
    return Cube(grid_, {lower_q_[0] - grow, lower_q_[1] - grow}, new_side, level_ - static_cast<int>(j));
}

Cube Cube::halved() const {
    if (side_q_ % 4 != 0) throw OutOfRange("Cube: half cube not representable at this resolution");
    const long shrink = side_q_ / 4;
    return Cube(grid_, {lower_q_[0] + shrink, lower_q_[1] + shrink}, side_q_ / 2, level_ + 1);
}

bool Cube::contains(std::size_t flat) const noexcept {
    const long period_q = 4 * static_cast<long>(grid_.points_per_axis());
    const auto idx = grid_.unflatten(flat);
    for (int a = 0; a < grid_.dimension(); ++a) {
        const auto ua = static_cast<std::size_t>(a);
        const long d = positive_mod(4 * static_cast<long>(idx[ua]) - lower_q_[ua], period_q);
        if (d >= side_q_) return false;
    }
    return true;
}

std::vector<std::size_t> Cube::points() const {
    const long n = static_cast<long>(grid_.points_per_axis());
    auto axis_indices = [&](long lower) {
        std::vector<std::size_t> out;
        long first = lower / 4 + (lower % 4 != 0 ? 1 : 0);
        for (long i = first; 4 * i < lower + side_q_; ++i) out.push_back(static_cast<std::size_t>(positive_mod(i, n)));
        return out;
    };
    const auto ax0 = axis_indices(lower_q_[0]);
    std::vector<std::size_t> pts;
    if (grid_.dimension() == 1) {
        pts = ax0;
    } else {
        const auto ax1 = axis_indices(lower_q_[1]);
        pts.reserve(ax0.size() * ax1.size());
        for (auto i : ax0)
            for (auto k : ax1) pts.push_back(grid_.flatten({i, k}));
    }
    std::sort(pts.begin(), pts.end());
    return pts;
}

// --------------------------------------------------------------- CubeFamily

CubeFamily::CubeFamily(TorusGrid grid, int max_level, bool dyadic)
    : grid_(grid), max_level_(max_level), dyadic_(dyadic) {
    if (max_level < 0 || max_level > grid.max_level()) {
        throw OutOfRange("CubeFamily: max level must lie in [0, log2 N]");
    }
}

CubeFamily CubeFamily::dyadic(const TorusGrid& grid, int max_level) {
    CubeFamily fam(grid, max_level, true);
    for (int l = 0; l <= max_level; ++l) {
        fam.level_begin_.push_back(fam.cubes_.size());
        const std::size_t per_axis = std::size_t{1} << l;
        const std::size_t inner = grid.dimension() == 1 ? 1 : per_axis;
        for (std::size_t o0 = 0; o0 < per_axis; ++o0)
            for (std::size_t o1 = 0; o1 < inner; ++o1) fam.cubes_.push_back(Cube::dyadic(grid, {l, {o0, o1}}));
    }
    fam.level_begin_.push_back(fam.cubes_.size());
    return fam;
}

CubeFamily CubeFamily::all_translates(const TorusGrid& grid, int max_level) {
    CubeFamily fam(grid, max_level, false);
    const std::size_t n = grid.points_per_axis();
    for (int l = 0; l <= max_level; ++l) {
        fam.level_begin_.push_back(fam.cubes_.size());
        const long side_q = 4 * static_cast<long>(n >> l);
        // The full-torus cube is the same point set under every shift.
        const std::size_t shifts = l == 0 ? 1 : n;
        const std::size_t inner = grid.dimension() == 1 ? 1 : shifts;
        for (std::size_t s0 = 0; s0 < shifts; ++s0)
            for (std::size_t s1 = 0; s1 < inner; ++s1)
                fam.cubes_.emplace_back(grid, std::array<long, 2>{4 * static_cast<long>(s0), 4 * static_cast<long>(s1)},
                                        side_q, l);
    }
    fam.level_begin_.push_back(fam.cubes_.size());
    return fam;
}

std::size_t CubeFamily::cube_index(int level, std::size_t flat) const {
    if (!dyadic_) throw RejectedInput("CubeFamily: point lookup needs a dyadic family");
    if (level < 0 || level > max_level_) throw OutOfRange("CubeFamily: level out of range");
    const auto idx = grid_.unflatten(flat);
    const int shift = grid_.max_level() - level;
    const std::size_t o0 = idx[0] >> shift;
    const std::size_t within = grid_.dimension() == 1 ? o0 : (o0 << level) + (idx[1] >> shift);
    return level_begin_[static_cast<std::size_t>(level)] + within;
}

std::vector<std::size_t> CubeFamily::cubes_containing(std::size_t flat) const {
    std::vector<std::size_t> out;
    if (dyadic_) {
        for (int l = 0; l <= max_level_; ++l) out.push_back(cube_index(l, flat));
        return out;
    }
    for (std::size_t c = 0; c < cubes_.size(); ++c)
        if (cubes_[c].contains(flat)) out.push_back(c);
    return out;
}

// -------------------------------------------------------------------- norms

double lp_norm(const SampledFunction& f, double p, std::span<const double> weight) {
    if (!(p > 0.0) || !std::isfinite(p)) throw InvalidExponent("lp_norm: exponent must be a finite p > 0");
    if (!weight.empty() && weight.size() != f.size()) throw GridMismatch("lp_norm: weight size does not match grid");
    const double scale = f.max_modulus();
    if (scale == 0.0) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double w = weight.empty() ? 1.0 : weight[i];
        if (!(w > 0.0)) throw RejectedInput("lp_norm: weight must be strictly positive");
        acc += std::pow(std::abs(f[i]) / scale, p) * w;
    }
    return scale * std::pow(acc * f.grid().cell_measure(), 1.0 / p);
}

double weak_lp_quasinorm(const SampledFunction& f, double q) {
    if (!(q > 0.0) || !std::isfinite(q)) throw InvalidExponent("weak_lp_quasinorm: exponent must be a finite q > 0");
    auto mods = f.moduli();
    std::sort(mods.begin(), mods.end(), std::greater<>{});
    const double cell = f.grid().cell_measure();
    double best = 0.0;
    // For lambda just below a level v, {|f| > lambda} = {|f| >= v}.
    for (std::size_t i = 0; i < mods.size();) {
        const double v = mods[i];
        if (v == 0.0) break;
        std::size_t j = i;
        while (j < mods.size() && mods[j] == v) ++j;
        best = std::max(best, v * std::pow(static_cast<double>(j) * cell, 1.0 / q));
        i = j;
    }
    return best;
}

double cube_average(const SampledFunction& f, const Cube& cube, double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidExponent("cube_average: exponent must be a finite p >= 1");
    if (!(cube.grid() == f.grid())) throw GridMismatch("cube_average: cube and function grids differ");
    const auto pts = cube.points();
    if (pts.empty()) throw RejectedInput("cube_average: cube contains no grid points");
    double acc = 0.0;
    for (auto i : pts) acc += p == 1.0 ? std::abs(f[i]) : std::pow(std::abs(f[i]), p);
    const double mean = acc / static_cast<double>(pts.size());
    return p == 1.0 ? mean : std::pow(mean, 1.0 / p);
}

std::vector<std::size_t> annulus_points(const Cube& cube, unsigned j) {
    const Cube outer = cube.dilated(j);
    if (j == 0) return outer.points();
    const Cube inner = cube.dilated(j - 1);
    std::vector<std::size_t> out;
    for (auto i : outer.points())
        if (!inner.contains(i)) out.push_back(i);
    return out;
}

}  // namespace mulharm
