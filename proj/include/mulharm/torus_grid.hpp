#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace mulharm {

using cplx = std::complex<double>;

// Per-axis index; the second component is unused (zero) when n = 1.
using GridIndex = std::array<std::size_t, 2>;
using Frequency = std::array<long, 2>;
using Point = std::array<double, 2>;

inline constexpr double kPeriod = 2.0 * std::numbers::pi;

/**
 * Uniform periodic grid on [0, 2pi)^n, n in {1, 2}.
 *
 * Points are x_j = j * h with h = 2pi / N and are stored row-major (axis 0
 * slowest). Frequencies live in {-N/2, ..., N/2 - 1}^n.
 */
class TorusGrid {
public:
    TorusGrid(int dimension, std::size_t points_per_axis);

    int dimension() const noexcept { return dimension_; }
    std::size_t points_per_axis() const noexcept { return n_; }
    std::size_t size() const noexcept { return size_; }
    double spacing() const noexcept { return kPeriod / static_cast<double>(n_); }
    // h^n, the quadrature weight of one sample.
    double cell_measure() const noexcept;
    // log2(N): the deepest dyadic level that still holds one point per cube.
    int max_level() const noexcept { return log2n_; }

    GridIndex unflatten(std::size_t flat) const noexcept;
    std::size_t flatten(const GridIndex& idx) const noexcept;
    Point point(std::size_t flat) const noexcept;

    // FFT storage slot i <-> integer frequency (i < N/2 ? i : i - N).
    long frequency_of_slot(std::size_t slot) const noexcept;
    std::size_t slot_of_frequency(long k) const noexcept;
    Frequency frequency(std::size_t flat) const noexcept;
    std::size_t flat_of_frequency(const Frequency& k) const noexcept;

    friend bool operator==(const TorusGrid&, const TorusGrid&) = default;

private:
    int dimension_;
    std::size_t n_;
    std::size_t size_;
    int log2n_;
};

// Complex samples on a TorusGrid; finite by construction.
class SampledFunction {
public:
    SampledFunction(TorusGrid grid, std::vector<cplx> values);
    static SampledFunction zeros(const TorusGrid& grid);
    static SampledFunction constant(const TorusGrid& grid, cplx value);
    static SampledFunction from(const TorusGrid& grid, const std::function<cplx(const Point&)>& fn);

    const TorusGrid& grid() const noexcept { return grid_; }
    std::span<const cplx> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    const cplx& operator[](std::size_t i) const noexcept { return values_[i]; }

    std::vector<double> moduli() const;
    double max_modulus() const;

    SampledFunction operator+(const SampledFunction& other) const;
    SampledFunction operator-(const SampledFunction& other) const;
    // Pointwise product.
    SampledFunction operator*(const SampledFunction& other) const;
    SampledFunction scaled(cplx factor) const;
    SampledFunction shifted(cplx offset) const;

private:
    TorusGrid grid_;
    std::vector<cplx> values_;
};

// Fourier-series coefficients, stored in FFT slot order.
class SpectrumFunction {
public:
    SpectrumFunction(TorusGrid grid, std::vector<cplx> coefficients);

    const TorusGrid& grid() const noexcept { return grid_; }
    std::span<const cplx> coefficients() const noexcept { return coeffs_; }
    const cplx& at(const Frequency& k) const noexcept { return coeffs_[grid_.flat_of_frequency(k)]; }
    const cplx& operator[](std::size_t slot) const noexcept { return coeffs_[slot]; }
    std::size_t size() const noexcept { return coeffs_.size(); }

private:
    TorusGrid grid_;
    std::vector<cplx> coeffs_;
};

// f^(xi) = N^{-n} sum_j f(x_j) e^{-i x_j . xi}
SpectrumFunction forward_transform(const SampledFunction& f);
// f(x_j) = sum_xi F(xi) e^{i x_j . xi}
SampledFunction inverse_transform(const SpectrumFunction& spectrum);

// Dyadic cube identity: level l, offset in {0..2^l - 1}^n.
struct DyadicCube {
    int level = 0;
    GridIndex offset{0, 0};

    double side() const noexcept;
    Point center(int dimension) const noexcept;
    friend bool operator==(const DyadicCube&, const DyadicCube&) = default;
};

/**
 * Axis-aligned half-open cube on a specific grid, wrapped modulo 2pi.
 *
 * Corners are kept in quarter-spacing units so that dyadic cubes, their
 * dilates 2^j Q and halves (1/2)Q all have integer coordinates.
 */
class Cube {
public:
    Cube(const TorusGrid& grid, std::array<long, 2> lower_quarter, long side_quarter, int level);
    // Throws RejectedInput when the level is deeper than log2(N).
    static Cube dyadic(const TorusGrid& grid, const DyadicCube& id);

    const TorusGrid& grid() const noexcept { return grid_; }
    int level() const noexcept { return level_; }
    double side() const noexcept;
    double measure() const noexcept;
    Point center() const noexcept;
    std::optional<DyadicCube> dyadic_id() const noexcept { return id_; }

    // 2^j Q; throws OutOfRange when 2^j * side exceeds the period.
    Cube dilated(unsigned j) const;
    Cube halved() const;

    bool contains(std::size_t flat) const noexcept;
    std::vector<std::size_t> points() const;

private:
    TorusGrid grid_;
    std::array<long, 2> lower_q_;
    long side_q_;
    int level_;
    std::optional<DyadicCube> id_;

    friend class CubeFamily;
};

/**
 * The finite index set standing in for "all cubes Q containing x".
 *
 * The dyadic family holds every dyadic cube at levels 0..max_level and
 * supports O(1) point -> cube lookup. The translate family adds every
 * grid-aligned shift of each dyadic side length; it is only used as an
 * exhaustive reference on small grids.
 */
class CubeFamily {
public:
    static CubeFamily dyadic(const TorusGrid& grid, int max_level);
    static CubeFamily dyadic(const TorusGrid& grid) { return dyadic(grid, grid.max_level()); }
    static CubeFamily all_translates(const TorusGrid& grid, int max_level);

    const TorusGrid& grid() const noexcept { return grid_; }
    bool is_dyadic() const noexcept { return dyadic_; }
    int max_level() const noexcept { return max_level_; }
    std::span<const Cube> cubes() const noexcept { return cubes_; }

    // Dyadic families only: index into cubes() of the level-l cube holding the point.
    std::size_t cube_index(int level, std::size_t flat) const;
    // First index into cubes() of level l (dyadic families only).
    std::size_t level_begin(int level) const { return level_begin_.at(static_cast<std::size_t>(level)); }
    std::vector<std::size_t> cubes_containing(std::size_t flat) const;

private:
    CubeFamily(TorusGrid grid, int max_level, bool dyadic);

    TorusGrid grid_;
    int max_level_;
    bool dyadic_;
    std::vector<Cube> cubes_;
    std::vector<std::size_t> level_begin_;
};

// (sum_x |f(x)|^p w(x) h^n)^{1/p}; w == empty means w = 1.
double lp_norm(const SampledFunction& f, double p, std::span<const double> weight = {});
// sup_lambda lambda * |{|f| > lambda}|^{1/q}, evaluated at left limits of the
// distinct levels of |f|.
double weak_lp_quasinorm(const SampledFunction& f, double q);
// ((1/#Q) sum_{x in Q} |f(x)|^p)^{1/p}
double cube_average(const SampledFunction& f, const Cube& cube, double p);
// S_0(Q) = Q, S_j(Q) = 2^j Q \ 2^{j-1} Q.
std::vector<std::size_t> annulus_points(const Cube& cube, unsigned j);

}  // namespace mulharm
