#pragma once

#include <cmath>
#include <cstddef>

namespace mulharm::detail {

// Exact accumulation of doubles on a shared binary grid 2^-exponent.
//
// Every value is rounded once onto the grid (relative error ~2^-100 of the
// bound), after which sums are exact 128-bit integer sums and therefore
// independent of summation order. Two code paths that quantize with the same
// scale produce bit-identical averages.
class FixedPointScale {
public:
    using Acc = __int128;

    // Scale such that `count` values with |v| <= bound sum below 2^120.
    static FixedPointScale for_bound(double bound, std::size_t count) {
        if (!(bound > 0.0)) return FixedPointScale(0);
        int eb = 0;
        std::frexp(bound, &eb);  // bound < 2^eb
        int ec = 0;
        std::frexp(static_cast<double>(count == 0 ? 1 : count), &ec);
        return FixedPointScale(120 - eb - ec);
    }

    Acc quantize(double v) const { return static_cast<Acc>(std::nearbyint(std::ldexp(v, exponent_))); }
    double to_double(Acc s) const { return std::ldexp(static_cast<double>(s), -exponent_); }
    int exponent() const noexcept { return exponent_; }

private:
    explicit FixedPointScale(int e) : exponent_(e) {}
    int exponent_;
};

}  // namespace mulharm::detail
