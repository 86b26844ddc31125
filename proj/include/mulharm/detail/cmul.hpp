#pragma once

#include <complex>

namespace mulharm::detail {

// Plain complex product without the C99 Annex G inf/nan recovery that
// std::complex operator* performs; every sample in this library is finite.
inline std::complex<double> cmul(const std::complex<double>& a, const std::complex<double>& b) noexcept {
    return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

}  // namespace mulharm::detail
