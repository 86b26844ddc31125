#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace mulharm::fft {

enum class Direction { forward, backward };

// Unnormalized in-place multidimensional DFT (row-major, sign -1 forward,
// +1 backward). Plans are cached per (shape, batch, direction, alignment);
// execution is safe from several threads.
void transform(std::span<std::complex<double>> data, std::span<const int> shape, Direction dir);

// howmany contiguous transforms of the given shape in one call.
void transform_batch(std::span<std::complex<double>> data, std::span<const int> shape, std::size_t howmany,
                     Direction dir);

// Storage with the alignment FFTW wants for its SIMD kernels.
class AlignedBuffer {
public:
    explicit AlignedBuffer(std::size_t n);

    std::complex<double>* data() noexcept { return ptr_.get(); }
    std::size_t size() const noexcept { return n_; }
    std::span<std::complex<double>> span() noexcept { return {ptr_.get(), n_}; }
    std::complex<double>& operator[](std::size_t i) noexcept { return ptr_[i]; }

private:
    struct Free {
        void operator()(std::complex<double>* p) const noexcept;
    };
    std::unique_ptr<std::complex<double>[], Free> ptr_;
    std::size_t n_;
};

}  // namespace mulharm::fft
