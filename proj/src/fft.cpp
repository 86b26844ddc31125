#include "mulharm/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <new>
#include <stdexcept>
#include <tuple>

namespace mulharm::fft {
namespace {

using Key = std::tuple<std::vector<int>, std::size_t, Direction, bool>;

class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(Key key) {
        std::lock_guard lock(mutex_);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;

        const auto& [shape, howmany, dir, aligned] = key;
        int total = 1;
        for (int d : shape) total *= d;
        // Planning with FFTW_ESTIMATE does not touch the buffer contents; the
        // scratch buffer from fftw_alloc has the alignment aligned plans assume.
        auto* scratch = fftw_alloc_complex(static_cast<std::size_t>(total) * howmany);
        const int sign = dir == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD;
        const unsigned flags = FFTW_ESTIMATE | (aligned ? 0u : FFTW_UNALIGNED);
        fftw_plan plan = fftw_plan_many_dft(static_cast<int>(shape.size()), shape.data(), static_cast<int>(howmany),
                                            scratch, nullptr, 1, total, scratch, nullptr, 1, total, sign, flags);
        fftw_free(scratch);
        if (plan == nullptr) throw std::runtime_error("fftw: plan creation failed");
        plans_.emplace(std::move(key), plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<Key, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache instance;
    return instance;
}

}  // namespace

void transform_batch(std::span<std::complex<double>> data, std::span<const int> shape, std::size_t howmany,
                     Direction dir) {
    std::vector<int> dims(shape.begin(), shape.end());
    std::size_t total = 1;
    for (int d : dims) total *= static_cast<std::size_t>(d);
    if (howmany == 0 || total * howmany != data.size()) throw std::invalid_argument("fft: data size does not match shape");
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    const bool aligned = fftw_alignment_of(reinterpret_cast<double*>(buf)) == 0;
    fftw_plan plan = cache().get({std::move(dims), howmany, dir, aligned});
    fftw_execute_dft(plan, buf, buf);
}

void transform(std::span<std::complex<double>> data, std::span<const int> shape, Direction dir) {
    transform_batch(data, shape, 1, dir);
}

AlignedBuffer::AlignedBuffer(std::size_t n)
    : ptr_(reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(n == 0 ? 1 : n))), n_(n) {
    if (!ptr_) throw std::bad_alloc();
}

void AlignedBuffer::Free::operator()(std::complex<double>* p) const noexcept {
    fftw_free(reinterpret_cast<fftw_complex*>(p));
}

}  // namespace mulharm::fft
