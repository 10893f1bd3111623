#pragma once

#include <complex>
#include <cstdlib>
#include <new>
#include <vector>

#include "nsk/grid.hpp"

namespace nsk {

using cplx = std::complex<double>;

// 64-byte aligned allocator so FFTW SIMD kernels can run on vector storage.
template <class T>
struct AlignedAlloc {
    using value_type = T;
    AlignedAlloc() = default;
    template <class U>
    AlignedAlloc(const AlignedAlloc<U>&) {}
    T* allocate(std::size_t count) {
        void* p = std::aligned_alloc(64, ((count * sizeof(T) + 63) / 64) * 64);
        if (!p) throw std::bad_alloc();
        return static_cast<T*>(p);
    }
    void deallocate(T* p, std::size_t) { std::free(p); }
    template <class U>
    bool operator==(const AlignedAlloc<U>&) const { return true; }
};

using CoeffArray = std::vector<cplx, AlignedAlloc<cplx>>;

namespace fft {

// Planning effort. `deterministic` uses heuristics only, so the chosen plan
// (and therefore the exact floating-point output) is reproducible run to run.
// `fast` lets FFTW time candidate plans; use it for large one-off 3-d runs
// where byte-reproducibility of outputs is not required.
enum class Effort { deterministic, fast };
void set_effort(Effort e);
Effort effort();

// c2c DFT over the full lattice of `g`, normalized so that the coefficient of
// the single mode e^{i xi.x} is 1 at xi: forward divides by n^d, inverse is an
// unnormalized sum over modes.
void forward(const Grid& g, const cplx* in, cplx* out);
void inverse(const Grid& g, const cplx* in, cplx* out);

} // namespace fft
} // namespace nsk
