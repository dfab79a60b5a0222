#pragma once

#include <mutex>
#include <unordered_map>
#include <vector>

#include "tddr/common.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tddr {

namespace detail {

// Forward-direction twiddles for all stages of a length-n transform,
// concatenated stage by stage (len = 2, 4, ..., n; len/2 entries each).
inline const std::vector<cplx>& twiddle_table(int n) {
    static std::mutex mu;
    static std::unordered_map<int, std::vector<cplx>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<cplx> tw;
    for (int len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * kPi / len;
        for (int j = 0; j < len / 2; ++j) tw.push_back(std::polar(1.0, ang * j));
    }
    return cache.emplace(n, std::move(tw)).first->second;
}

}  // namespace detail

// Iterative radix-2 complex FFT, power-of-two lengths only, unnormalized.
// inverse=true conjugates the kernel (plain e^{+j} sum, no 1/n factor).
// Callers inside parallel regions must warm the twiddle cache first.
inline void fft_pow2(cplx* a, int n, bool inverse, const std::vector<cplx>& tw) {
    if (n <= 1) return;
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    size_t base = 0;
    for (int len = 2; len <= n; len <<= 1) {
        const int half = len / 2;
        for (int i = 0; i < n; i += len) {
            for (int j = 0; j < half; ++j) {
                cplx w = tw[base + j];
                if (inverse) w = std::conj(w);
                const cplx u = a[i + j];
                const cplx v = a[i + j + half] * w;
                a[i + j] = u + v;
                a[i + j + half] = u - v;
            }
        }
        base += half;
    }
}

inline void fft_pow2(cplx* a, int n, bool inverse) {
    if (n > 1 && (n & (n - 1)) != 0) throw shape_error("fft_pow2: length must be a power of two");
    fft_pow2(a, n, inverse, detail::twiddle_table(n));
}

// 2D FFT over a g x g row-major grid: rows then columns.
inline void fft2_pow2(std::vector<cplx>& grid, int g, bool inverse) {
    if (static_cast<int>(grid.size()) != static_cast<size_t>(g) * g)
        throw shape_error("fft2_pow2: bad grid size");
    if ((g & (g - 1)) != 0) throw shape_error("fft2_pow2: side must be a power of two");
    const std::vector<cplx>& tw = detail::twiddle_table(g);

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int y = 0; y < g; ++y) fft_pow2(grid.data() + static_cast<size_t>(y) * g, g, inverse, tw);

#ifdef _OPENMP
#pragma omp parallel
#endif
    {
        std::vector<cplx> col(g);
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
        for (int x = 0; x < g; ++x) {
            for (int y = 0; y < g; ++y) col[y] = grid[static_cast<size_t>(y) * g + x];
            fft_pow2(col.data(), g, inverse, tw);
            for (int y = 0; y < g; ++y) grid[static_cast<size_t>(y) * g + x] = col[y];
        }
    }
}

inline int next_pow2(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace tddr
