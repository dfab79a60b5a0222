#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace tddr {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Golden-angle increment, 111.25 degrees in radians.
inline constexpr double kGoldenAngleRad = 111.25 * kPi / 180.0;

class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised on tensor/operator dimension mismatches.
class shape_error : public error {
public:
    using error::error;
};

// Raised on invalid or unknown configuration input.
class config_error : public error {
public:
    using error::error;
};

// Raised on file-format or filesystem problems.
class io_error : public error {
public:
    using error::error;
};

// Raised when a run must abort for numerical reasons (NaN/Inf, divergence).
class numeric_error : public error {
public:
    using error::error;
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stable sub-seed derivation so independent random streams (weights, noise,
// shuffling, ...) never alias even when the user seed is small.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t s = seed ^ (0x6c62272e07bb0142ULL + tag * 0x100000001b3ULL);
    return splitmix64(s);
}

// xoshiro256** with splitmix64 seeding. Self-contained so that streams are
// bit-identical across standard libraries and platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& word : state_) word = splitmix64(s);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // [0, 1)
    double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Box-Muller; draws two uniforms per call, no cached spare.
    double normal() {
        double u1 = uniform01();
        double u2 = uniform01();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t state_[4];
};

inline double sqr(double x) { return x * x; }

}  // namespace tddr
