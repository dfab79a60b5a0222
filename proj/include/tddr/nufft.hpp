#pragma once

#include <span>
#include <vector>

#include "tddr/fft.hpp"
#include "tddr/nudft.hpp"

namespace tddr {

struct GridConfig {
    double oversamp = 2.0;
    int kernel_width = 4;  // taps per axis on the oversampled grid

    double beta() const {
        // Beatty's beta for the given width/oversampling pair.
        const double j = kernel_width;
        return kPi * std::sqrt(sqr(j / oversamp * (oversamp - 0.5)) - 0.8);
    }
};

namespace detail {

inline double bessel_i0(double x) { return std::cyl_bessel_i(0.0, x); }

// Kaiser-Bessel kernel on the oversampled grid, half-width tau = J/2.
inline double kb_kernel(double u, double tau, double beta) {
    const double r = u / tau;
    if (std::abs(r) >= 1.0) return 0.0;
    return bessel_i0(beta * std::sqrt(1.0 - r * r)) / bessel_i0(beta);
}

// Continuous Fourier transform of kb_kernel at frequency f (cycles/sample):
// (2 tau / I0(beta)) * sinh(sqrt(beta^2 - (2 pi f tau)^2)) / sqrt(...),
// continuing into sinc form when the argument goes negative.
inline double kb_fourier(double f, double tau, double beta) {
    const double t = sqr(beta) - sqr(2.0 * kPi * f * tau);
    double core;
    if (t > 0) {
        const double s = std::sqrt(t);
        core = std::sinh(s) / s;
    } else if (t < 0) {
        const double s = std::sqrt(-t);
        core = std::sin(s) / s;
    } else {
        core = 1.0;
    }
    return 2.0 * tau * core / bessel_i0(beta);
}

}  // namespace detail

// Precomputed gridding plan for a fixed coordinate set: per-coordinate
// interpolation taps plus the separable deapodization table. Immutable after
// construction; safe to share across threads.
class NufftPlan {
public:
    NufftPlan(std::vector<KCoord> coords, int n_image, GridConfig cfg = {})
        : coords_(std::move(coords)), n_(n_image), cfg_(cfg) {
        check_coords(coords_);
        g_ = next_pow2(static_cast<int>(std::ceil(cfg_.oversamp * n_)));
        width_ = cfg_.kernel_width;
        if (width_ >= g_) throw config_error("nufft: kernel width must be below the oversampled grid size");
        const double tau = width_ / 2.0;
        const double beta = cfg_.beta();

        deapod_.resize(n_);
        for (int i = 0; i < n_; ++i)
            deapod_[i] = detail::kb_fourier(double(i - n_ / 2) / double(g_), tau, beta);

        taps_.resize(coords_.size());
        for (size_t p = 0; p < coords_.size(); ++p) {
            const double ux = coords_[p].kx * double(g_) / (2.0 * kPi);
            const double uy = coords_[p].ky * double(g_) / (2.0 * kPi);
            Taps& t = taps_[p];
            t.x0 = static_cast<int>(std::floor(ux)) - width_ / 2 + 1;
            t.y0 = static_cast<int>(std::floor(uy)) - width_ / 2 + 1;
            t.wx.resize(width_);
            t.wy.resize(width_);
            for (int i = 0; i < width_; ++i) {
                t.wx[i] = detail::kb_kernel(double(t.x0 + i) - ux, tau, beta);
                t.wy[i] = detail::kb_kernel(double(t.y0 + i) - uy, tau, beta);
            }
        }
    }

    const std::vector<KCoord>& coords() const { return coords_; }
    int n_image() const { return n_; }
    int grid_size() const { return g_; }
    size_t sample_count() const { return coords_.size(); }

    std::vector<cplx> apply(const CImage& x) const {
        if (x.n != n_) throw shape_error("nufft apply: image size does not match plan");
        std::vector<cplx> grid(static_cast<size_t>(g_) * g_, cplx(0, 0));
        embed(x, grid);
        fft2_pow2(grid, g_, false);
        std::vector<cplx> out(coords_.size());
        for (size_t p = 0; p < coords_.size(); ++p) {
            const Taps& t = taps_[p];
            cplx acc(0, 0);
            for (int iy = 0; iy < width_; ++iy) {
                const size_t row = static_cast<size_t>(wrap(t.y0 + iy)) * g_;
                cplx racc(0, 0);
                for (int ix = 0; ix < width_; ++ix) racc += grid[row + wrap(t.x0 + ix)] * t.wx[ix];
                acc += racc * t.wy[iy];
            }
            out[p] = acc;
        }
        return out;
    }

    CImage adjoint(std::span<const cplx> y) const {
        if (y.size() != coords_.size()) throw shape_error("nufft adjoint: sample count mismatch");
        std::vector<cplx> grid(static_cast<size_t>(g_) * g_, cplx(0, 0));
        for (size_t p = 0; p < coords_.size(); ++p) {
            const Taps& t = taps_[p];
            for (int iy = 0; iy < width_; ++iy) {
                const size_t row = static_cast<size_t>(wrap(t.y0 + iy)) * g_;
                const cplx v = y[p] * t.wy[iy];
                for (int ix = 0; ix < width_; ++ix) grid[row + wrap(t.x0 + ix)] += v * t.wx[ix];
            }
        }
        fft2_pow2(grid, g_, true);
        return extract(grid);
    }

private:
    struct Taps {
        int x0 = 0, y0 = 0;
        std::vector<double> wx, wy;
    };

    int wrap(int q) const {
        int m = q % g_;
        return m < 0 ? m + g_ : m;
    }

    void embed(const CImage& x, std::vector<cplx>& grid) const {
        const int h = n_ / 2;
        for (int y = 0; y < n_; ++y) {
            const size_t row = static_cast<size_t>(wrap(y - h)) * g_;
            for (int c = 0; c < n_; ++c)
                grid[row + wrap(c - h)] = x.at(y, c) / (deapod_[y] * deapod_[c]);
        }
    }

    CImage extract(const std::vector<cplx>& grid) const {
        const int h = n_ / 2;
        CImage out(n_);
        for (int y = 0; y < n_; ++y) {
            const size_t row = static_cast<size_t>(wrap(y - h)) * g_;
            for (int c = 0; c < n_; ++c)
                out.at(y, c) = grid[row + wrap(c - h)] / (deapod_[y] * deapod_[c]);
        }
        return out;
    }

    std::vector<KCoord> coords_;
    int n_;
    GridConfig cfg_;
    int g_ = 0;
    int width_ = 0;
    std::vector<double> deapod_;
    std::vector<Taps> taps_;
};

inline std::vector<cplx> nufft_apply(const CImage& x, std::span<const KCoord> coords, GridConfig cfg = {}) {
    return NufftPlan(std::vector<KCoord>(coords.begin(), coords.end()), x.n, cfg).apply(x);
}

inline CImage nufft_adjoint(std::span<const cplx> y, std::span<const KCoord> coords, int n_image,
                            GridConfig cfg = {}) {
    return NufftPlan(std::vector<KCoord>(coords.begin(), coords.end()), n_image, cfg).adjoint(y);
}

}  // namespace tddr
