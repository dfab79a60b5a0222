#pragma once

#include <vector>

#include "tddr/common.hpp"
#include "tddr/tensor.hpp"

namespace tddr {

// Square complex image, row-major, pixel (row y, col x) at v[y*n + x].
// Centered pixel coordinates are cx = x - n/2, cy = y - n/2.
struct CImage {
    int n = 0;
    std::vector<cplx> v;

    CImage() = default;
    explicit CImage(int side) : n(side), v(static_cast<size_t>(side) * side, cplx(0, 0)) {}

    cplx& at(int y, int x) { return v[static_cast<size_t>(y) * n + x]; }
    cplx at(int y, int x) const { return v[static_cast<size_t>(y) * n + x]; }

    bool all_finite() const {
        for (const cplx& z : v)
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
        return true;
    }
};

// A reconstruction target or result: K complex frames on a common grid.
struct FrameSeries {
    int n = 0;
    double dt = 1.0;
    std::vector<CImage> frames;

    int count() const { return static_cast<int>(frames.size()); }
};

inline Tensor cimage_to_tensor(const CImage& img) {
    Tensor t = Tensor::zeros({2, img.n, img.n});
    for (int y = 0; y < img.n; ++y)
        for (int x = 0; x < img.n; ++x) {
            t.at(0, y, x) = img.at(y, x).real();
            t.at(1, y, x) = img.at(y, x).imag();
        }
    return t;
}

inline CImage tensor_to_cimage(const Tensor& t) {
    if (t.rank() != 3 || t.dim(0) != 2 || t.dim(1) != t.dim(2))
        throw shape_error("tensor_to_cimage: expected (2, n, n)");
    CImage img(t.dim(1));
    for (int y = 0; y < img.n; ++y)
        for (int x = 0; x < img.n; ++x) img.at(y, x) = cplx(t.at(0, y, x), t.at(1, y, x));
    return img;
}

inline std::vector<double> magnitude(const CImage& img) {
    std::vector<double> m(img.v.size());
    for (size_t i = 0; i < img.v.size(); ++i) m[i] = std::abs(img.v[i]);
    return m;
}

inline double cnorm(const std::vector<cplx>& v) {
    double s = 0;
    for (const cplx& z : v) s += std::norm(z);
    return std::sqrt(s);
}

inline cplx cdot(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    cplx s(0, 0);
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * std::conj(b[i]);
    return s;
}

}  // namespace tddr
