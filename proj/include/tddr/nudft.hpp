#pragma once

#include <span>
#include <vector>

#include "tddr/image.hpp"
#include "tddr/trajectory.hpp"

namespace tddr {

inline void check_coords(std::span<const KCoord> coords) {
    for (const KCoord& c : coords)
        if (c.kx < -kPi || c.kx >= kPi || c.ky < -kPi || c.ky >= kPi)
            throw config_error("nudft: coordinate outside [-pi, pi)^2");
}

// Exact type-2 nonuniform DFT: y_p = sum_xi x[xi] exp(-j (kx*cx + ky*cy))
// with centered integer pixel coordinates. This is the correctness oracle for
// the gridded fast path; implemented separably (per-axis phase tables).
inline std::vector<cplx> nudft_apply(const CImage& x, std::span<const KCoord> coords) {
    check_coords(coords);
    const int n = x.n;
    const int h = n / 2;
    std::vector<cplx> out(coords.size());
    std::vector<cplx> px(n), py(n);
    for (size_t p = 0; p < coords.size(); ++p) {
        for (int i = 0; i < n; ++i) {
            px[i] = std::polar(1.0, -coords[p].kx * double(i - h));
            py[i] = std::polar(1.0, -coords[p].ky * double(i - h));
        }
        cplx acc(0, 0);
        for (int y = 0; y < n; ++y) {
            cplx row(0, 0);
            const cplx* src = x.v.data() + static_cast<size_t>(y) * n;
            for (int c = 0; c < n; ++c) row += src[c] * px[c];
            acc += row * py[y];
        }
        out[p] = acc;
    }
    return out;
}

// Exact adjoint: x[xi] = sum_p y_p exp(+j (kx*cx + ky*cy)).
inline CImage nudft_adjoint(std::span<const cplx> y, std::span<const KCoord> coords, int n_image) {
    check_coords(coords);
    if (y.size() != coords.size()) throw shape_error("nudft_adjoint: sample/coordinate count mismatch");
    const int n = n_image;
    const int h = n / 2;
    CImage out(n);
    std::vector<cplx> px(n), py(n);
    for (size_t p = 0; p < coords.size(); ++p) {
        for (int i = 0; i < n; ++i) {
            px[i] = std::polar(1.0, coords[p].kx * double(i - h));
            py[i] = std::polar(1.0, coords[p].ky * double(i - h));
        }
        for (int y_i = 0; y_i < n; ++y_i) {
            const cplx row = y[p] * py[y_i];
            cplx* dst = out.v.data() + static_cast<size_t>(y_i) * n;
            for (int c = 0; c < n; ++c) dst[c] += row * px[c];
        }
    }
    return out;
}

}  // namespace tddr
