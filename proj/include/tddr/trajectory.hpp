#pragma once

#include <vector>

#include "tddr/common.hpp"

namespace tddr {

struct KCoord {
    double kx = 0;  // pairs with the centered column coordinate
    double ky = 0;  // pairs with the centered row coordinate
};

struct TrajectoryConfig {
    double theta0 = 0.0;
    double dtheta = kGoldenAngleRad;
    double dt = 1.0;  // spoke period, metadata only; spoke times are the integer index
    int n_image = 64;
    int m_omega = 128;  // readout samples per spoke, must be 2 * n_image

    void validate() const {
        if (n_image <= 0) throw config_error("trajectory: n_image must be positive");
        if (m_omega != 2 * n_image)
            throw config_error("trajectory: m_omega must equal 2 * n_image (two-fold readout oversampling)");
    }

    static TrajectoryConfig for_grid(int n_image) {
        TrajectoryConfig cfg;
        cfg.n_image = n_image;
        cfg.m_omega = 2 * n_image;
        return cfg;
    }
};

inline double spoke_angle(long long k, const TrajectoryConfig& cfg) {
    if (k < 0) throw config_error("spoke_angle: negative spoke index");
    double a = std::fmod(cfg.theta0 + double(k) * cfg.dtheta, 2.0 * kPi);
    if (a < 0) a += 2.0 * kPi;
    return a;
}

// m_omega points along the spoke: radius w_m = pi*(m - m_omega/2)/n_image, so
// the readout covers [-pi, pi) with spacing pi/n_image (2x Cartesian density)
// and always samples DC at m = m_omega/2.
inline std::vector<KCoord> radial_coords(double angle, const TrajectoryConfig& cfg) {
    cfg.validate();
    std::vector<KCoord> coords(cfg.m_omega);
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    for (int m = 0; m < cfg.m_omega; ++m) {
        const double w = kPi * double(m - cfg.m_omega / 2) / double(cfg.n_image);
        coords[m] = {w * c, w * s};
    }
    return coords;
}

// Spoke-sharing window: the n nearest indices around k0, one-sided at the
// stream boundaries so the window always has exactly n members.
inline std::vector<int> window_indices(int k0, int n, int K) {
    if (n % 2 == 0) throw config_error("window_indices: n must be odd");
    if (n > K) throw config_error("window_indices: n exceeds available spokes");
    if (k0 < 0 || k0 >= K) throw config_error("window_indices: center outside [0, K)");
    int lo = k0 - (n - 1) / 2;
    if (lo < 0) lo = 0;
    if (lo + n > K) lo = K - n;
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = lo + i;
    return idx;
}

// Ramp (|w|) density compensation for backprojection; the DC sample gets a
// quarter of the smallest nonzero radius so no row is nulled.
inline std::vector<double> density_weights(const TrajectoryConfig& cfg) {
    cfg.validate();
    std::vector<double> w(cfg.m_omega);
    const double wmin = kPi / double(cfg.n_image);
    for (int m = 0; m < cfg.m_omega; ++m) {
        const double r = std::abs(kPi * double(m - cfg.m_omega / 2) / double(cfg.n_image));
        w[m] = (m == cfg.m_omega / 2) ? wmin / 4.0 : r;
    }
    return w;
}

}  // namespace tddr
