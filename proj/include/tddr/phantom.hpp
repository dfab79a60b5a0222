#pragma once

#include <functional>
#include <vector>

#include "tddr/system.hpp"

namespace tddr {

// Analytic dynamic phantom: static background ellipses plus a contracting
// ring, all with smoothstep edges, under a smooth spatial phase roll. Frames
// are evaluated analytically at any real time, which gives exact ground truth
// for sub-frame interpolation tests.
struct PhantomConfig {
    int n_image = 64;
    int frames = 20;
    double center_x = 0.0, center_y = 0.0;  // heart center, in units of half-side
    double outer_radius = 0.30;             // ring outer radius, units of half-side
    double inner_radius = 0.18;             // resting inner radius
    double contraction = 0.25;              // fractional inner-radius modulation depth
    double beats = 2.0;                     // cycles over the K frames
    double jitter = 0.0;                    // cycle-to-cycle phase jitter amplitude (radians)
    double ring_value = 1.0;
    double blood_value = 0.45;              // inside the ring
    double phase_roll = 1.2;                // spatial phase roll strength (radians across the FOV)
    double edge_width = 0.035;              // smoothstep transition width, units of half-side
    std::uint64_t seed = 1;

    struct Ellipse {
        double cx, cy, rx, ry, value;
    };
    std::vector<Ellipse> background{
        {0.0, 0.0, 0.92, 0.92, 0.30},    // body
        {-0.52, 0.38, 0.26, 0.20, 0.55},  // organ blob
        {0.50, -0.45, 0.18, 0.26, 0.70},  // organ blob
    };

    void validate() const {
        if (n_image < 8) throw config_error("phantom: n_image too small");
        if (frames < 1) throw config_error("phantom: need at least one frame");
        if (inner_radius <= 0 || outer_radius <= inner_radius)
            throw config_error("phantom: degenerate ring radii");
        if (contraction < 0 || contraction >= 1) throw config_error("phantom: contraction out of range");
        if (inner_radius * (1.0 - contraction) <= 0) throw config_error("phantom: radius collapses");
        if (jitter >= contraction + 1e-12 && jitter > 0)
            throw config_error("phantom: jitter must stay below the contraction depth");
    }
};

namespace detail {

inline double smoothstep01(double e0, double e1, double x) {
    if (x <= e0) return 0.0;
    if (x >= e1) return 1.0;
    const double t = (x - e0) / (e1 - e0);
    return t * t * (3.0 - 2.0 * t);
}

// coverage ~1 inside (dist < r - w), ~0 outside (dist > r + w)
inline double soft_disc(double dist, double r, double w) {
    return 1.0 - smoothstep01(r - w, r + w, dist);
}

// Smooth per-beat phase jitter: uniform offsets hashed from the beat index,
// cosine-blended between consecutive beats.
inline double beat_jitter(double beat_phase, double amplitude, std::uint64_t seed) {
    if (amplitude == 0) return 0.0;
    auto offset = [&](long long b) {
        std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL * std::uint64_t(b + 0x10000));
        const std::uint64_t r = splitmix64(s);
        return amplitude * (2.0 * (double(r >> 11) * 0x1.0p-53) - 1.0);
    };
    const long long b = static_cast<long long>(std::floor(beat_phase));
    const double frac = beat_phase - double(b);
    const double blend = 0.5 - 0.5 * std::cos(kPi * frac);
    return (1.0 - blend) * offset(b) + blend * offset(b + 1);
}

}  // namespace detail

inline double phantom_inner_radius(const PhantomConfig& cfg, double t) {
    const double beat_phase = cfg.beats * t / double(cfg.frames);
    const double jitter = detail::beat_jitter(beat_phase, cfg.jitter, cfg.seed);
    const double c = std::cos(2.0 * kPi * beat_phase + jitter);
    return cfg.inner_radius * (1.0 - cfg.contraction * (0.5 + 0.5 * c));
}

inline CImage phantom_frame(const PhantomConfig& cfg, double t) {
    cfg.validate();
    const int n = cfg.n_image;
    CImage img(n);
    const double half = n / 2.0;
    const double w = cfg.edge_width;
    const double r_in = phantom_inner_radius(cfg, t);

    for (int y = 0; y < n; ++y) {
        const double py = (y - half + 0.5) / half;
        for (int x = 0; x < n; ++x) {
            const double px = (x - half + 0.5) / half;
            double v = 0;
            for (const auto& e : cfg.background) {
                const double d = std::sqrt(sqr((px - e.cx) / e.rx) + sqr((py - e.cy) / e.ry));
                v += e.value * detail::soft_disc(d, 1.0, w / std::min(e.rx, e.ry));
            }
            const double dh = std::sqrt(sqr(px - cfg.center_x) + sqr(py - cfg.center_y));
            const double outer = detail::soft_disc(dh, cfg.outer_radius, w);
            const double inner = detail::soft_disc(dh, r_in, w);
            v += cfg.ring_value * (outer - inner);  // myocardium ring
            v += cfg.blood_value * inner;           // blood pool
            const double phase = cfg.phase_roll * (0.6 * px + 0.35 * py + 0.25 * px * py);
            img.at(y, x) = std::polar(v, phase);
        }
    }
    return img;
}

inline FrameSeries make_cine_phantom(const PhantomConfig& cfg) {
    cfg.validate();
    FrameSeries s;
    s.n = cfg.n_image;
    s.dt = 1.0;
    s.frames.reserve(cfg.frames);
    for (int k = 0; k < cfg.frames; ++k) s.frames.push_back(phantom_frame(cfg, double(k)));
    return s;
}

// C smooth synthetic sensitivities: Gaussian magnitude bumps centered on
// evenly spaced boundary points with per-coil linear phase ramps. C = 1
// yields the identity map so single-coil tests see an unweighted system.
inline CoilMaps make_coil_maps(int coil_count, int n_image, std::uint64_t seed) {
    if (coil_count < 1) throw config_error("make_coil_maps: need at least one coil");
    CoilMaps cm;
    cm.n = n_image;
    if (coil_count == 1) return unit_coil_maps(n_image);

    Rng rng(derive_seed(seed, 0x636f696c));
    const double half = n_image / 2.0;
    const double sigma = 0.85;  // of half-side; keeps RSS well above zero everywhere
    for (int c = 0; c < coil_count; ++c) {
        const double ang = 2.0 * kPi * c / coil_count;
        const double bx = 1.05 * std::cos(ang);
        const double by = 1.05 * std::sin(ang);
        const double ramp_x = rng.uniform(-1.2, 1.2);
        const double ramp_y = rng.uniform(-1.2, 1.2);
        const double phase0 = rng.uniform(0, 2.0 * kPi);
        CImage map(n_image);
        for (int y = 0; y < n_image; ++y) {
            const double py = (y - half + 0.5) / half;
            for (int x = 0; x < n_image; ++x) {
                const double px = (x - half + 0.5) / half;
                const double mag = std::exp(-(sqr(px - bx) + sqr(py - by)) / (2.0 * sqr(sigma)));
                const double ph = phase0 + ramp_x * px + ramp_y * py;
                map.at(y, x) = std::polar(mag, ph);
            }
        }
        cm.maps.push_back(std::move(map));
    }
    return cm;
}

enum class SimulationMode { Continuous, Retrospective };

struct SimulationConfig {
    SimulationMode mode = SimulationMode::Continuous;
    int spokes = 0;            // continuous: total spokes (= frame count when 0 -> provider frames)
    int phases = 23;           // retrospective
    int spokes_per_phase = 13;  // retrospective
    double noise_sigma = 0.0;  // absolute std of complex white noise per sample
    std::uint64_t seed = 1;
    FourierPath path = FourierPath::Exact;  // simulate on the oracle route by default
};

// Samples one spoke per time index from a time-resolved image provider. In
// continuous mode each spoke sees the image at its own instant; in
// retrospective mode the image is frozen per phase while the golden-angle
// schedule keeps advancing.
inline SpokeStream simulate_stream(const std::function<CImage(double)>& image_at,
                                   const TrajectoryConfig& traj, const CoilMaps& coils,
                                   const SimulationConfig& sim) {
    traj.validate();
    SpokeStream stream;
    stream.traj = traj;
    stream.coils = coils.count();

    const int total = sim.mode == SimulationMode::Continuous ? sim.spokes
                                                             : sim.phases * sim.spokes_per_phase;
    if (total <= 0) throw config_error("simulate_stream: nonpositive spoke count");

    Rng noise(derive_seed(sim.seed, 0x6e6f6973));
    for (int k = 0; k < total; ++k) {
        const double t = sim.mode == SimulationMode::Continuous ? double(k)
                                                                : double(k / sim.spokes_per_phase);
        const CImage frame = image_at(t);
        if (frame.n != traj.n_image) throw shape_error("simulate_stream: frame size mismatch");

        Spoke spoke;
        spoke.index = k;
        spoke.angle = spoke_angle(k, traj);
        SystemWindow w;
        w.center = k;
        w.members = {k};
        w.coords = radial_coords(spoke.angle, traj);
        auto per_coil = apply_system(frame, w, coils, sim.path);
        spoke.samples.reserve(static_cast<size_t>(coils.count()) * traj.m_omega);
        for (int c = 0; c < coils.count(); ++c)
            for (int m = 0; m < traj.m_omega; ++m) {
                cplx v = per_coil[c][m];
                if (sim.noise_sigma > 0)
                    v += cplx(sim.noise_sigma * noise.normal(), sim.noise_sigma * noise.normal());
                spoke.samples.push_back(v);
            }
        stream.spokes.push_back(std::move(spoke));
    }
    return stream;
}

inline SpokeStream simulate_stream(const FrameSeries& series, const TrajectoryConfig& traj,
                                   const CoilMaps& coils, SimulationConfig sim) {
    if (sim.mode == SimulationMode::Continuous && sim.spokes == 0) sim.spokes = series.count();
    auto provider = [&series](double t) -> CImage {
        long long k = llround(t);
        if (k < 0) k = 0;
        if (k >= series.count()) k = series.count() - 1;
        return series.frames[static_cast<size_t>(k)];
    };
    return simulate_stream(provider, traj, coils, sim);
}

}  // namespace tddr
