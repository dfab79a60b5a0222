#pragma once

#include <string>
#include <vector>

#include "tddr/tensor.hpp"

namespace tddr {

struct LatentAnchors {
    std::vector<Tensor> anchors;
    double lo = 0, hi = 0.1;
    std::uint64_t seed = 0;

    int count() const { return static_cast<int>(anchors.size()); }
};

inline LatentAnchors sample_anchors(int count, int channels, int hw, double lo, double hi,
                                    std::uint64_t seed) {
    if (count < 2) throw config_error("sample_anchors: need at least two anchors");
    if (!(lo < hi)) throw config_error("sample_anchors: lo must be below hi");
    LatentAnchors a;
    a.lo = lo;
    a.hi = hi;
    a.seed = seed;
    Rng rng(derive_seed(seed, 0x616e63));
    for (int i = 0; i < count; ++i) a.anchors.push_back(uniform_tensor({channels, hw, hw}, lo, hi, rng));
    return a;
}

// Piecewise-linear latent path: anchors pinned at equi-spaced times over
// [0, K-1], linear interpolation inside each chunk.
struct LatentSchedule {
    LatentAnchors anchors;
    int frames = 0;
    std::vector<double> anchor_times;

    int segment_count() const { return anchors.count() - 1; }
};

inline LatentSchedule make_schedule(LatentAnchors anchors, int frames) {
    if (frames < 2) throw config_error("latent schedule: need at least two frames");
    LatentSchedule s;
    s.frames = frames;
    const int a = anchors.count();
    s.anchors = std::move(anchors);
    s.anchor_times.resize(a);
    for (int i = 0; i < a; ++i) s.anchor_times[i] = double(i) * double(frames - 1) / double(a - 1);
    return s;
}

inline Tensor lerp_tensors(const Tensor& a, const Tensor& b, double alpha) {
    Tensor out = Tensor::zeros(a.shape);
    for (size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = (1.0 - alpha) * a.data[i] + alpha * b.data[i];
    return out;
}

inline Tensor latent_at(double t, const LatentSchedule& s) {
    if (t < 0 || t > double(s.frames - 1))
        throw config_error("latent_at: time outside [0, K-1]; use scenario latents to extrapolate");
    const int segs = s.segment_count();
    int seg = static_cast<int>(std::floor(t * double(segs) / double(s.frames - 1)));
    if (seg >= segs) seg = segs - 1;
    // step back when floating-point rounding lands us just past an anchor
    if (t < s.anchor_times[seg] && seg > 0) --seg;
    const double t0 = s.anchor_times[seg], t1 = s.anchor_times[seg + 1];
    const double alpha = (t - t0) / (t1 - t0);
    return lerp_tensors(s.anchors.anchors[seg], s.anchors.anchors[seg + 1], alpha);
}

enum class ScenarioKind {
    FineInterpolation,
    Extrapolation,
    FreshRandom,
    Perturbed,
    Scalar,
    IndependentPerFrame,
};

inline ScenarioKind scenario_kind_from_name(const std::string& name) {
    if (name == "fine-interpolation") return ScenarioKind::FineInterpolation;
    if (name == "extrapolation") return ScenarioKind::Extrapolation;
    if (name == "fresh-random") return ScenarioKind::FreshRandom;
    if (name == "perturbed") return ScenarioKind::Perturbed;
    if (name == "scalar") return ScenarioKind::Scalar;
    if (name == "independent-per-frame") return ScenarioKind::IndependentPerFrame;
    throw config_error("unknown scenario kind: " + name);
}

struct ScenarioParams {
    std::vector<double> times;    // evaluation times; defaults to 0..K-1 when empty
    double perturb_energy = 0.10;  // squared-norm ratio of added noise
};

// Latent sequences for the evaluation scenarios. Extrapolation continues the
// terminal segment's slope; perturbation adds uniform noise rescaled to the
// requested energy ratio; scalar/independent draw fresh uniform latents.
inline std::vector<Tensor> scenario_latents(ScenarioKind kind, const LatentSchedule& s,
                                            const ScenarioParams& params, std::uint64_t seed) {
    std::vector<double> times = params.times;
    if (times.empty()) {
        times.resize(s.frames);
        for (int i = 0; i < s.frames; ++i) times[i] = i;
    }
    std::vector<Tensor> out;
    out.reserve(times.size());
    Rng rng(derive_seed(seed, 0x7363656e));
    const std::vector<int> shape = s.anchors.anchors[0].shape;

    switch (kind) {
        case ScenarioKind::FineInterpolation:
            for (double t : times) out.push_back(latent_at(t, s));
            break;
        case ScenarioKind::Extrapolation:
            for (double t : times) {
                if (t >= 0 && t <= double(s.frames - 1)) {
                    out.push_back(latent_at(t, s));
                    continue;
                }
                const bool below = t < 0;
                const int seg = below ? 0 : s.segment_count() - 1;
                const double t0 = s.anchor_times[seg], t1 = s.anchor_times[seg + 1];
                const double alpha = (t - t0) / (t1 - t0);
                out.push_back(lerp_tensors(s.anchors.anchors[seg], s.anchors.anchors[seg + 1], alpha));
            }
            break;
        case ScenarioKind::FreshRandom: {
            LatentAnchors fresh = sample_anchors(s.anchors.count(), shape[0], shape[1], s.anchors.lo,
                                                 s.anchors.hi, derive_seed(seed, 0x66726573));
            LatentSchedule alt = make_schedule(std::move(fresh), s.frames);
            for (double t : times) out.push_back(latent_at(t, alt));
            break;
        }
        case ScenarioKind::Perturbed:
            for (double t : times) {
                Tensor z = latent_at(t, s);
                if (params.perturb_energy > 0) {
                    Tensor noise = Tensor::zeros(z.shape);
                    for (double& v : noise.data) v = rng.uniform(-1.0, 1.0);
                    const double nn = norm2(noise);
                    const double target = std::sqrt(params.perturb_energy) * norm2(z);
                    if (nn > 0)
                        for (size_t i = 0; i < z.data.size(); ++i)
                            z.data[i] += noise.data[i] * (target / nn);
                }
                out.push_back(std::move(z));
            }
            break;
        case ScenarioKind::Scalar: {
            LatentAnchors scalar = sample_anchors(s.anchors.count(), shape[0], 1, s.anchors.lo,
                                                  s.anchors.hi, derive_seed(seed, 0x7363616c));
            LatentSchedule alt = make_schedule(std::move(scalar), s.frames);
            for (double t : times) out.push_back(latent_at(t, alt));
            break;
        }
        case ScenarioKind::IndependentPerFrame:
            for (size_t i = 0; i < times.size(); ++i)
                out.push_back(uniform_tensor(shape, s.anchors.lo, s.anchors.hi, rng));
            break;
    }
    return out;
}

}  // namespace tddr
