#pragma once

#include <string>
#include <vector>

#include "tddr/system.hpp"

namespace tddr {

// Frame layout over a spoke stream. Sliding windows share neighboring spokes
// (one frame per spoke); binned windows split the stream into disjoint
// n-spoke groups (no sharing, one frame per group).
struct FrameWindows {
    std::vector<double> times;              // frame time on the stream's index axis
    std::vector<std::vector<int>> members;  // spoke indices per frame

    int count() const { return static_cast<int>(times.size()); }

    static FrameWindows sliding(int spoke_count, int n) {
        FrameWindows w;
        for (int k = 0; k < spoke_count; ++k) {
            w.times.push_back(double(k));
            w.members.push_back(window_indices(k, n, spoke_count));
        }
        return w;
    }

    static FrameWindows binned(int spoke_count, int n) {
        if (n < 1 || n > spoke_count) throw config_error("frame windows: invalid bin size");
        FrameWindows w;
        const int frames = spoke_count / n;
        if (frames < 1) throw config_error("frame windows: no complete bins");
        for (int f = 0; f < frames; ++f) {
            std::vector<int> m(n);
            for (int i = 0; i < n; ++i) m[i] = f * n + i;
            w.times.push_back(double(f * n + (n - 1) / 2));
            w.members.push_back(std::move(m));
        }
        return w;
    }

    // Retrospective phases: frames indexed by phase, disjoint bins of
    // spokes_per_phase spokes, times on the phase axis.
    static FrameWindows phases(int spoke_count, int spokes_per_phase) {
        FrameWindows w = binned(spoke_count, spokes_per_phase);
        for (int f = 0; f < w.count(); ++f) w.times[f] = double(f);
        return w;
    }
};

struct ReconResult {
    FrameSeries series;
    std::vector<double> times;
    std::vector<double> loss_trace;
    std::string method;
    std::string config_text;
    std::uint64_t seed = 0;
    double wall_seconds = 0;
};

// Conjugate-map coil combination with root-sum-of-squares normalization.
inline CImage combine_coils(const std::vector<CImage>& per_coil, const CoilMaps& coils) {
    CImage out(coils.n);
    const std::vector<double> rss = coils.rss();
    for (int c = 0; c < coils.count(); ++c)
        for (size_t i = 0; i < out.v.size(); ++i)
            out.v[i] += std::conj(coils.maps[c].v[i]) * per_coil[c].v[i];
    for (size_t i = 0; i < out.v.size(); ++i) out.v[i] /= std::max(rss[i], 1e-12);
    return out;
}

// Per-coil measurement targets for one window, gathered from the stream.
inline std::vector<std::vector<cplx>> gather_window_samples(const SpokeStream& stream,
                                                            const std::vector<int>& members) {
    std::vector<std::vector<cplx>> out(stream.coils);
    for (int c = 0; c < stream.coils; ++c) {
        out[c].reserve(members.size() * stream.traj.m_omega);
        for (int k : members) {
            auto s = stream.coil_samples(k, c);
            out[c].insert(out[c].end(), s.begin(), s.end());
        }
    }
    return out;
}

}  // namespace tddr
