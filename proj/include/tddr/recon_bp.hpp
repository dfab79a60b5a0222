#pragma once

#include "tddr/recon_common.hpp"

namespace tddr {

namespace detail {

// Density-weighted adjoint over one window, combined across coils.
inline CImage backproject_window(const SpokeStream& stream, const CoilMaps& coils,
                                 const std::vector<int>& members, FourierPath path) {
    const std::vector<double> ramp = density_weights(stream.traj);
    SystemWindow w = make_window_from_members(members, stream);
    SystemOperator op(w, coils, path);
    auto samples = gather_window_samples(stream, members);
    for (auto& coil_vec : samples)
        for (size_t i = 0; i < coil_vec.size(); ++i) coil_vec[i] *= ramp[i % ramp.size()];

    // SystemOperator::adjoint already applies the conjugate coil maps; divide
    // by the RSS magnitude to finish the combination.
    CImage acc = op.adjoint(samples);
    const std::vector<double> rss = coils.rss();
    for (size_t i = 0; i < acc.v.size(); ++i) acc.v[i] /= std::max(rss[i], 1e-12);
    return acc;
}

}  // namespace detail

inline ReconResult bp_reconstruct(const SpokeStream& stream, const CoilMaps& coils, int n_window,
                                  const FrameWindows* windows = nullptr,
                                  FourierPath path = FourierPath::Gridded) {
    stream.validate();
    FrameWindows w = windows ? *windows : FrameWindows::sliding(stream.count(), n_window);
    ReconResult r;
    r.method = "bp";
    r.times = w.times;
    r.series.n = coils.n;
    r.series.dt = stream.traj.dt;
    for (int f = 0; f < w.count(); ++f)
        r.series.frames.push_back(detail::backproject_window(stream, coils, w.members[f], path));
    return r;
}

// Overlap image: backprojection of every spoke in the stream as one window.
// A static reference; equals BP when the window spans the whole stream.
inline ReconResult ov_reconstruct(const SpokeStream& stream, const CoilMaps& coils,
                                  FourierPath path = FourierPath::Gridded) {
    stream.validate();
    std::vector<int> all(stream.count());
    for (int k = 0; k < stream.count(); ++k) all[k] = k;
    ReconResult r;
    r.method = "ov";
    r.times = {double(stream.count() - 1) / 2.0};
    r.series.n = coils.n;
    r.series.dt = stream.traj.dt;
    r.series.frames.push_back(detail::backproject_window(stream, coils, all, path));
    return r;
}

}  // namespace tddr
