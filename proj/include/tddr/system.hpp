#pragma once

#include <memory>
#include <span>
#include <vector>

#include "tddr/nufft.hpp"

namespace tddr {

// Which evaluation route the k-space sampling takes. The exact route is the
// oracle (and the default for simulation, so reconstruction never inverts the
// operator it was simulated with); the gridded route is the fast path.
enum class FourierPath { Exact, Gridded };

struct Spoke {
    int index = 0;
    double angle = 0;
    // coil-major: samples[c * m_omega + m]
    std::vector<cplx> samples;
};

struct SpokeStream {
    TrajectoryConfig traj;
    int coils = 1;
    std::vector<Spoke> spokes;

    int count() const { return static_cast<int>(spokes.size()); }

    std::span<const cplx> coil_samples(int k, int c) const {
        const Spoke& s = spokes[k];
        return {s.samples.data() + static_cast<size_t>(c) * traj.m_omega,
                static_cast<size_t>(traj.m_omega)};
    }

    void validate() const {
        traj.validate();
        for (int k = 0; k < count(); ++k) {
            if (spokes[k].index != k) throw shape_error("spoke stream: indices must be contiguous from 0");
            if (spokes[k].samples.size() != static_cast<size_t>(coils) * traj.m_omega)
                throw shape_error("spoke stream: sample length must be coils * m_omega");
        }
    }
};

struct CoilMaps {
    int n = 0;
    std::vector<CImage> maps;

    int count() const { return static_cast<int>(maps.size()); }

    // root-sum-of-squares magnitude per pixel
    std::vector<double> rss() const {
        std::vector<double> r(static_cast<size_t>(n) * n, 0.0);
        for (const CImage& m : maps)
            for (size_t i = 0; i < r.size(); ++i) r[i] += std::norm(m.v[i]);
        for (double& v : r) v = std::sqrt(v);
        return r;
    }
};

// Spoke-sharing window around one frame: member spoke indices plus their
// k-space coordinates, concatenated member by member.
struct SystemWindow {
    int center = 0;
    std::vector<int> members;
    std::vector<KCoord> coords;  // members.size() * m_omega entries
};

inline SystemWindow make_window(int k0, int n_window, const SpokeStream& stream) {
    SystemWindow w;
    w.center = k0;
    w.members = window_indices(k0, n_window, stream.count());
    w.coords.reserve(w.members.size() * stream.traj.m_omega);
    for (int k : w.members) {
        auto c = radial_coords(stream.spokes[k].angle, stream.traj);
        w.coords.insert(w.coords.end(), c.begin(), c.end());
    }
    return w;
}

inline SystemWindow make_window_from_members(std::vector<int> members, const SpokeStream& stream) {
    SystemWindow w;
    w.center = members.empty() ? 0 : members[members.size() / 2];
    w.members = std::move(members);
    w.coords.reserve(w.members.size() * stream.traj.m_omega);
    for (int k : w.members) {
        auto c = radial_coords(stream.spokes[k].angle, stream.traj);
        w.coords.insert(w.coords.end(), c.begin(), c.end());
    }
    return w;
}

// The time-dependent multi-coil acquisition operator for one window:
//   apply:   per coil c, A(coil_c . x) over the window's coordinates
//   adjoint: sum_c conj(coil_c) . A^H(y_c)
// Holds one gridding plan over the concatenated coordinates.
class SystemOperator {
public:
    SystemOperator(SystemWindow window, const CoilMaps& coils, FourierPath path = FourierPath::Gridded,
                   GridConfig grid = {})
        : window_(std::move(window)), coils_(&coils), path_(path) {
        if (coils.count() < 1) throw shape_error("system operator: at least one coil required");
        plan_ = std::make_shared<NufftPlan>(window_.coords, coils.n, grid);
    }

    const SystemWindow& window() const { return window_; }
    const NufftPlan& plan() const { return *plan_; }
    int coil_count() const { return coils_->count(); }
    size_t samples_per_coil() const { return window_.coords.size(); }

    std::vector<std::vector<cplx>> apply(const CImage& x) const {
        if (x.n != coils_->n) throw shape_error("system operator: image size mismatch");
        std::vector<std::vector<cplx>> out(coils_->count());
        for (int c = 0; c < coils_->count(); ++c) {
            CImage weighted(x.n);
            const CImage& map = coils_->maps[c];
            for (size_t i = 0; i < x.v.size(); ++i) weighted.v[i] = map.v[i] * x.v[i];
            out[c] = (path_ == FourierPath::Exact) ? nudft_apply(weighted, window_.coords)
                                                   : plan_->apply(weighted);
        }
        return out;
    }

    CImage adjoint(const std::vector<std::vector<cplx>>& y) const {
        if (y.size() != static_cast<size_t>(coils_->count()))
            throw shape_error("system operator: coil count mismatch");
        CImage acc(coils_->n);
        for (int c = 0; c < coils_->count(); ++c) {
            if (y[c].size() != window_.coords.size())
                throw shape_error("system operator: sample count mismatch");
            CImage back = (path_ == FourierPath::Exact)
                              ? nudft_adjoint(y[c], window_.coords, coils_->n)
                              : plan_->adjoint(y[c]);
            const CImage& map = coils_->maps[c];
            for (size_t i = 0; i < acc.v.size(); ++i) acc.v[i] += std::conj(map.v[i]) * back.v[i];
        }
        return acc;
    }

private:
    SystemWindow window_;
    const CoilMaps* coils_;
    FourierPath path_;
    std::shared_ptr<NufftPlan> plan_;
};

inline std::vector<std::vector<cplx>> apply_system(const CImage& x, const SystemWindow& window,
                                                   const CoilMaps& coils,
                                                   FourierPath path = FourierPath::Gridded) {
    return SystemOperator(window, coils, path).apply(x);
}

inline CoilMaps unit_coil_maps(int n) {
    CoilMaps cm;
    cm.n = n;
    cm.maps.emplace_back(n);
    for (cplx& v : cm.maps[0].v) v = cplx(1, 0);
    return cm;
}

}  // namespace tddr
