#pragma once

#include <functional>

#include "tddr/metrics.hpp"
#include "tddr/recon_dip.hpp"

namespace tddr {

struct SweepRow {
    int latent_size = 0;
    double mean_rsnr_db = 0;
    double temporal_std = 0;
};

struct SweepProtocol {
    const SpokeStream* stream = nullptr;
    const CoilMaps* coils = nullptr;
    DipConfig base;                                 // latent_hw/stages overridden per size
    std::function<CImage(double)> truth_at;         // ground truth at a frame time
};

// Derives the stage count so every latent size maps onto the same output
// grid; sizes must divide the grid side into a power of two.
inline int stages_for(int latent_hw, int n_image) {
    int stages = 0;
    int side = latent_hw;
    while (side < n_image) {
        side *= 2;
        ++stages;
    }
    if (side != n_image)
        throw config_error("sweep: latent size " + std::to_string(latent_hw) +
                           " cannot reach grid side " + std::to_string(n_image));
    return stages;
}

inline DipRun sweep_cell(const SweepProtocol& proto, int size) {
    DipConfig cfg = proto.base;
    cfg.gen.latent_hw = size;
    cfg.gen.stages = stages_for(size, proto.coils->n);
    return dip_train(*proto.stream, *proto.coils, cfg);
}

// Shared-protocol latent-size sweep: same stream, seeds, and schedule shape
// for every size; reports mean RSNR against the truth provider.
inline std::vector<SweepRow> sweep_latent_size(const std::vector<int>& sizes,
                                               const SweepProtocol& proto,
                                               std::vector<DipRun>* runs_out = nullptr) {
    std::vector<SweepRow> rows;
    for (int size : sizes) {
        DipRun run = sweep_cell(proto, size);
        FrameSeries est = dip_infer(run.params, run.latents, run.windows.times);
        FrameSeries truth;
        truth.n = proto.coils->n;
        for (double t : run.windows.times) truth.frames.push_back(proto.truth_at(t));
        SweepRow row;
        row.latent_size = size;
        row.mean_rsnr_db = rsnr_series(truth, est).mean_db;
        row.temporal_std = temporal_std(est).mean;
        rows.push_back(row);
        if (runs_out) runs_out->push_back(std::move(run));
    }
    return rows;
}

}  // namespace tddr
