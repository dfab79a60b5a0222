#pragma once

#include <algorithm>
#include <memory>

#include "tddr/adam.hpp"
#include "tddr/generator.hpp"
#include "tddr/latents.hpp"
#include "tddr/recon_common.hpp"

namespace tddr {

// The latent input to the generator over the frame axis: either the
// piecewise-linear interpolated schedule or a fixed per-frame list (the
// non-smooth ablation control).
struct LatentPlan {
    enum class Kind { Interpolated, PerFrame };
    Kind kind = Kind::Interpolated;
    LatentSchedule schedule;
    std::vector<Tensor> per_frame;

    int frames() const {
        return kind == Kind::Interpolated ? schedule.frames : static_cast<int>(per_frame.size());
    }

    Tensor at(double t) const {
        if (kind == Kind::Interpolated) return latent_at(t, schedule);
        const long long k = llround(t);
        if (k < 0 || k >= static_cast<long long>(per_frame.size()))
            throw config_error("latent plan: frame index out of range");
        return per_frame[static_cast<size_t>(k)];
    }
};

struct DipConfig {
    int iterations = 10000;
    double lr = 1e-3;
    int lr_halve_every = 2000;  // 0 disables the schedule
    int batch = 1;              // frames per iteration
    int n_window = 5;
    bool binned_windows = false;  // retrospective phases instead of sliding windows
    GeneratorConfig gen;
    int latent_segments = 1;  // anchors = segments + 1
    double latent_lo = 0.0;
    double latent_hi = 0.1;
    std::uint64_t seed = 1;
    FourierPath path = FourierPath::Gridded;
    AdamConfig adam;

    void validate() const {
        gen.validate();
        if (iterations < 1) throw config_error("dip: iterations must be positive");
        if (lr <= 0) throw config_error("dip: learning rate must be positive");
        if (batch < 1) throw config_error("dip: batch must be at least one frame");
        if (n_window % 2 == 0) throw config_error("dip: spoke window must be odd");
        if (latent_segments < 1) throw config_error("dip: need at least one latent segment");
    }

    double lr_at(int iteration) const {
        if (lr_halve_every <= 0) return lr;
        return lr * std::pow(0.5, double(iteration / lr_halve_every));
    }
};

struct DipRun {
    GeneratorParams params;
    LatentPlan latents;
    std::vector<double> loss_trace;
    FrameWindows windows;
};

// Fits the generator to the stream: per iteration, sample frames (epoch-wise
// shuffling without replacement), build their interpolated latents, record
// generate -> coil-weight -> windowed transform -> squared loss, and take one
// Adam step at the scheduled rate.
inline DipRun dip_train_with_latents(const SpokeStream& stream, const CoilMaps& coils,
                                     const DipConfig& cfg, LatentPlan plan) {
    cfg.validate();
    stream.validate();
    if (stream.count() < cfg.n_window) throw config_error("dip: fewer spokes than the window size");
    if (cfg.gen.output_hw() != coils.n || coils.n != stream.traj.n_image)
        throw config_error("dip: generator output, coil maps and trajectory grid must agree");

    FrameWindows windows = cfg.binned_windows
                               ? FrameWindows::phases(stream.count(), cfg.n_window)
                               : FrameWindows::sliding(stream.count(), cfg.n_window);
    const int F = windows.count();
    if (plan.frames() != F) throw config_error("dip: latent plan frame count mismatch");
    if (cfg.batch > F) throw config_error("dip: batch exceeds frame count");

    // per-frame plans and measurement targets, fixed for the whole run
    std::vector<std::shared_ptr<const NufftPlan>> plans;
    std::vector<std::vector<Tensor>> targets(F);
    for (int f = 0; f < F; ++f) {
        SystemWindow w = make_window_from_members(windows.members[f], stream);
        plans.push_back(std::make_shared<NufftPlan>(std::move(w.coords), coils.n, GridConfig{}));
        auto samples = gather_window_samples(stream, windows.members[f]);
        for (int c = 0; c < stream.coils; ++c)
            targets[f].push_back(Tape::measurements_to_tensor(samples[c]));
    }
    std::vector<Tensor> coil_tensors;
    for (int c = 0; c < coils.count(); ++c) coil_tensors.push_back(cimage_to_tensor(coils.maps[c]));

    GeneratorParams params = init_generator(cfg.gen, cfg.seed);
    std::vector<Tensor*> param_ptrs = params.tensors();
    const std::vector<std::string> param_names = params.tensor_names();
    AdamState adam;
    {
        std::vector<Tensor> proto;
        for (Tensor* p : param_ptrs) proto.push_back(*p);
        adam = AdamState::for_params(proto, cfg.adam);
    }

    Rng shuffle_rng(derive_seed(cfg.seed, 0x73687566));
    std::vector<int> order(F);
    for (int f = 0; f < F; ++f) order[f] = f;
    size_t cursor = order.size();  // forces a shuffle on first use

    std::vector<double> trace;
    trace.reserve(cfg.iterations);

    for (int it = 0; it < cfg.iterations; ++it) {
        Tape tape;
        GeneratorOnTape bound = push_generator_params(tape, params, true);
        std::vector<int> losses;
        for (int b = 0; b < cfg.batch; ++b) {
            if (cursor >= order.size()) {
                for (size_t i = order.size(); i > 1; --i)
                    std::swap(order[i - 1], order[shuffle_rng.next_u64() % i]);
                cursor = 0;
            }
            const int f = order[cursor++];
            const int out = generate(tape, cfg.gen, bound, plan.at(windows.times[f]));
            for (int c = 0; c < stream.coils; ++c) {
                const int weighted = tape.complex_pixmul(out, coil_tensors[c]);
                const int meas = tape.nudft_layer(weighted, plans[f], cfg.path);
                losses.push_back(tape.l2_loss(meas, targets[f][c]));
            }
        }
        const int loss = tape.add_n(losses);
        const double loss_value = tape.value(loss).data[0];
        if (!std::isfinite(loss_value))
            throw numeric_error("dip: non-finite loss at iteration " + std::to_string(it));
        trace.push_back(loss_value);

        std::vector<Tensor> grads = tape.backward(loss);
        std::vector<Tensor> param_grads;
        param_grads.reserve(bound.param_ids.size());
        for (size_t p = 0; p < bound.param_ids.size(); ++p) {
            Tensor& g = grads[bound.param_ids[p]];
            param_grads.push_back(g.data.empty() ? Tensor::zeros(param_ptrs[p]->shape) : std::move(g));
        }
        try {
            adam_step(param_ptrs, param_grads, adam, cfg.lr_at(it), &param_names);
        } catch (const numeric_error& e) {
            throw numeric_error(std::string(e.what()) + " at iteration " + std::to_string(it));
        }
    }

    DipRun run;
    run.params = std::move(params);
    run.latents = std::move(plan);
    run.loss_trace = std::move(trace);
    run.windows = std::move(windows);
    return run;
}

inline DipRun dip_train(const SpokeStream& stream, const CoilMaps& coils, const DipConfig& cfg) {
    cfg.validate();
    const int F = cfg.binned_windows ? stream.count() / cfg.n_window : stream.count();
    LatentPlan plan;
    plan.kind = LatentPlan::Kind::Interpolated;
    plan.schedule = make_schedule(sample_anchors(cfg.latent_segments + 1, cfg.gen.latent_ch,
                                                 cfg.gen.latent_hw, cfg.latent_lo, cfg.latent_hi,
                                                 derive_seed(cfg.seed, 0x6c6174)),
                                  F);
    return dip_train_with_latents(stream, coils, cfg, std::move(plan));
}

// Final estimates at the requested times, including fractional ones.
inline FrameSeries dip_infer(const GeneratorParams& params, const LatentPlan& plan,
                             const std::vector<double>& times) {
    FrameSeries s;
    s.n = params.cfg.output_hw();
    for (double t : times) s.frames.push_back(generate_image(params, plan.at(t)));
    return s;
}

inline FrameSeries dip_infer_latents(const GeneratorParams& params, const std::vector<Tensor>& latents) {
    FrameSeries s;
    s.n = params.cfg.output_hw();
    for (const Tensor& z : latents) s.frames.push_back(generate_image(params, z));
    return s;
}

}  // namespace tddr
