#pragma once

#include <string>
#include <vector>

#include "tddr/tensor.hpp"

namespace tddr {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    std::vector<Tensor> m, v;
    long long step = 0;
    AdamConfig cfg;

    static AdamState for_params(const std::vector<Tensor>& params, AdamConfig cfg = {}) {
        AdamState s;
        s.cfg = cfg;
        for (const Tensor& p : params) {
            s.m.push_back(Tensor::zeros(p.shape));
            s.v.push_back(Tensor::zeros(p.shape));
        }
        return s;
    }
};

// Bias-corrected Adam update in place. Throws numeric_error naming the first
// offending parameter if any gradient entry is non-finite.
inline void adam_step(std::vector<Tensor*>& params, const std::vector<Tensor>& grads, AdamState& state,
                      double lr, const std::vector<std::string>* names = nullptr) {
    if (lr <= 0) throw config_error("adam_step: learning rate must be positive");
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw shape_error("adam_step: parameter/gradient/state count mismatch");
    for (size_t p = 0; p < params.size(); ++p) {
        if (!params[p]->same_shape(grads[p])) throw shape_error("adam_step: gradient shape mismatch");
        if (!grads[p].all_finite()) {
            std::string who = names ? (*names)[p] : ("param[" + std::to_string(p) + "]");
            throw numeric_error("adam_step: non-finite gradient in " + who);
        }
    }
    state.step += 1;
    const double b1 = state.cfg.beta1, b2 = state.cfg.beta2;
    const double bc1 = 1.0 - std::pow(b1, double(state.step));
    const double bc2 = 1.0 - std::pow(b2, double(state.step));
    for (size_t p = 0; p < params.size(); ++p) {
        double* w = params[p]->data.data();
        const double* g = grads[p].data.data();
        double* m = state.m[p].data.data();
        double* v = state.v[p].data.data();
        const size_t count = params[p]->data.size();
        for (size_t i = 0; i < count; ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            w[i] -= lr * mhat / (std::sqrt(vhat) + state.cfg.epsilon);
        }
    }
}

inline void adam_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads, AdamState& state,
                      double lr, const std::vector<std::string>* names = nullptr) {
    std::vector<Tensor*> ptrs;
    ptrs.reserve(params.size());
    for (Tensor& p : params) ptrs.push_back(&p);
    adam_step(ptrs, grads, state, lr, names);
}

}  // namespace tddr
