#pragma once

#include <array>
#include <string>
#include <vector>

#include "tddr/tape.hpp"

namespace tddr {

// Generative network layout: two conv+bn+relu blocks at the latent scale,
// then per stage [nn-upsample 2x, two conv+bn+relu blocks], then a final
// plain conv down to two channels (the complex image). Output side length is
// latent_hw * 2^stages.
struct GeneratorConfig {
    int latent_hw = 8;
    int latent_ch = 1;
    int stages = 4;
    int channels = 128;
    int out_channels = 2;
    int kernel = 3;

    int output_hw() const { return latent_hw << stages; }
    int block_count() const { return 2 + 2 * stages; }

    void validate() const {
        if (latent_hw < 1 || latent_ch < 1 || stages < 0 || channels < 1)
            throw config_error("generator: invalid configuration");
        if (out_channels != 2) throw config_error("generator: output must be two channels");
        if (kernel % 2 != 1) throw config_error("generator: kernel must be odd");
    }
};

// Weight layout, fixed enumeration order: blocks 0..2+2*stages-1 each carry
// {weight, bias, gamma, beta}; the final conv carries {weight, bias} only.
struct GeneratorParams {
    struct Layer {
        Tensor weight, bias, gamma, beta;
        bool has_bn = true;
    };
    GeneratorConfig cfg;
    std::vector<Layer> layers;

    std::vector<Tensor*> tensors() {
        std::vector<Tensor*> out;
        for (Layer& l : layers) {
            out.push_back(&l.weight);
            out.push_back(&l.bias);
            if (l.has_bn) {
                out.push_back(&l.gamma);
                out.push_back(&l.beta);
            }
        }
        return out;
    }
    std::vector<const Tensor*> tensors() const {
        std::vector<const Tensor*> out;
        for (const Layer& l : layers) {
            out.push_back(&l.weight);
            out.push_back(&l.bias);
            if (l.has_bn) {
                out.push_back(&l.gamma);
                out.push_back(&l.beta);
            }
        }
        return out;
    }
    std::vector<std::string> tensor_names() const {
        std::vector<std::string> out;
        for (size_t i = 0; i < layers.size(); ++i) {
            const std::string p = "layer" + std::to_string(i) + ".";
            out.push_back(p + "weight");
            out.push_back(p + "bias");
            if (layers[i].has_bn) {
                out.push_back(p + "gamma");
                out.push_back(p + "beta");
            }
        }
        return out;
    }
};

// Fan-in-scaled zero-mean normal init (std = sqrt(2 / (in*kh*kw))), zero
// biases, unit gamma, zero beta; fully determined by the seed.
inline GeneratorParams init_generator(const GeneratorConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Rng rng(derive_seed(seed, 0x67656e));
    GeneratorParams params;
    params.cfg = cfg;
    const int k = cfg.kernel;
    auto make_layer = [&](int in_ch, int out_ch, bool has_bn) {
        GeneratorParams::Layer l;
        const double std = std::sqrt(2.0 / (double(in_ch) * k * k));
        l.weight = randn_tensor({out_ch, in_ch, k, k}, std, rng);
        l.bias = Tensor::zeros({out_ch});
        l.has_bn = has_bn;
        if (has_bn) {
            l.gamma = Tensor::full({out_ch}, 1.0);
            l.beta = Tensor::zeros({out_ch});
        }
        return l;
    };
    for (int b = 0; b < cfg.block_count(); ++b)
        params.layers.push_back(make_layer(b == 0 ? cfg.latent_ch : cfg.channels, cfg.channels, true));
    params.layers.push_back(make_layer(cfg.channels, cfg.out_channels, false));
    return params;
}

// Parameters pushed onto a tape as leaves, in enumeration order.
struct GeneratorOnTape {
    std::vector<int> param_ids;                 // flat, matches tensors()/tensor_names()
    std::vector<std::array<int, 4>> layer_ids;  // per layer: w, b, gamma, beta (-1 when absent)
};

inline GeneratorOnTape push_generator_params(Tape& tape, const GeneratorParams& params,
                                             bool trainable = true) {
    GeneratorOnTape bound;
    for (const GeneratorParams::Layer& l : params.layers) {
        std::array<int, 4> ids{-1, -1, -1, -1};
        ids[0] = tape.leaf(l.weight, trainable);
        ids[1] = tape.leaf(l.bias, trainable);
        bound.param_ids.push_back(ids[0]);
        bound.param_ids.push_back(ids[1]);
        if (l.has_bn) {
            ids[2] = tape.leaf(l.gamma, trainable);
            ids[3] = tape.leaf(l.beta, trainable);
            bound.param_ids.push_back(ids[2]);
            bound.param_ids.push_back(ids[3]);
        }
        bound.layer_ids.push_back(ids);
    }
    return bound;
}

inline constexpr double kBatchNormEps = 1e-5;

// Records the full forward pass; returns the (2, out, out) image node.
inline int generate(Tape& tape, const GeneratorConfig& cfg, const GeneratorOnTape& bound,
                    const Tensor& z) {
    cfg.validate();
    if (z.rank() != 3 || z.dim(0) != cfg.latent_ch || z.dim(1) != cfg.latent_hw ||
        z.dim(2) != cfg.latent_hw)
        throw shape_error("generate: latent shape does not match configuration");
    const int pad = (cfg.kernel - 1) / 2;
    int x = tape.leaf(z, false);
    size_t layer = 0;
    auto block = [&](int input) {
        const auto& ids = bound.layer_ids[layer++];
        int c = tape.conv2d(input, ids[0], ids[1], pad);
        int b = tape.batchnorm2d(c, ids[2], ids[3], kBatchNormEps);
        return tape.relu(b);
    };
    x = block(x);
    x = block(x);
    for (int s = 0; s < cfg.stages; ++s) {
        x = tape.upsample_nn2x(x);
        x = block(x);
        x = block(x);
    }
    const auto& last = bound.layer_ids[layer];
    return tape.conv2d(x, last[0], last[1], pad);
}

// Convenience one-shot evaluation (inference).
inline CImage generate_image(const GeneratorParams& params, const Tensor& z) {
    Tape tape;
    GeneratorOnTape bound = push_generator_params(tape, params, false);
    int out = generate(tape, params.cfg, bound, z);
    return tensor_to_cimage(tape.value(out));
}

}  // namespace tddr
