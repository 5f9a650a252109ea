#pragma once
#include <array>

#include "dcuprl/nn.hpp"
#include "dcuprl/rng.hpp"
#include "dcuprl/tape.hpp"

namespace dcuprl {

/**
 * Convolutional latent encoder: four 3x3 conv layers (32 filters each,
 * strides 2,1,1,1, valid padding, relu) followed by one dense projection
 * to the latent vector. With 32x32 crops the conv stack ends at 32x9x9,
 * flattening to 2592 before the projection to 50.
 */
struct EncoderConfig {
    int in_channels = 3; // stacked frames
    int filters = 32;
    int kernel = 3;
    std::array<int, 4> strides = {2, 1, 1, 1};
    int latent_dim = 50;
    int crop = 32; // input is crop x crop

    int conv_out_hw() const {
        int hw = crop;
        for (int s : strides) hw = (hw - kernel) / s + 1;
        return hw;
    }
    int flat_dim() const { return filters * conv_out_hw() * conv_out_hw(); }
};

/// Fresh encoder parameters: conv1..conv4 kernels plus the projection.
ParamSet make_encoder(const EncoderConfig& cfg, Rng& rng);

/// Forward pass. With record_gradients the parameters join the tape as
/// tracked leaves; otherwise they enter as constants and the pass is
/// pure inference. obs is [B,C,H,W] or [C,H,W] with H = W = cfg.crop,
/// values normalized to [0,1].
Var encode(Tape& t, ParamSet& params, Var obs, const EncoderConfig& cfg, bool record_gradients);

/// Value-only convenience: run the encoder on a detached tape.
Tensor encode_nograd(const ParamSet& params, const Tensor& obs, const EncoderConfig& cfg);

/// Cut the same randomly offset window out of every channel.
Tensor random_crop(const Tensor& frames, int out_h, int out_w, Rng& rng);

/// Batched variant; each item draws its own offset.
Tensor random_crop_batch(const Tensor& batch, int out_h, int out_w, Rng& rng);

/// Deterministic centered window (policy/critic inputs).
Tensor center_crop(const Tensor& frames, int out_h, int out_w);
Tensor center_crop_batch(const Tensor& batch, int out_h, int out_w);

} // namespace dcuprl
