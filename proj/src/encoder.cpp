#include "dcuprl/encoder.hpp"

#include <cstring>

namespace dcuprl {

ParamSet make_encoder(const EncoderConfig& cfg, Rng& rng) {
    ParamSet ps;
    int in_ch = cfg.in_channels;
    for (int layer = 0; layer < 4; ++layer) {
        Tensor& w = ps.add("conv" + std::to_string(layer + 1),
                           {cfg.filters, in_ch, cfg.kernel, cfg.kernel});
        init_uniform_fanin(w, in_ch * cfg.kernel * cfg.kernel, rng);
        in_ch = cfg.filters;
    }
    Tensor& pw = ps.add("proj.w", {cfg.latent_dim, cfg.flat_dim()});
    init_uniform_fanin(pw, cfg.flat_dim(), rng);
    ps.add("proj.b", {cfg.latent_dim}); // zero
    return ps;
}

Var encode(Tape& t, ParamSet& params, Var obs, const EncoderConfig& cfg, bool record_gradients) {
    auto weight = [&](const std::string& name) {
        return record_gradients ? t.param(params.param(name)) : t.constant(params.param(name));
    };
    const Tensor& x = t.value(obs);
    const bool batched = x.rank() == 4;
    const int h = x.dim(batched ? 2 : 1), w = x.dim(batched ? 3 : 2);
    if (h != cfg.crop || w != cfg.crop)
        throw ShapeError("encode: expected " + std::to_string(cfg.crop) + "x" +
                         std::to_string(cfg.crop) + " input, got " + shape_str(x.shape));

    Var hvar = obs;
    for (int layer = 0; layer < 4; ++layer)
        hvar = t.relu(t.conv2d(hvar, weight("conv" + std::to_string(layer + 1)),
                               cfg.strides[static_cast<std::size_t>(layer)]));
    const int B = batched ? x.dim(0) : 1;
    Var flat = t.reshape(hvar, batched ? std::vector<int>{B, cfg.flat_dim()}
                                       : std::vector<int>{cfg.flat_dim()});
    return t.dense(flat, weight("proj.w"), weight("proj.b"));
}

Tensor encode_nograd(const ParamSet& params, const Tensor& obs, const EncoderConfig& cfg) {
    Tape t;
    // the pass never mutates parameters; constants snapshot their values
    Var z = encode(t, const_cast<ParamSet&>(params), t.constant(obs), cfg, false);
    return t.value(z);
}

namespace {

Tensor crop_at(const Tensor& frames, int oy, int ox, int out_h, int out_w) {
    const int C = frames.dim(0), H = frames.dim(1), W = frames.dim(2);
    Tensor out = Tensor::zeros({C, out_h, out_w});
    for (int c = 0; c < C; ++c)
        for (int r = 0; r < out_h; ++r)
            std::memcpy(&out.data[(static_cast<std::size_t>(c) * out_h + r) * out_w],
                        &frames.data[(static_cast<std::size_t>(c) * H + oy + r) * W + ox],
                        sizeof(float) * static_cast<std::size_t>(out_w));
    return out;
}

void check_crop(const Tensor& frames, int rank, int out_h, int out_w) {
    if (frames.rank() != rank)
        throw ShapeError("crop: expected rank " + std::to_string(rank) + ", got " +
                         shape_str(frames.shape));
    const int H = frames.dim(rank - 2), W = frames.dim(rank - 1);
    if (out_h > H || out_w > W)
        throw ContractError("crop: window " + std::to_string(out_h) + "x" + std::to_string(out_w) +
                            " exceeds frame " + std::to_string(H) + "x" + std::to_string(W));
}

} // namespace

Tensor random_crop(const Tensor& frames, int out_h, int out_w, Rng& rng) {
    check_crop(frames, 3, out_h, out_w);
    const int H = frames.dim(1), W = frames.dim(2);
    const int oy = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(H - out_h + 1)));
    const int ox = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(W - out_w + 1)));
    return crop_at(frames, oy, ox, out_h, out_w);
}

Tensor center_crop(const Tensor& frames, int out_h, int out_w) {
    check_crop(frames, 3, out_h, out_w);
    return crop_at(frames, (frames.dim(1) - out_h) / 2, (frames.dim(2) - out_w) / 2, out_h, out_w);
}

Tensor random_crop_batch(const Tensor& batch, int out_h, int out_w, Rng& rng) {
    check_crop(batch, 4, out_h, out_w);
    const int B = batch.dim(0), C = batch.dim(1), H = batch.dim(2), W = batch.dim(3);
    Tensor out = Tensor::zeros({B, C, out_h, out_w});
    const std::size_t in_item = static_cast<std::size_t>(C) * H * W;
    const std::size_t out_item = static_cast<std::size_t>(C) * out_h * out_w;
    for (int b = 0; b < B; ++b) {
        Tensor item;
        item.shape = {C, H, W};
        item.data.assign(batch.data.begin() + static_cast<long>(b * in_item),
                         batch.data.begin() + static_cast<long>((b + 1) * in_item));
        Tensor cropped = random_crop(item, out_h, out_w, rng);
        std::memcpy(&out.data[static_cast<std::size_t>(b) * out_item], cropped.data.data(),
                    sizeof(float) * out_item);
    }
    return out;
}

Tensor center_crop_batch(const Tensor& batch, int out_h, int out_w) {
    check_crop(batch, 4, out_h, out_w);
    const int B = batch.dim(0), C = batch.dim(1), H = batch.dim(2), W = batch.dim(3);
    Tensor out = Tensor::zeros({B, C, out_h, out_w});
    const int oy = (H - out_h) / 2, ox = (W - out_w) / 2;
    for (int b = 0; b < B; ++b)
        for (int c = 0; c < C; ++c)
            for (int r = 0; r < out_h; ++r)
                std::memcpy(
                    &out.data[((static_cast<std::size_t>(b) * C + c) * out_h + r) * out_w],
                    &batch.data[((static_cast<std::size_t>(b) * C + c) * H + oy + r) * W + ox],
                    sizeof(float) * static_cast<std::size_t>(out_w));
    return out;
}

} // namespace dcuprl
