#include <cmath>

#include "dcuprl/contrastive.hpp"
#include "dcuprl/encoder.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace dcuprl;

namespace {

EncoderConfig small_encoder_cfg() {
    EncoderConfig cfg;
    cfg.crop = 16; // 16 -> 7 -> 5 -> 3 -> 1
    cfg.latent_dim = 6;
    return cfg;
}

} // namespace

TEST_CASE("random crop basics") {
    Rng rng(3);
    // identity crop
    Tensor frames = Tensor::from({1, 2, 2}, {1, 2, 3, 4});
    Tensor same = random_crop(frames, 2, 2, rng);
    CHECK(same.data == frames.data);

    // constant image crops to the same constant
    Tensor constant = Tensor::full({3, 8, 8}, 0.4f);
    Tensor c = random_crop(constant, 5, 5, rng);
    for (float v : c.data) CHECK(v == 0.4f);

    // window larger than the frame violates the contract
    CHECK_THROWS_AS(random_crop(constant, 9, 9, rng), ContractError);
}

TEST_CASE("crop offsets are uniform over the valid window grid") {
    // 40 -> 32 leaves offsets in {0..8}^2; recover them from a coordinate
    // ramp image and chi-square against uniformity
    const int H = 40, W = 40, hc = 32, wc = 32;
    Tensor frames = Tensor::zeros({3, H, W});
    for (int c = 0; c < 3; ++c)
        for (int r = 0; r < H; ++r)
            for (int col = 0; col < W; ++col)
                frames.data[(static_cast<std::size_t>(c) * H + r) * W + col] =
                    static_cast<float>(r * W + col);

    Rng rng(17);
    std::vector<long> counts(81, 0);
    const int draws = 10000;
    for (int k = 0; k < draws; ++k) {
        Tensor crop = random_crop(frames, hc, wc, rng);
        const int code = static_cast<int>(crop.data[0]);
        const int oy = code / W, ox = code % W;
        REQUIRE(oy <= 8);
        REQUIRE(ox <= 8);
        counts[static_cast<std::size_t>(oy * 9 + ox)] += 1;
    }
    // 80 dof, p = 0.01 critical value
    CHECK(oracle::chi_square_uniform(counts, draws) < 112.33);
}

TEST_CASE("the same window cuts all three channels") {
    // encode channel and coordinates so any misalignment is visible
    const int H = 12, W = 12;
    Tensor frames = Tensor::zeros({3, H, W});
    for (int c = 0; c < 3; ++c)
        for (int r = 0; r < H; ++r)
            for (int col = 0; col < W; ++col)
                frames.data[(static_cast<std::size_t>(c) * H + r) * W + col] =
                    static_cast<float>(c * 1000 + r * W + col);
    Rng rng(23);
    for (int k = 0; k < 50; ++k) {
        Tensor crop = random_crop(frames, 7, 7, rng);
        for (int r = 0; r < 7; ++r)
            for (int col = 0; col < 7; ++col) {
                const float base = crop.data[static_cast<std::size_t>(r) * 7 + col];
                CHECK(crop.data[(static_cast<std::size_t>(1) * 7 + r) * 7 + col] == base + 1000.0f);
                CHECK(crop.data[(static_cast<std::size_t>(2) * 7 + r) * 7 + col] == base + 2000.0f);
            }
    }
}

TEST_CASE("center crop is the deterministic middle window") {
    Tensor frames = Tensor::zeros({1, 6, 6});
    for (int i = 0; i < 36; ++i) frames.data[static_cast<std::size_t>(i)] = static_cast<float>(i);
    Tensor c = center_crop(frames, 4, 4);
    CHECK(c.data[0] == 7.0f); // row 1, col 1
    Tensor c2 = center_crop(frames, 4, 4);
    CHECK(c.data == c2.data);
}

TEST_CASE("encoder output shapes and the zero case") {
    EncoderConfig cfg; // 32x32 -> 9x9x32 -> 2592 -> 50
    CHECK(cfg.conv_out_hw() == 9);
    CHECK(cfg.flat_dim() == 2592);

    Rng rng(5);
    ParamSet enc = make_encoder(cfg, rng);
    CHECK(enc.param("proj.w").shape == std::vector<int>{50, 2592});

    Tensor obs = Tensor::zeros({3, 32, 32});
    Tensor latent = encode_nograd(enc, obs, cfg);
    CHECK(latent.shape == std::vector<int>{50});

    // zero input, zero weights, zero bias -> zero latent
    ParamSet zero = make_encoder(cfg, rng);
    for (const auto& name : zero.names())
        for (auto& v : zero.param(name).data) v = 0.0f;
    Tensor z = encode_nograd(zero, obs, cfg);
    for (float v : z.data) CHECK(v == 0.0f);

    // batched path agrees with the single path
    Tensor batch = Tensor::zeros({2, 3, 32, 32});
    Rng noise(9);
    for (auto& v : batch.data) v = static_cast<float>(noise.uniform());
    Tensor lat2 = encode_nograd(enc, batch, cfg);
    CHECK(lat2.shape == std::vector<int>{2, 50});
    Tensor first;
    first.shape = {3, 32, 32};
    first.data.assign(batch.data.begin(), batch.data.begin() + 3 * 32 * 32);
    Tensor lat1 = encode_nograd(enc, first, cfg);
    for (int i = 0; i < 50; ++i)
        CHECK(lat2.data[static_cast<std::size_t>(i)] ==
              doctest::Approx(lat1.data[static_cast<std::size_t>(i)]).epsilon(1e-5));
}

TEST_CASE("encoder gradient through the first conv kernel") {
    EncoderConfig cfg = small_encoder_cfg();
    Rng rng(7);
    ParamSet enc = make_encoder(cfg, rng);
    Tensor obs = Tensor::zeros({3, 16, 16});
    for (auto& v : obs.data) v = static_cast<float>(rng.uniform());

    Tape t;
    Var z = encode(t, enc, t.constant(obs), cfg, true);
    t.backward(t.sum(z));
    REQUIRE(enc.param("conv1").grad.has_value());

    // finite differences in double through a reference forward built from
    // the oracle conv/dense pieces
    auto widen = [](const std::vector<float>& v) { return std::vector<double>(v.begin(), v.end()); };
    auto forward = [&](const std::vector<double>& w1) {
        int oh, ow;
        auto h = oracle::conv2d(widen(obs.data), 3, 16, 16, w1, 32, 3, 2, oh, ow);
        oracle::relu_inplace(h);
        std::vector<double> cur = h;
        int hw = oh;
        for (int layer = 2; layer <= 4; ++layer) {
            cur = oracle::conv2d(cur, 32, hw, hw, widen(enc.param("conv" + std::to_string(layer)).data),
                                 32, 3, 1, oh, ow);
            oracle::relu_inplace(cur);
            hw = oh;
        }
        auto y = oracle::dense(cur, widen(enc.param("proj.w").data), widen(enc.param("proj.b").data),
                               cfg.latent_dim, cfg.flat_dim());
        double s = 0;
        for (double v : y) s += v;
        return s;
    };
    // h = 1e-5: small enough that the deep relu stack's kinks stay outside
    // the stencil while the f64 oracle keeps quotient noise near 1e-9
    auto fd = oracle::finite_diff(widen(enc.param("conv1").data), forward, 1e-5);
    CHECK(oracle::norm_rel_err(*enc.param("conv1").grad, fd) < 1e-4);
}

TEST_CASE("info_nce values") {
    // B = 1 is exactly zero in the precise evaluation; the f32 graph value
    // can differ by an ulp between its two accumulation routes
    {
        Tensor q = Tensor::from({1, 3}, {0.3f, -0.7f, 1.1f});
        CHECK(info_nce_value(q, q) == 0.0);
        Tape t;
        CHECK(std::abs(t.value(info_nce(t, t.constant(q), t.constant(q))).data[0]) < 1e-6f);
    }
    // B = 2 orthonormal: loss = -log(e/(e+1))
    {
        Tensor q = Tensor::from({2, 2}, {1, 0, 0, 1});
        const double expect = -std::log(std::exp(1.0) / (std::exp(1.0) + 1.0));
        CHECK(info_nce_value(q, q) == doctest::Approx(expect).epsilon(1e-9));
        CHECK(std::abs(info_nce_value(q, q) - 0.313262) < 1e-6);
    }
    // random batches match the independent oracle to 1e-10, f32 tape to 1e-5
    Rng rng(31);
    for (int B : {2, 4, 8}) {
        const int Z = 6;
        Tensor q = Tensor::zeros({B, Z}), k = Tensor::zeros({B, Z});
        for (auto& v : q.data) v = static_cast<float>(rng.uniform(-1, 1));
        for (auto& v : k.data) v = static_cast<float>(rng.uniform(-1, 1));

        oracle::Mat logits(B, B);
        for (int i = 0; i < B; ++i)
            for (int j = 0; j < B; ++j) {
                double dot = 0;
                for (int z = 0; z < Z; ++z)
                    dot += static_cast<double>(q.data[static_cast<std::size_t>(i) * Z + z]) *
                           k.data[static_cast<std::size_t>(j) * Z + z];
                logits.at(i, j) = dot;
            }
        const double want = oracle::softmax_ce_diagonal(logits);
        CHECK(std::abs(info_nce_value(q, k) - want) < 1e-10);

        Tape t;
        const float f32 = t.value(info_nce(t, t.constant(q), t.constant(k))).data[0];
        CHECK(std::abs(static_cast<double>(f32) - want) < 1e-5);
        CHECK(f32 >= 0.0f);
    }
}

TEST_CASE("info_nce is invariant under joint row permutation") {
    Rng rng(33);
    const int B = 6, Z = 4;
    Tensor q = Tensor::zeros({B, Z}), k = Tensor::zeros({B, Z});
    for (auto& v : q.data) v = static_cast<float>(rng.uniform(-1, 1));
    for (auto& v : k.data) v = static_cast<float>(rng.uniform(-1, 1));
    const double base = info_nce_value(q, k);

    std::vector<int> perm = {3, 0, 5, 1, 4, 2};
    Tensor qp = Tensor::zeros({B, Z}), kp = Tensor::zeros({B, Z});
    for (int i = 0; i < B; ++i)
        for (int z = 0; z < Z; ++z) {
            qp.data[static_cast<std::size_t>(i) * Z + z] =
                q.data[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)]) * Z + z];
            kp.data[static_cast<std::size_t>(i) * Z + z] =
                k.data[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)]) * Z + z];
        }
    CHECK(info_nce_value(qp, kp) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("info_nce rejects keys that want gradients") {
    Tensor q = Tensor::from({1, 2}, {1, 0});
    Tensor k = Tensor::from({1, 2}, {0, 1});
    Tape t;
    CHECK_THROWS_AS((void)info_nce(t, t.constant(q), t.param(k)), ContractError);
}

TEST_CASE("info_nce gradient only reaches the query side") {
    Rng rng(35);
    const int B = 4, Z = 3;
    Tensor q = Tensor::zeros({B, Z}), k = Tensor::zeros({B, Z});
    for (auto& v : q.data) v = static_cast<float>(rng.uniform(-1, 1));
    for (auto& v : k.data) v = static_cast<float>(rng.uniform(-1, 1));

    Tape t;
    Var loss = info_nce(t, t.param(q), t.constant(k));
    t.backward(loss);
    REQUIRE(q.grad.has_value());
    CHECK_FALSE(k.grad.has_value());

    // and the q gradient matches finite differences of the f64 evaluation
    auto fd = oracle::finite_diff(std::vector<double>(q.data.begin(), q.data.end()),
                                  [&](const std::vector<double>& qa) {
                                      Tensor qq = Tensor::zeros({B, Z});
                                      for (std::size_t i = 0; i < qa.size(); ++i)
                                          qq.data[i] = static_cast<float>(qa[i]);
                                      return info_nce_value(qq, k);
                                  });
    CHECK(oracle::max_rel_err(*q.grad, fd, 1e-4) < 2e-3);
}

TEST_CASE("bilinear similarity variant trains its weight") {
    Rng rng(37);
    const int B = 4, Z = 3;
    Tensor q = Tensor::zeros({B, Z}), k = Tensor::zeros({B, Z});
    for (auto& v : q.data) v = static_cast<float>(rng.uniform(-1, 1));
    for (auto& v : k.data) v = static_cast<float>(rng.uniform(-1, 1));
    Tensor w = Tensor::zeros({Z, Z});
    for (int i = 0; i < Z; ++i) w.data[static_cast<std::size_t>(i) * Z + i] = 1.0f; // identity

    Tape t;
    Var loss = info_nce_bilinear(t, t.constant(q), t.param(w), t.constant(k));
    // identity W reduces to the plain dot-product loss
    CHECK(t.value(loss).data[0] == doctest::Approx(static_cast<float>(info_nce_value(q, k))).epsilon(1e-5));
    t.backward(loss);
    CHECK(w.grad.has_value());
}

TEST_CASE("momentum update identities and geometric approach") {
    SUBCASE("m=1 leaves the key unchanged; m=0 copies the query") {
        ParamSet key, query;
        key.add("w", {3}).data = {1, 2, 3};
        query.add("w", {3}).data = {7, 8, 9};
        momentum_update(key, query, 1.0f);
        CHECK(key.param("w").data == std::vector<float>{1, 2, 3});
        momentum_update(key, query, 0.0f);
        CHECK(key.param("w").data == std::vector<float>{7, 8, 9});
    }
    SUBCASE("scalar formula") {
        ParamSet key, query;
        key.add("w", {1}).data = {0.0f};
        query.add("w", {1}).data = {1.0f};
        momentum_update(key, query, 0.95f);
        CHECK(key.param("w").data[0] == doctest::Approx(0.05f));
    }
    SUBCASE("distance to a frozen query shrinks by m per step") {
        Rng rng(41);
        EncoderConfig cfg = small_encoder_cfg();
        ParamSet query = make_encoder(cfg, rng);
        ParamSet key = make_encoder(cfg, rng);
        const float m = 0.95f;

        auto dist = [&]() {
            double acc = 0.0;
            for (const auto& name : key.names()) {
                const auto& a = key.param(name).data;
                const auto& b = query.param(name).data;
                for (std::size_t i = 0; i < a.size(); ++i)
                    acc += (static_cast<double>(a[i]) - b[i]) * (static_cast<double>(a[i]) - b[i]);
            }
            return std::sqrt(acc);
        };
        const double d0 = dist();
        double prev = d0;
        for (int k = 1; k <= 40; ++k) {
            momentum_update(key, query, m);
            const double d = dist();
            CHECK(d == doctest::Approx(prev * m).epsilon(1e-4));
            prev = d;
        }
        CHECK(prev == doctest::Approx(d0 * std::pow(m, 40)).epsilon(1e-3));
    }
}
