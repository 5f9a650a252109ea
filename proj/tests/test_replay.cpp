#include <cmath>
#include <filesystem>
#include <map>

#include "dcuprl/replay.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace dcuprl;

namespace {

Transition make_transition(float fill, float r = 0.01f, bool done = false) {
    Transition t;
    t.s = Tensor::full({1, 2, 2}, fill);
    t.s2 = Tensor::full({1, 2, 2}, fill);
    t.a0 = fill;
    t.a1 = -fill;
    t.r = r;
    t.done = done;
    return t;
}

ReplayConfig small_cfg(std::size_t cap, bool uniform = false) {
    ReplayConfig cfg;
    cfg.capacity = cap;
    cfg.uniform = uniform;
    return cfg;
}

// linear-scan reference for prefix-sum descent
std::size_t linear_scan(const std::vector<double>& p, double u) {
    double cum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        cum += p[i];
        if (u < cum) return i;
    }
    return p.size() - 1;
}

} // namespace

TEST_CASE("sum tree totals match a brute-force sum") {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng.uniform_int(33);
        SumTree tree(n);
        std::vector<double> ref(n, 0.0);
        for (int k = 0; k < 200; ++k) {
            const std::size_t leaf = rng.uniform_int(n);
            const double v = rng.uniform(0.0, 5.0);
            tree.update(leaf, v);
            ref[leaf] = v;
        }
        double sum = 0.0;
        for (double v : ref) sum += v;
        CHECK(std::abs(tree.total() - sum) <= 1e-6 * std::max(1.0, sum));
        for (std::size_t i = 0; i < n; ++i) CHECK(tree.get(i) == ref[i]);
    }
}

TEST_CASE("sum tree descent agrees with a linear-scan oracle") {
    Rng rng(37);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng.uniform_int(64);
        SumTree tree(n);
        std::vector<double> p(n);
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = rng.uniform() < 0.2 ? 0.0 : rng.uniform(0.0, 3.0);
            tree.update(i, p[i]);
        }
        if (tree.total() <= 0.0) {
            tree.update(0, 1.0);
            p[0] = 1.0;
        }
        for (int k = 0; k < 20; ++k) {
            const double u = rng.uniform() * tree.total();
            CHECK(tree.sample(u) == linear_scan(p, u));
        }
    }
}

TEST_CASE("push semantics: growth, ring eviction, max-priority assignment") {
    PrioritizedBuffer buf(small_cfg(4), {1, 2, 2});
    Rng rng(5);

    buf.push(make_transition(0.1f));
    CHECK(buf.size() == 1);
    auto batch = buf.sample(1, rng);
    CHECK(batch.weights[0] == 1.0f);
    CHECK(batch.rewards[0] == 0.01f);

    for (int i = 0; i < 4; ++i) buf.push(make_transition(0.2f + 0.1f * i));
    CHECK(buf.size() == 4); // capacity caps growth, oldest evicted

    // raising one leaf raises the running max handed to fresh pushes
    PrioritizedBuffer b2(small_cfg(8), {1, 2, 2});
    auto h0 = b2.push(make_transition(0.0f));
    CHECK(b2.max_raw_priority() == 1.0);
    b2.update_priorities({h0}, {3.0f});
    CHECK(b2.max_raw_priority() == doctest::Approx(3.0 + 1e-6));
    b2.push(make_transition(0.5f));
    CHECK(b2.leaf_value(1) == doctest::Approx(std::pow(b2.max_raw_priority(), 0.6)));
}

TEST_CASE("sampling distribution follows p^alpha within total variation 0.02") {
    // 16 fixed leaves, alpha baked in by the buffer at sampling time
    ReplayConfig cfg = small_cfg(16);
    cfg.alpha = 0.6;
    PrioritizedBuffer buf(cfg, {1, 2, 2});
    std::vector<std::uint64_t> handles;
    for (int i = 0; i < 16; ++i) handles.push_back(buf.push(make_transition(i / 16.0f)));
    std::vector<float> tds = {0.1f, 2.0f, 0.5f, 1.0f, 0.01f, 3.0f, 0.2f, 0.7f,
                              1.5f, 0.05f, 0.9f, 2.5f, 0.3f, 0.6f, 1.1f, 0.4f};
    buf.update_priorities(handles, tds);

    std::map<float, int> idx; // recover leaf identity via the stored action
    std::vector<double> want(16);
    double z = 0.0;
    for (int i = 0; i < 16; ++i) {
        want[static_cast<std::size_t>(i)] = std::pow(std::abs(tds[static_cast<std::size_t>(i)]) + 1e-6, 0.6);
        z += want[static_cast<std::size_t>(i)];
    }
    for (auto& w : want) w /= z;

    Rng rng(41);
    std::vector<long> counts(16, 0);
    const int draws = 100000;
    for (int k = 0; k < draws; ++k) {
        auto b = buf.sample(1, rng);
        counts[b.handles[0]] += 1;
    }
    double tv = 0.0;
    for (int i = 0; i < 16; ++i)
        tv += std::abs(static_cast<double>(counts[static_cast<std::size_t>(i)]) / draws -
                       want[static_cast<std::size_t>(i)]);
    CHECK(tv / 2.0 < 0.02);
}

TEST_CASE("two-leaf frequencies match the closed form at alpha=1") {
    ReplayConfig cfg = small_cfg(2);
    cfg.alpha = 1.0;
    PrioritizedBuffer buf(cfg, {1, 2, 2});
    auto h0 = buf.push(make_transition(0.0f));
    auto h1 = buf.push(make_transition(1.0f));
    buf.update_priorities({h0, h1}, {1.0f, 3.0f});

    Rng rng(43);
    long c1 = 0;
    const int draws = 100000;
    for (int k = 0; k < draws; ++k) {
        auto b = buf.sample(1, rng);
        if (b.handles[0] == h1) ++c1;
    }
    CHECK(std::abs(static_cast<double>(c1) / draws - 0.75) < 0.02);
}

TEST_CASE("importance weights") {
    // all priorities equal -> uniform sampling, unit weights
    {
        PrioritizedBuffer buf(small_cfg(8), {1, 2, 2});
        for (int i = 0; i < 8; ++i) buf.push(make_transition(i * 0.1f));
        Rng rng(11);
        auto b = buf.sample(8, rng);
        for (float w : b.weights) CHECK(w == 1.0f);
    }
    // beta = 0 -> unit weights regardless of priorities
    {
        ReplayConfig cfg = small_cfg(8);
        cfg.beta = 0.0;
        PrioritizedBuffer buf(cfg, {1, 2, 2});
        std::vector<std::uint64_t> hs;
        for (int i = 0; i < 8; ++i) hs.push_back(buf.push(make_transition(i * 0.1f)));
        buf.update_priorities(hs, {0.1f, 9.0f, 0.2f, 4.0f, 0.3f, 2.0f, 0.4f, 1.0f});
        Rng rng(12);
        auto b = buf.sample(4, rng);
        for (float w : b.weights) CHECK(w == 1.0f);
    }
    // skewed priorities with beta > 0: batch max is exactly 1
    {
        ReplayConfig cfg = small_cfg(8);
        cfg.beta = 0.7;
        PrioritizedBuffer buf(cfg, {1, 2, 2});
        std::vector<std::uint64_t> hs;
        for (int i = 0; i < 8; ++i) hs.push_back(buf.push(make_transition(i * 0.1f)));
        buf.update_priorities(hs, {0.1f, 9.0f, 0.2f, 4.0f, 0.3f, 2.0f, 0.4f, 1.0f});
        Rng rng(13);
        auto b = buf.sample(8, rng);
        float mx = 0.0f;
        for (float w : b.weights) {
            CHECK(w <= 1.0f);
            CHECK(w > 0.0f);
            mx = std::max(mx, w);
        }
        CHECK(mx == 1.0f);
    }
}

TEST_CASE("update_priorities contract") {
    PrioritizedBuffer buf(small_cfg(4), {1, 2, 2});
    auto h = buf.push(make_transition(0.0f));
    CHECK_THROWS_AS(buf.update_priorities({h}, {1.0f, 2.0f}), ContractError);

    // zero TD error floors at eps, never zero
    buf.update_priorities({h}, {0.0f});
    CHECK(buf.leaf_value(0) > 0.0);

    // equal |td| -> equal sampling odds
    auto h1 = buf.push(make_transition(0.5f));
    buf.update_priorities({h, h1}, {1.0f, -1.0f});
    CHECK(buf.leaf_value(0) == doctest::Approx(buf.leaf_value(1)));

    // evicted handles are skipped and counted
    for (int i = 0; i < 4; ++i) buf.push(make_transition(0.9f));
    const long before = buf.evicted_update_skips();
    buf.update_priorities({h}, {5.0f});
    CHECK(buf.evicted_update_skips() == before + 1);
}

TEST_CASE("uniform mode reduces to uniform draws with unit weights") {
    PrioritizedBuffer buf(small_cfg(16, /*uniform=*/true), {1, 2, 2});
    std::vector<std::uint64_t> hs;
    for (int i = 0; i < 16; ++i) hs.push_back(buf.push(make_transition(i / 16.0f)));
    // priorities diverge wildly but sampling must stay uniform
    std::vector<float> tds(16);
    for (int i = 0; i < 16; ++i) tds[static_cast<std::size_t>(i)] = static_cast<float>(i * i);
    buf.update_priorities(hs, tds);

    Rng rng(47);
    std::vector<long> counts(16, 0);
    const int draws = 100000;
    for (int k = 0; k < draws; ++k) {
        auto b = buf.sample(1, rng);
        counts[b.handles[0]] += 1;
        CHECK(b.weights[0] == 1.0f);
    }
    // chi-square, 15 dof, p=0.01 critical value 30.58
    CHECK(oracle::chi_square_uniform(counts, draws) < 30.58);
}

TEST_CASE("empty buffer sampling violates the contract") {
    PrioritizedBuffer buf(small_cfg(4), {1, 2, 2});
    Rng rng(1);
    CHECK_THROWS_AS(buf.sample(1, rng), ContractError);
    buf.push(make_transition(0.0f));
    CHECK_THROWS_AS(buf.sample(2, rng), ContractError);
}

TEST_CASE("quantized round trip stays within half a bin") {
    PrioritizedBuffer buf(small_cfg(4), {1, 2, 2});
    Transition t;
    t.s = Tensor::from({1, 2, 2}, {0.0f, 0.123f, 0.5f, 1.0f});
    t.s2 = Tensor::from({1, 2, 2}, {0.9f, 0.01f, 0.77f, 0.333f});
    t.a0 = 0.25f;
    t.a1 = -0.5f;
    t.r = -1.0f;
    t.done = true;
    buf.push(t);
    Rng rng(3);
    auto b = buf.sample(1, rng);
    for (int i = 0; i < 4; ++i) {
        CHECK(std::abs(b.s.data[static_cast<std::size_t>(i)] - t.s.data[static_cast<std::size_t>(i)]) <=
              0.5f / 255.0f + 1e-7f);
        CHECK(std::abs(b.s2.data[static_cast<std::size_t>(i)] - t.s2.data[static_cast<std::size_t>(i)]) <=
              0.5f / 255.0f + 1e-7f);
    }
    CHECK(b.actions.data[0] == 0.25f); // actions are not quantized
    CHECK(b.rewards[0] == -1.0f);
    CHECK(b.done[0] == 1);
}

TEST_CASE("snapshot save/load preserves contents and priorities") {
    ReplayConfig cfg = small_cfg(8);
    PrioritizedBuffer buf(cfg, {1, 2, 2});
    std::vector<std::uint64_t> hs;
    for (int i = 0; i < 5; ++i) hs.push_back(buf.push(make_transition(i / 8.0f, 0.01f, i == 4)));
    buf.update_priorities(hs, {0.5f, 1.5f, 0.25f, 2.0f, 0.1f});

    const auto path = (std::filesystem::temp_directory_path() / "dcuprl_replay.dcpl").string();
    buf.save(path);
    PrioritizedBuffer back = PrioritizedBuffer::load(path);
    CHECK(back.size() == buf.size());
    CHECK(back.tree_total() == doctest::Approx(buf.tree_total()));
    Rng r1(7), r2(7);
    auto b1 = buf.sample(5, r1);
    auto b2 = back.sample(5, r2);
    CHECK(b1.s.data == b2.s.data);
    CHECK(b1.rewards == b2.rewards);
    std::filesystem::remove(path);
}
