#include "dcuprl/replay.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>

#include "dcuprl/serialize.hpp"

namespace dcuprl {
namespace {

std::uint8_t quantize(float v) {
    const float q = std::floor(v * 255.0f + 0.5f);
    return static_cast<std::uint8_t>(std::clamp(q, 0.0f, 255.0f));
}

} // namespace

PrioritizedBuffer::PrioritizedBuffer(ReplayConfig cfg, std::vector<int> obs_shape)
    : cfg_(cfg),
      obs_shape_(std::move(obs_shape)),
      obs_len_(static_cast<std::size_t>(Tensor::count(obs_shape_))),
      tree_(cfg.capacity) {
    if (cfg_.capacity == 0) throw ContractError("replay: zero capacity");
    if (cfg_.uniform) {
        cfg_.alpha = 0.0;
        cfg_.beta = 0.0;
    }
    slots_.resize(cfg_.capacity);
    raw_.assign(cfg_.capacity, 0.0f);
}

void PrioritizedBuffer::set_priority(std::size_t slot, double raw) {
    raw_[slot] = static_cast<float>(raw);
    tree_.update(slot, cfg_.alpha == 0.0 ? 1.0 : std::pow(raw, cfg_.alpha));
}

std::uint64_t PrioritizedBuffer::push(const Transition& t) {
    if (t.s.shape != obs_shape_ || t.s2.shape != obs_shape_)
        throw ShapeError("replay: observation shape " + shape_str(t.s.shape) +
                         " does not match buffer shape " + shape_str(obs_shape_));
    const std::uint64_t handle = next_handle_++;
    const std::size_t slot = handle % cfg_.capacity;
    Slot& s = slots_[slot];
    s.s.resize(obs_len_);
    s.s2.resize(obs_len_);
    for (std::size_t i = 0; i < obs_len_; ++i) {
        s.s[i] = quantize(t.s.data[i]);
        s.s2[i] = quantize(t.s2.data[i]);
    }
    s.a0 = t.a0;
    s.a1 = t.a1;
    s.r = t.r;
    s.done = t.done;
    s.handle = handle;
    size_ = std::min(size_ + 1, cfg_.capacity);
    set_priority(slot, max_raw_); // overwrites any evicted leaf
    return handle;
}

ReplayBatch PrioritizedBuffer::sample(int batch, Rng& rng) {
    if (batch <= 0) throw ContractError("replay: nonpositive batch");
    if (size_ < static_cast<std::size_t>(batch))
        throw ContractError("replay: need " + std::to_string(batch) + " transitions, have " +
                            std::to_string(size_));
    const int C = obs_shape_[0], H = obs_shape_[1], W = obs_shape_[2];
    ReplayBatch out;
    out.s = Tensor::zeros({batch, C, H, W});
    out.s2 = Tensor::zeros({batch, C, H, W});
    out.actions = Tensor::zeros({batch, 2});
    out.rewards.resize(static_cast<std::size_t>(batch));
    out.done.resize(static_cast<std::size_t>(batch));
    out.handles.resize(static_cast<std::size_t>(batch));
    out.weights.assign(static_cast<std::size_t>(batch), 1.0f);

    const double total = tree_.total();
    const double n = static_cast<double>(size_);
    std::vector<double> probs(static_cast<std::size_t>(batch));
    for (int b = 0; b < batch; ++b) {
        // one draw per equal segment of [0, total)
        const double seg = total / batch;
        const double u = (b + rng.uniform()) * seg;
        const std::size_t slot = tree_.sample(std::min(u, total * (1.0 - 1e-12)));
        const Slot& s = slots_[slot];
        float* sd = &out.s.data[static_cast<std::size_t>(b) * obs_len_];
        float* sd2 = &out.s2.data[static_cast<std::size_t>(b) * obs_len_];
        for (std::size_t i = 0; i < obs_len_; ++i) {
            sd[i] = static_cast<float>(s.s[i]) / 255.0f;
            sd2[i] = static_cast<float>(s.s2[i]) / 255.0f;
        }
        out.actions.data[static_cast<std::size_t>(b) * 2] = s.a0;
        out.actions.data[static_cast<std::size_t>(b) * 2 + 1] = s.a1;
        out.rewards[static_cast<std::size_t>(b)] = s.r;
        out.done[static_cast<std::size_t>(b)] = s.done ? 1 : 0;
        out.handles[static_cast<std::size_t>(b)] = s.handle;
        probs[static_cast<std::size_t>(b)] = tree_.get(slot) / total;
    }

    if (cfg_.beta != 0.0) {
        float wmax = 0.0f;
        for (int b = 0; b < batch; ++b) {
            const double w = std::pow(n * probs[static_cast<std::size_t>(b)], -cfg_.beta);
            out.weights[static_cast<std::size_t>(b)] = static_cast<float>(w);
            wmax = std::max(wmax, out.weights[static_cast<std::size_t>(b)]);
        }
        for (auto& w : out.weights) w /= wmax; // max weight = 1
    }
    return out;
}

Transition PrioritizedBuffer::transition_at(std::size_t slot) const {
    if (slot >= size_) throw ContractError("replay: slot " + std::to_string(slot) + " not occupied");
    const Slot& s = slots_[slot];
    Transition t;
    t.s = Tensor::zeros(obs_shape_);
    t.s2 = Tensor::zeros(obs_shape_);
    for (std::size_t i = 0; i < obs_len_; ++i) {
        t.s.data[i] = static_cast<float>(s.s[i]) / 255.0f;
        t.s2.data[i] = static_cast<float>(s.s2[i]) / 255.0f;
    }
    t.a0 = s.a0;
    t.a1 = s.a1;
    t.r = s.r;
    t.done = s.done;
    return t;
}

void PrioritizedBuffer::update_priorities(const std::vector<std::uint64_t>& handles,
                                          const std::vector<float>& td_errors) {
    if (handles.size() != td_errors.size())
        throw ContractError("replay: " + std::to_string(handles.size()) + " handles vs " +
                            std::to_string(td_errors.size()) + " TD errors");
    for (std::size_t i = 0; i < handles.size(); ++i) {
        const std::size_t slot = handles[i] % cfg_.capacity;
        if (slots_[slot].handle != handles[i]) {
            ++evicted_skips_;
            continue;
        }
        const double raw = std::abs(static_cast<double>(td_errors[i])) + cfg_.eps;
        set_priority(slot, raw);
        max_raw_ = std::max(max_raw_, raw);
    }
}

namespace {

Tensor pack_bytes(const std::vector<std::uint8_t>& bytes) {
    const std::size_t words = (bytes.size() + 3) / 4;
    Tensor t = Tensor::zeros({static_cast<int>(words)});
    std::memcpy(t.data.data(), bytes.data(), bytes.size());
    return t;
}

std::vector<std::uint8_t> unpack_bytes(const Tensor& t, std::size_t count) {
    std::vector<std::uint8_t> out(count);
    std::memcpy(out.data(), t.data.data(), count);
    return out;
}

} // namespace

void PrioritizedBuffer::save(const std::string& path) const {
    Tensor meta = Tensor::from(
        {8}, {static_cast<float>(cfg_.capacity), static_cast<float>(cfg_.alpha),
              static_cast<float>(cfg_.beta), static_cast<float>(cfg_.eps),
              cfg_.uniform ? 1.0f : 0.0f, static_cast<float>(size_),
              static_cast<float>(next_handle_), static_cast<float>(max_raw_)});
    Tensor shape = Tensor::from({3}, {static_cast<float>(obs_shape_[0]),
                                      static_cast<float>(obs_shape_[1]),
                                      static_cast<float>(obs_shape_[2])});
    std::vector<std::uint8_t> sbytes, s2bytes;
    Tensor fields = Tensor::zeros({std::max<int>(1, static_cast<int>(size_)), 4});
    Tensor raws = Tensor::zeros({std::max<int>(1, static_cast<int>(size_))});
    for (std::size_t i = 0; i < size_; ++i) {
        const Slot& s = slots_[i];
        sbytes.insert(sbytes.end(), s.s.begin(), s.s.end());
        s2bytes.insert(s2bytes.end(), s.s2.begin(), s.s2.end());
        fields.data[i * 4] = s.a0;
        fields.data[i * 4 + 1] = s.a1;
        fields.data[i * 4 + 2] = s.r;
        fields.data[i * 4 + 3] = s.done ? 1.0f : 0.0f;
        raws.data[i] = raw_[i];
    }
    Tensor spack = pack_bytes(sbytes), s2pack = pack_bytes(s2bytes);
    save_tensor_map(path, {{"replay/meta", &meta},
                           {"replay/obs_shape", &shape},
                           {"replay/s", &spack},
                           {"replay/s2", &s2pack},
                           {"replay/fields", &fields},
                           {"replay/raw", &raws}});
}

PrioritizedBuffer PrioritizedBuffer::load(const std::string& path) {
    auto m = load_tensor_map(path);
    const Tensor& meta = m.at("replay/meta");
    const Tensor& shape = m.at("replay/obs_shape");
    ReplayConfig cfg;
    cfg.capacity = static_cast<std::size_t>(meta.data[0]);
    cfg.alpha = meta.data[1];
    cfg.beta = meta.data[2];
    cfg.eps = meta.data[3];
    cfg.uniform = meta.data[4] != 0.0f;
    std::vector<int> obs_shape = {static_cast<int>(shape.data[0]), static_cast<int>(shape.data[1]),
                                  static_cast<int>(shape.data[2])};
    PrioritizedBuffer buf(cfg, obs_shape);
    const auto size = static_cast<std::size_t>(meta.data[5]);
    const auto sbytes = unpack_bytes(m.at("replay/s"), size * buf.obs_len_);
    const auto s2bytes = unpack_bytes(m.at("replay/s2"), size * buf.obs_len_);
    const Tensor& fields = m.at("replay/fields");
    const Tensor& raws = m.at("replay/raw");
    for (std::size_t i = 0; i < size; ++i) {
        Slot& s = buf.slots_[i];
        s.s.assign(sbytes.begin() + static_cast<long>(i * buf.obs_len_),
                   sbytes.begin() + static_cast<long>((i + 1) * buf.obs_len_));
        s.s2.assign(s2bytes.begin() + static_cast<long>(i * buf.obs_len_),
                    s2bytes.begin() + static_cast<long>((i + 1) * buf.obs_len_));
        s.a0 = fields.data[i * 4];
        s.a1 = fields.data[i * 4 + 1];
        s.r = fields.data[i * 4 + 2];
        s.done = fields.data[i * 4 + 3] != 0.0f;
        s.handle = i;
        buf.set_priority(i, raws.data[i]);
    }
    buf.size_ = size;
    // handles are remapped to 0..size-1 on load; pre-save handles do not
    // survive a resume
    buf.next_handle_ = size;
    buf.max_raw_ = meta.data[7];
    return buf;
}

} // namespace dcuprl
