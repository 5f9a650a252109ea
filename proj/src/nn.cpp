#include "dcuprl/nn.hpp"

#include <cmath>

namespace dcuprl {

Tensor& ParamSet::add(const std::string& name, std::vector<int> shape) {
    if (index_.count(name)) throw ContractError("duplicate parameter name: " + name);
    Entry e;
    e.t = Tensor::zeros(shape);
    e.m = Tensor::zeros(shape);
    e.v = Tensor::zeros(std::move(shape));
    index_.emplace(name, static_cast<int>(entries_.size()));
    names_.push_back(name);
    entries_.push_back(std::move(e));
    return entries_.back().t;
}

Tensor& ParamSet::param(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw ContractError("unknown parameter: " + name);
    return entries_[static_cast<std::size_t>(it->second)].t;
}

const Tensor& ParamSet::param(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ContractError("unknown parameter: " + name);
    return entries_[static_cast<std::size_t>(it->second)].t;
}

void ParamSet::zero_grads() {
    for (auto& e : entries_) e.t.zero_grad();
}

bool ParamSet::any_grad_allocated() const {
    for (const auto& e : entries_)
        if (e.t.grad) return true;
    return false;
}

void ParamSet::check_structure(const ParamSet& o, const char* op) const {
    if (names_ != o.names_)
        throw ContractError(std::string(op) + ": parameter sets differ in names/order");
    for (std::size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].t.shape != o.entries_[i].t.shape)
            throw ContractError(std::string(op) + ": shape mismatch for '" + names_[i] + "'");
}

void ParamSet::copy_values_from(const ParamSet& src) {
    check_structure(src, "copy_values_from");
    for (std::size_t i = 0; i < entries_.size(); ++i)
        entries_[i].t.data = src.entries_[i].t.data;
}

std::int64_t ParamSet::total_params() const {
    std::int64_t n = 0;
    for (const auto& e : entries_) n += e.t.numel();
    return n;
}

double grad_norm(const ParamSet& ps) {
    double acc = 0.0;
    for (const auto& name : ps.names()) {
        const Tensor& t = ps.param(name);
        if (!t.grad) throw ContractError("grad_norm: missing grad for '" + name + "'");
        for (float g : *t.grad) acc += static_cast<double>(g) * g;
    }
    return std::sqrt(acc);
}

void adam_step(ParamSet& ps, float lr, const AdamConfig& cfg) {
    for (std::size_t i = 0; i < ps.entries_.size(); ++i)
        if (!ps.entries_[i].t.grad)
            throw ContractError("adam_step: missing grad for '" + ps.names_[i] + "'");

    float scale = 1.0f;
    if (cfg.clip_norm > 0.0f) {
        const double norm = grad_norm(ps);
        if (norm > cfg.clip_norm) scale = static_cast<float>(cfg.clip_norm / norm);
    }

    ps.step_ += 1;
    const double t = static_cast<double>(ps.step_);
    const float bc1 = static_cast<float>(1.0 - std::pow(static_cast<double>(cfg.beta1), t));
    const float bc2 = static_cast<float>(1.0 - std::pow(static_cast<double>(cfg.beta2), t));

    for (auto& e : ps.entries_) {
        const auto& g = *e.t.grad;
        for (std::size_t j = 0; j < g.size(); ++j) {
            const float gj = g[j] * scale;
            e.m.data[j] = cfg.beta1 * e.m.data[j] + (1.0f - cfg.beta1) * gj;
            e.v.data[j] = cfg.beta2 * e.v.data[j] + (1.0f - cfg.beta2) * gj * gj;
            const float mhat = e.m.data[j] / bc1;
            const float vhat = e.v.data[j] / bc2;
            e.t.data[j] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

void blend(ParamSet& dst, const ParamSet& src, float keep) {
    dst.check_structure(src, "blend");
    const float take = 1.0f - keep;
    for (std::size_t i = 0; i < dst.entries_.size(); ++i) {
        auto& d = dst.entries_[i].t.data;
        const auto& s = src.entries_[i].t.data;
        for (std::size_t j = 0; j < d.size(); ++j) d[j] = keep * d[j] + take * s[j];
    }
}

void init_uniform_fanin(Tensor& t, int fan_in, Rng& rng) {
    const double limit = std::sqrt(1.0 / static_cast<double>(fan_in));
    for (auto& v : t.data) v = static_cast<float>(rng.uniform(-limit, limit));
}

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178; // 0.5*ln(2*pi)

PolicySample build_squashed(Tape& t, Var mean, Var log_std, Tensor xi) {
    const Tensor& mv = t.value(mean);
    if (!t.value(log_std).same_shape(mv) || !xi.same_shape(mv))
        throw ShapeError("squashed_gaussian: mean/log_std/noise shapes disagree");
    const bool batched = mv.rank() == 2;
    const int B = batched ? mv.dim(0) : 1;
    const int A = batched ? mv.dim(1) : mv.dim(0);

    Var lsc = t.clamp(log_std, kLogStdMin, kLogStdMax);
    Var std = t.exp(lsc);

    // constant part of the Gaussian log density at the sampled point:
    // sum_a -0.5*xi^2 - 0.5*ln(2*pi)
    Tensor const_row = Tensor::zeros({B});
    for (int r = 0; r < B; ++r) {
        double acc = 0.0;
        for (int a = 0; a < A; ++a) {
            const double e = xi.data[static_cast<std::size_t>(r) * A + a];
            acc += -0.5 * e * e - kHalfLog2Pi;
        }
        const_row.data[static_cast<std::size_t>(r)] = static_cast<float>(acc);
    }

    Var noise = t.constant(std::move(xi));
    Var u = t.add(mean, t.mul(std, noise));
    Var action = t.tanh(u);

    Var lsc2 = batched ? lsc : t.reshape(lsc, {1, A});
    Var act2 = batched ? action : t.reshape(action, {1, A});
    Var gauss = t.sub(t.constant(std::move(const_row)), t.row_sum(lsc2));
    // tanh change of variables: -sum log(1 - a^2 + eps)
    Var squash = t.row_sum(t.log(t.add_scalar(t.neg(t.square(act2)), 1.0f + kSquashEps)));
    Var log_prob = t.sub(gauss, squash);
    if (!batched) log_prob = t.reshape(log_prob, {1});
    return {action, log_prob};
}

} // namespace

PolicySample squashed_gaussian(Tape& t, Var mean, Var log_std, Rng& rng) {
    const Tensor& mv = t.value(mean);
    Tensor xi = Tensor::zeros(mv.shape);
    for (auto& v : xi.data) v = static_cast<float>(rng.normal());
    return build_squashed(t, mean, log_std, std::move(xi));
}

PolicySample squashed_gaussian_with_noise(Tape& t, Var mean, Var log_std, Tensor xi) {
    return build_squashed(t, mean, log_std, std::move(xi));
}

Tensor squashed_mean_action(const Tensor& mean) {
    Tensor a = Tensor::zeros(mean.shape);
    for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] = std::tanh(mean.data[i]);
    return a;
}

} // namespace dcuprl
