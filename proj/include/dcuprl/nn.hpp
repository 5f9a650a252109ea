#pragma once
#include <string>
#include <unordered_map>
#include <vector>

#include "dcuprl/rng.hpp"
#include "dcuprl/tape.hpp"
#include "dcuprl/tensor.hpp"

namespace dcuprl {

struct AdamConfig {
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float eps = 1e-8f;
    float clip_norm = 10.0f; // global grad-norm clip; 0 disables
};

/**
 * Named, ordered collection of parameter tensors with paired Adam moment
 * state and a shared step counter. One ParamSet per network; Polyak and
 * momentum updates blend structurally identical sets.
 */
class ParamSet {
public:
    /// Register a new zero-initialized parameter. Names must be unique.
    Tensor& add(const std::string& name, std::vector<int> shape);

    Tensor& param(const std::string& name);
    const Tensor& param(const std::string& name) const;
    bool has(const std::string& name) const { return index_.count(name) != 0; }

    const std::vector<std::string>& names() const { return names_; }
    std::size_t size() const { return names_.size(); }
    long step() const { return step_; }

    void zero_grads();
    /// True if any parameter has ever received a gradient buffer.
    bool any_grad_allocated() const;

    /// Copy values (not moments) from a structurally identical set.
    void copy_values_from(const ParamSet& src);

    /// Sum over all parameters of numel().
    std::int64_t total_params() const;

    friend void adam_step(ParamSet& ps, float lr, const AdamConfig& cfg);
    friend void blend(ParamSet& dst, const ParamSet& src, float keep);

private:
    struct Entry {
        Tensor t;
        Tensor m, v; // Adam moments, same shape as t
    };
    std::vector<std::string> names_;
    std::vector<Entry> entries_;
    std::unordered_map<std::string, int> index_;
    long step_ = 0;

    void check_structure(const ParamSet& o, const char* op) const;
};

/// One Adam update with bias correction over every parameter in the set.
/// All grads must be populated; grads are left untouched for the caller
/// to zero. Applies global grad-norm clipping first (cfg.clip_norm).
void adam_step(ParamSet& ps, float lr, const AdamConfig& cfg = {});

/// dst <- keep*dst + (1-keep)*src, elementwise over all parameters.
/// Polyak target update is blend(target, main, 1-tau); momentum key
/// encoder update is blend(key, query, momentum).
void blend(ParamSet& dst, const ParamSet& src, float keep);

/// Global L2 norm over all populated grads in the set.
double grad_norm(const ParamSet& ps);

// Initializers. fan_in scaling, uniform(-limit, limit) with
// limit = sqrt(1/fan_in); biases stay zero.
void init_uniform_fanin(Tensor& t, int fan_in, Rng& rng);

// --- squashed Gaussian policy head -------------------------------------

inline constexpr float kLogStdMin = -20.0f;
inline constexpr float kLogStdMax = 2.0f;
inline constexpr float kSquashEps = 1e-6f;

struct PolicySample {
    Var action;   // tanh-squashed, in (-1,1), shape [B,A]
    Var log_prob; // per-row log density, shape [B]
};

/// Reparameterized sample a = tanh(mean + exp(log_std)*xi), xi ~ N(0,1),
/// with the tanh change-of-variables correction in log_prob. log_std is
/// clamped to [kLogStdMin, kLogStdMax] inside.
PolicySample squashed_gaussian(Tape& t, Var mean, Var log_std, Rng& rng);

/// Same graph built over a caller-supplied noise tensor (tests, replays).
PolicySample squashed_gaussian_with_noise(Tape& t, Var mean, Var log_std, Tensor xi);

/// Deterministic action: tanh(mean), no tape, no noise.
Tensor squashed_mean_action(const Tensor& mean);

} // namespace dcuprl
