#pragma once
#include <functional>

#include "dcuprl/encoder.hpp"
#include "dcuprl/nn.hpp"

namespace dcuprl {

struct SacConfig {
    float gamma = 0.99f; // discount
    float tau = 0.005f;  // Polyak rate for target critics
    float alpha = 0.1f;  // entropy coefficient (fixed unless auto_alpha)
    bool auto_alpha = false;
    float lr = 3e-4f;
    int batch = 32;
    int hidden = 256;
    int action_dim = 2;

    void validate() const {
        if (!(gamma > 0.0f && gamma < 1.0f)) throw ConfigError("sac: gamma must be in (0,1)");
        if (!(tau > 0.0f && tau <= 1.0f)) throw ConfigError("sac: tau must be in (0,1]");
        if (batch < 1) throw ConfigError("sac: batch must be >= 1");
    }
};

/// Two hidden relu layers from the latent, then mean and log_std heads.
ParamSet make_actor(const SacConfig& cfg, int latent_dim, Rng& rng);

/// One Q network: dense(latent+action -> hidden) relu, dense(hidden) relu,
/// dense -> scalar. Twin critics are two independently initialized sets.
ParamSet make_critic(const SacConfig& cfg, int latent_dim, Rng& rng);

struct ActorHeads {
    Var mean, log_std; // [B,A] each
};
ActorHeads actor_forward(Tape& t, ParamSet& actor, Var latent, bool record_gradients);

/// Q(latent, action) -> [B,1].
Var critic_forward(Tape& t, ParamSet& critic, Var latent, Var action, bool record_gradients);

/// Value-only critic evaluation.
Tensor critic_values(const ParamSet& critic, const Tensor& latent, const Tensor& action);

/// Single- or batch-latent action selection. Deterministic mode returns
/// tanh(mean) and draws nothing from the RNG.
Tensor act(const ParamSet& actor, const Tensor& latent, bool deterministic, Rng& rng);

/// y = r + gamma*(1-done)*(min_q - alpha*log_pi). Bootstrap is masked
/// through terminals since collisions end the episode.
inline float soft_target(float r, float gamma, bool done, float min_q, float alpha, float log_pi) {
    return r + gamma * (done ? 0.0f : 1.0f) * (min_q - alpha * log_pi);
}

/// Bellman targets y = r + gamma*(1-done)*(min Q'(s',a') - alpha*log pi(a'|s'))
/// with a' freshly sampled from the current policy; no gradients flow.
std::vector<float> compute_targets(const ParamSet& actor, const ParamSet& target1,
                                   const ParamSet& target2, const Tensor& latent2,
                                   const std::vector<float>& rewards,
                                   const std::vector<std::uint8_t>& done, float alpha, float gamma,
                                   Rng& rng);

struct CriticUpdateResult {
    float loss = 0.0f;
    std::vector<float> td_errors; // y - min(Q1,Q2)(s,a), for replay priorities
    Tensor latents;               // encoder outputs, reusable (detached) by the actor step
};

/// Importance-weighted MSE on both critics; one Adam step on each critic
/// and on the query encoder (which receives the critic gradients).
CriticUpdateResult critic_update(ParamSet& encoder_q, const EncoderConfig& ecfg, ParamSet& critic1,
                                 ParamSet& critic2, const Tensor& obs_center,
                                 const Tensor& actions, const std::vector<float>& targets,
                                 const std::vector<float>& weights, const SacConfig& cfg);

/// Q-value graph builder: (tape, latent constant, action) -> [B,1] value.
using QBuilder = std::function<Var(Tape&, Var, Var)>;

struct ActorUpdateResult {
    float loss = 0.0f;
    std::vector<float> log_probs; // of the freshly sampled actions
};

/// Minimize mean(alpha*log pi - Q) over reparameterized actions. Only the
/// actor parameters move; the Q graph must be built from constants.
ActorUpdateResult actor_update_with_q(ParamSet& actor, const Tensor& latents, float alpha,
                                      float lr, Rng& rng, const QBuilder& q_builder);

/// Production form: Q = min of the two (frozen) critics.
ActorUpdateResult actor_update(ParamSet& actor, ParamSet& critic1, ParamSet& critic2,
                               const Tensor& latents, const SacConfig& cfg, Rng& rng);

/// theta' <- tau*theta + (1-tau)*theta'.
inline void polyak_update(ParamSet& target, const ParamSet& main, float tau) {
    blend(target, main, 1.0f - tau);
}

/// Optional entropy-coefficient adaptation (off by default in SacConfig):
/// gradient step on log alpha toward a target entropy of -action_dim.
struct AlphaState {
    ParamSet log_alpha;
    float target_entropy;
    AlphaState(float initial_alpha, int action_dim);
    float value() const;
};
float alpha_update(AlphaState& st, const std::vector<float>& log_probs, float lr);

} // namespace dcuprl
