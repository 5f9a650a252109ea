#include "dcuprl/sac.hpp"

#include <cmath>

namespace dcuprl {

ParamSet make_actor(const SacConfig& cfg, int latent_dim, Rng& rng) {
    ParamSet ps;
    init_uniform_fanin(ps.add("fc1.w", {cfg.hidden, latent_dim}), latent_dim, rng);
    ps.add("fc1.b", {cfg.hidden});
    init_uniform_fanin(ps.add("fc2.w", {cfg.hidden, cfg.hidden}), cfg.hidden, rng);
    ps.add("fc2.b", {cfg.hidden});
    init_uniform_fanin(ps.add("mean.w", {cfg.action_dim, cfg.hidden}), cfg.hidden, rng);
    ps.add("mean.b", {cfg.action_dim});
    init_uniform_fanin(ps.add("logstd.w", {cfg.action_dim, cfg.hidden}), cfg.hidden, rng);
    ps.add("logstd.b", {cfg.action_dim});
    return ps;
}

ParamSet make_critic(const SacConfig& cfg, int latent_dim, Rng& rng) {
    ParamSet ps;
    const int in = latent_dim + cfg.action_dim;
    init_uniform_fanin(ps.add("fc1.w", {cfg.hidden, in}), in, rng);
    ps.add("fc1.b", {cfg.hidden});
    init_uniform_fanin(ps.add("fc2.w", {cfg.hidden, cfg.hidden}), cfg.hidden, rng);
    ps.add("fc2.b", {cfg.hidden});
    init_uniform_fanin(ps.add("out.w", {1, cfg.hidden}), cfg.hidden, rng);
    ps.add("out.b", {1});
    return ps;
}

ActorHeads actor_forward(Tape& t, ParamSet& actor, Var latent, bool record_gradients) {
    auto weight = [&](const char* name) {
        return record_gradients ? t.param(actor.param(name)) : t.constant(actor.param(name));
    };
    Var h = t.relu(t.dense(latent, weight("fc1.w"), weight("fc1.b")));
    h = t.relu(t.dense(h, weight("fc2.w"), weight("fc2.b")));
    return {t.dense(h, weight("mean.w"), weight("mean.b")),
            t.dense(h, weight("logstd.w"), weight("logstd.b"))};
}

Var critic_forward(Tape& t, ParamSet& critic, Var latent, Var action, bool record_gradients) {
    auto weight = [&](const char* name) {
        return record_gradients ? t.param(critic.param(name)) : t.constant(critic.param(name));
    };
    Var x = t.concat_cols(latent, action);
    Var h = t.relu(t.dense(x, weight("fc1.w"), weight("fc1.b")));
    h = t.relu(t.dense(h, weight("fc2.w"), weight("fc2.b")));
    return t.dense(h, weight("out.w"), weight("out.b"));
}

Tensor critic_values(const ParamSet& critic, const Tensor& latent, const Tensor& action) {
    Tape t;
    Var q = critic_forward(t, const_cast<ParamSet&>(critic), t.constant(latent),
                           t.constant(action), false);
    return t.value(q);
}

Tensor act(const ParamSet& actor, const Tensor& latent, bool deterministic, Rng& rng) {
    Tape t;
    const bool batched = latent.rank() == 2;
    Var lat = t.constant(latent);
    auto heads = actor_forward(t, const_cast<ParamSet&>(actor), lat, false);
    if (deterministic) return squashed_mean_action(t.value(heads.mean));
    auto sample = squashed_gaussian(t, heads.mean, heads.log_std, rng);
    (void)batched;
    return t.value(sample.action);
}

std::vector<float> compute_targets(const ParamSet& actor, const ParamSet& target1,
                                   const ParamSet& target2, const Tensor& latent2,
                                   const std::vector<float>& rewards,
                                   const std::vector<std::uint8_t>& done, float alpha, float gamma,
                                   Rng& rng) {
    const int B = latent2.dim(0);
    Tape t;
    Var lat = t.constant(latent2);
    auto heads = actor_forward(t, const_cast<ParamSet&>(actor), lat, false);
    auto sample = squashed_gaussian(t, heads.mean, heads.log_std, rng);
    Var q1 = critic_forward(t, const_cast<ParamSet&>(target1), lat, sample.action, false);
    Var q2 = critic_forward(t, const_cast<ParamSet&>(target2), lat, sample.action, false);
    const Tensor& q1v = t.value(q1);
    const Tensor& q2v = t.value(q2);
    const Tensor& lp = t.value(sample.log_prob);

    std::vector<float> y(static_cast<std::size_t>(B));
    for (int b = 0; b < B; ++b) {
        const auto i = static_cast<std::size_t>(b);
        const float qmin = std::min(q1v.data[i], q2v.data[i]);
        y[i] = soft_target(rewards[i], gamma, done[i] != 0, qmin, alpha, lp.data[i]);
    }
    return y;
}

CriticUpdateResult critic_update(ParamSet& encoder_q, const EncoderConfig& ecfg, ParamSet& critic1,
                                 ParamSet& critic2, const Tensor& obs_center,
                                 const Tensor& actions, const std::vector<float>& targets,
                                 const std::vector<float>& weights, const SacConfig& cfg) {
    const int B = obs_center.dim(0);
    if (static_cast<int>(targets.size()) != B || static_cast<int>(weights.size()) != B)
        throw ShapeError("critic_update: batch " + std::to_string(B) + " vs " +
                         std::to_string(targets.size()) + " targets, " +
                         std::to_string(weights.size()) + " weights");

    encoder_q.zero_grads();
    critic1.zero_grads();
    critic2.zero_grads();

    Tape t;
    Var obs = t.constant(obs_center);
    Var latent = encode(t, encoder_q, obs, ecfg, true);
    Var action = t.constant(actions);
    Var q1 = critic_forward(t, critic1, latent, action, true);
    Var q2 = critic_forward(t, critic2, latent, action, true);

    Tensor ycol = Tensor::zeros({B, 1});
    for (int b = 0; b < B; ++b) ycol.data[static_cast<std::size_t>(b)] = targets[static_cast<std::size_t>(b)];
    Var y = t.constant(ycol);
    Var se = t.add(t.square(t.sub(q1, y)), t.square(t.sub(q2, y))); // [B,1]
    Var loss = t.weighted_mean(t.reshape(se, {B}), weights);
    t.backward(loss);

    adam_step(critic1, cfg.lr);
    adam_step(critic2, cfg.lr);
    adam_step(encoder_q, cfg.lr);

    CriticUpdateResult out;
    out.loss = t.value(loss).data[0];
    out.latents = t.value(latent);
    out.td_errors.resize(static_cast<std::size_t>(B));
    const Tensor& q1v = t.value(q1);
    const Tensor& q2v = t.value(q2);
    for (int b = 0; b < B; ++b)
        out.td_errors[static_cast<std::size_t>(b)] =
            targets[static_cast<std::size_t>(b)] - std::min(q1v.data[static_cast<std::size_t>(b)],
                                                            q2v.data[static_cast<std::size_t>(b)]);
    return out;
}

ActorUpdateResult actor_update_with_q(ParamSet& actor, const Tensor& latents, float alpha,
                                      float lr, Rng& rng, const QBuilder& q_builder) {
    const int B = latents.dim(0);
    actor.zero_grads();

    Tape t;
    Var lat = t.constant(latents);
    auto heads = actor_forward(t, actor, lat, true);
    auto sample = squashed_gaussian(t, heads.mean, heads.log_std, rng);
    Var q = q_builder(t, lat, sample.action); // [B,1], built from constants
    Var objective = t.sub(t.scale(sample.log_prob, alpha), t.reshape(q, {B}));
    Var loss = t.mean(objective);
    t.backward(loss);
    adam_step(actor, lr);

    ActorUpdateResult out;
    out.loss = t.value(loss).data[0];
    const Tensor& lp = t.value(sample.log_prob);
    out.log_probs.assign(lp.data.begin(), lp.data.end());
    return out;
}

ActorUpdateResult actor_update(ParamSet& actor, ParamSet& critic1, ParamSet& critic2,
                               const Tensor& latents, const SacConfig& cfg, Rng& rng) {
    // critics and encoder stay frozen here: they enter the graph as
    // constants, so no gradient can reach them by construction
    QBuilder qmin = [&critic1, &critic2](Tape& t, Var lat, Var action) {
        Var q1 = critic_forward(t, critic1, lat, action, false);
        Var q2 = critic_forward(t, critic2, lat, action, false);
        return t.min2(q1, q2);
    };
    return actor_update_with_q(actor, latents, cfg.alpha, cfg.lr, rng, qmin);
}

AlphaState::AlphaState(float initial_alpha, int action_dim)
    : target_entropy(-static_cast<float>(action_dim)) {
    log_alpha.add("log_alpha", {1}).data[0] = std::log(initial_alpha);
}

float AlphaState::value() const { return std::exp(log_alpha.param("log_alpha").data[0]); }

float alpha_update(AlphaState& st, const std::vector<float>& log_probs, float lr) {
    // d/dlog_alpha of -log_alpha * mean(log_pi + target_entropy)
    double mean_excess = 0.0;
    for (float lp : log_probs) mean_excess += static_cast<double>(lp) + st.target_entropy;
    mean_excess /= static_cast<double>(log_probs.size());
    st.log_alpha.zero_grads();
    Tensor& la = st.log_alpha.param("log_alpha");
    la.ensure_grad();
    (*la.grad)[0] = static_cast<float>(-mean_excess);
    adam_step(st.log_alpha, lr);
    return std::exp(la.data[0]);
}

} // namespace dcuprl
