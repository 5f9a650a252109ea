#pragma once
#include <optional>
#include <string>

#include "dcuprl/contrastive.hpp"
#include "dcuprl/replay.hpp"
#include "dcuprl/sac.hpp"
#include "dcuprl/sim.hpp"

namespace dcuprl {

/// Raised when training produces a non-finite loss; carries a diagnostic
/// dump of the last batch statistics.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class InputKind { depth, pixel };

/// Ablation switchboard. The named presets map onto the four compared
/// configurations: full method, no-priority, pixel-input, no-contrastive.
struct VariantConfig {
    std::string name = "depth-cuprl";
    InputKind input = InputKind::depth;
    bool contrastive = true;
    bool prioritized = true;

    std::string algorithm_label() const;
    std::string image_label() const;
};

/// Presets: depth-cuprl, curl-depth, curl-pixel, sac-cnn-prio.
VariantConfig variant_preset(const std::string& name);
const std::vector<std::string>& variant_names();

struct TrainConfig {
    std::string arena_path;
    std::string out_dir; // empty: keep everything in memory, write nothing
    std::uint64_t seed = 0;

    long total_steps = 20000;
    int episode_cap = 1000;
    long warmup = 1000;
    long eval_period = 1000;
    int eval_episodes = 10;
    int final_episodes = 1000;

    int render_size = 40;
    int crop_size = 32;
    int stack = 3;
    int latent_dim = 50;
    double dt = 0.1;
    double fov = 1.5707963267948966;
    double max_range = 10.0;
    double depth_noise_sigma = 0.0;

    int rl_period = 1;  // RL update every n post-warmup steps
    int nce_period = 1; // contrastive update cadence

    ReplayConfig replay;
    SacConfig sac;
    ContrastiveConfig curl;

    CameraConfig camera() const;
    EncoderConfig encoder() const;
    void validate() const;
};

/// Ring of the last `stack` frames, newest first (channel 0 is the
/// current frame). Episode start replicates the first frame across all
/// slots so early stacks never contain stale or zero frames.
class FrameStacker {
public:
    FrameStacker(int stack, int h, int w);
    void reset(const Tensor& frame); // frame [H,W]
    void push(const Tensor& frame);
    Tensor stacked() const; // [stack,H,W]

private:
    int stack_, h_, w_;
    std::vector<Tensor> frames_; // newest first
};

/// All trainable state for one run.
struct Agent {
    EncoderConfig ecfg;
    SacConfig scfg;
    ContrastiveConfig ccfg;
    ParamSet enc_q, enc_k, actor, critic1, critic2, target1, target2;
    std::optional<ParamSet> curl_w;
    std::optional<AlphaState> alpha_state;

    static Agent make(const TrainConfig& cfg, Rng& rng);
    float alpha() const;
    void save(const std::string& path) const;
    void load(const std::string& path);
};

struct EvalResult {
    double mean_return = 0.0;
    int successes = 0;
    int episodes = 0;
};

struct SuccessRow {
    std::string algorithm, image;
    int success = 0, crash = 0;
    double rate = 0.0; // percent
};

/// "Success | Crash | Success Rate (%)" with integral rates printed
/// without decimals (1000 -> "100%", 856 -> "85.6%").
std::string format_rate(double percent);
std::string format_table(const std::vector<SuccessRow>& rows);

struct RunMetrics {
    std::vector<double> episode_returns;
    std::vector<long> episode_end_steps; // global step at each episode end
    std::vector<double> eval_mean_returns;
    long critic_updates = 0, actor_updates = 0, polyak_updates = 0, nce_updates = 0;
    long env_steps = 0, episodes = 0;
    double steps_per_sec = 0.0;
};

/**
 * Full interaction/update loop: act (stochastic after a uniform-random
 * warmup), step the world, stack and store frames, then per post-warmup
 * step run the critic/actor/Polyak updates and, when the variant asks
 * for it, a contrastive update with fresh random crop pairs. Priorities
 * are refreshed from TD errors when prioritized replay is on. Writes
 * metrics.csv rows per episode end and per periodic deterministic eval,
 * and checkpoints parameters alongside.
 */
class Trainer {
public:
    Trainer(TrainConfig cfg, VariantConfig variant);

    RunMetrics run();

    /// Deterministic-policy evaluation, episodes stepped in lockstep so
    /// encoder passes batch across them. eval_tag separates RNG substreams
    /// of distinct eval rounds.
    EvalResult evaluate(int episodes, std::uint64_t eval_tag);

    SuccessRow final_eval();

    Agent& agent() { return agent_; }
    const PrioritizedBuffer& buffer() const { return buffer_; }
    const TrainConfig& config() const { return cfg_; }
    long global_step() const { return global_step_; }

    /// Dequantized copy of a stored transition (tests, debugging).
    Transition stored_transition(std::size_t slot) const;

private:
    TrainConfig cfg_;
    VariantConfig variant_;
    Arena arena_;
    Sim sim_;
    Agent agent_;
    PrioritizedBuffer buffer_;
    FrameStacker stacker_;
    Rng env_rng_, actor_rng_, update_rng_, replay_rng_, augment_rng_;
    long global_step_ = 0;

    // loss accumulators between metric rows
    double critic_loss_acc_ = 0.0, actor_loss_acc_ = 0.0, nce_loss_acc_ = 0.0;
    long critic_loss_n_ = 0, actor_loss_n_ = 0, nce_loss_n_ = 0;
    RunMetrics metrics_;

    Tensor observe(); // current frame [H,W], normalized to [0,1]
    Tensor policy_action(const Tensor& stack);
    void update_step();
    void rl_update(const ReplayBatch& batch);
    void nce_update(const ReplayBatch& batch);
    void check_finite(float loss, const char* what, const ReplayBatch& batch) const;
};

/// Deterministic-policy evaluation without a Trainer (loaded parameter
/// files, cross-environment checks).
EvalResult evaluate_policy(const Agent& agent, const Arena& arena, const TrainConfig& cfg,
                           const VariantConfig& variant, int episodes, std::uint64_t seed,
                           std::uint64_t eval_tag);

/// Train every variant under the same budget and seeds, then run the
/// final evaluation; per-variant failures are reported without aborting
/// the siblings. Rows come back in the fixed presentation order.
struct CompareEntry {
    std::string variant;
    std::uint64_t seed;
    SuccessRow row;
    std::string error; // empty on success
};
struct CompareResult {
    std::vector<CompareEntry> entries;        // one per (variant, seed)
    std::vector<SuccessRow> averaged;         // one per variant
    std::string table;                        // formatted
};
CompareResult compare(const std::vector<std::string>& variants,
                      const std::vector<std::uint64_t>& seeds, const TrainConfig& base);

} // namespace dcuprl
