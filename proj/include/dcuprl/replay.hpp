#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "dcuprl/rng.hpp"
#include "dcuprl/sumtree.hpp"
#include "dcuprl/tensor.hpp"

namespace dcuprl {

/// One stored interaction: stacked observation, normalized action pair,
/// reward, successor stack, terminal flag. Observations arrive normalized
/// to [0,1] and are kept u8-quantized (round(v*255)) to bound memory;
/// sampling dequantizes back to float as q/255.
struct Transition {
    Tensor s;  // [C,H,W], values in [0,1]
    float a0 = 0.0f, a1 = 0.0f;
    float r = 0.0f;
    Tensor s2; // same shape as s
    bool done = false;
};

struct ReplayConfig {
    std::size_t capacity = 10000;
    double alpha = 0.6;   // priority exponent, applied at sampling time
    double beta = 0.4;    // importance-sampling exponent; annealed by the caller
    double eps = 1e-6;    // priority floor added to |td|
    bool uniform = false; // ablation switch: uniform sampling, unit weights
};

/// Sampled minibatch. Observation stacks are dequantized, batch-major.
struct ReplayBatch {
    Tensor s;                          // [B,C,H,W]
    Tensor s2;                         // [B,C,H,W]
    Tensor actions;                    // [B,2]
    std::vector<float> rewards;        // [B]
    std::vector<std::uint8_t> done;    // [B]
    std::vector<std::uint64_t> handles; // for update_priorities
    std::vector<float> weights;        // importance-sampling, max = 1
};

/**
 * Capacity-bounded ring of transitions with proportional prioritized
 * sampling over a sum tree.
 *
 * Raw priorities are |td| + eps; the tree stores raw^alpha so sampling
 * is proportional to p^alpha without re-touching leaves when alpha is
 * fixed. New transitions enter at the running max raw priority so each
 * experience gets replayed at least plausibly once. With uniform=true
 * (or alpha=0) sampling degenerates to uniform with unit weights.
 *
 * Single-writer, single-sampler; the trainer owns the buffer.
 */
class PrioritizedBuffer {
public:
    PrioritizedBuffer(ReplayConfig cfg, std::vector<int> obs_shape);

    /// Store a transition, evicting the oldest when full. Returns a
    /// monotone handle identifying this insertion.
    std::uint64_t push(const Transition& t);

    /// Stratified proportional sample of `batch` transitions.
    /// Requires size() >= batch.
    ReplayBatch sample(int batch, Rng& rng);

    /// Refresh priorities from TD errors for previously sampled handles.
    /// Handles whose slot has been evicted since are skipped and counted.
    void update_priorities(const std::vector<std::uint64_t>& handles,
                           const std::vector<float>& td_errors);

    /// Dequantized copy of the transition stored in a slot (inspection,
    /// tests). Slots [0, size()) are occupied.
    Transition transition_at(std::size_t slot) const;

    std::size_t size() const { return size_; }
    std::size_t capacity() const { return cfg_.capacity; }
    double max_raw_priority() const { return max_raw_; }
    long evicted_update_skips() const { return evicted_skips_; }
    double beta() const { return cfg_.beta; }
    void set_beta(double b) { cfg_.beta = b; }
    double tree_total() const { return tree_.total(); }
    double leaf_value(std::size_t slot) const { return tree_.get(slot); }

    /// Snapshot to/from the DCPL tensor container (quantized bytes are
    /// bit-packed four per float). For resuming runs.
    void save(const std::string& path) const;
    static PrioritizedBuffer load(const std::string& path);

private:
    ReplayConfig cfg_;
    std::vector<int> obs_shape_; // [C,H,W]
    std::size_t obs_len_;

    struct Slot {
        std::vector<std::uint8_t> s, s2;
        float a0, a1, r;
        bool done;
        std::uint64_t handle;
    };
    std::vector<Slot> slots_;
    std::size_t size_ = 0;
    std::uint64_t next_handle_ = 0;
    double max_raw_ = 1.0;
    SumTree tree_;
    std::vector<float> raw_; // raw priority per slot
    long evicted_skips_ = 0;

    void set_priority(std::size_t slot, double raw);
    PrioritizedBuffer() : tree_(1) {} // for load()
};

} // namespace dcuprl
