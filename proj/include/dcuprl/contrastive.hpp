#pragma once
#include "dcuprl/nn.hpp"
#include "dcuprl/tape.hpp"

namespace dcuprl {

struct ContrastiveConfig {
    float momentum = 0.95f; // key retains this fraction per update
    bool bilinear = false;  // similarity q^T W k instead of plain q.k
};

/**
 * InfoNCE over a batch of query/key latents: row i of q and k form the
 * positive pair, the other rows are negatives. The minimized loss is
 *
 *   (1/B) sum_i [ logsumexp_j(q_i.k_j) - q_i.k_i ]
 *
 * i.e. softmax cross-entropy with diagonal labels; it is >= 0 and
 * exactly 0 at B = 1. k must enter as a constant: keys never receive
 * gradients, the key encoder follows by momentum instead.
 */
Var info_nce(Tape& t, Var q, Var k);

/// Bilinear similarity variant: logits_ij = (q_i W) . k_j, W learned.
Var info_nce_bilinear(Tape& t, Var q, Var w, Var k);

/// Full-precision loss evaluation (double), same definition, computed
/// outside the float32 tape. q,k are [B,Z] latents.
double info_nce_value(const Tensor& q, const Tensor& k);

/// Key-encoder momentum step: key <- m*key + (1-m)*query.
inline void momentum_update(ParamSet& key, const ParamSet& query, float m) {
    blend(key, query, m);
}

} // namespace dcuprl
