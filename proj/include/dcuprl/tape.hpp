#pragma once
#include <functional>
#include <deque>
#include <memory>
#include <vector>

#include "dcuprl/tensor.hpp"

namespace dcuprl {

/// Handle into a Tape's node list.
struct Var {
    int idx = -1;
    bool valid() const { return idx >= 0; }
};

/**
 * Reverse-mode autodiff over a per-forward-pass tape.
 *
 * Ops append nodes in topological order; backward() seeds the scalar loss
 * adjoint and sweeps the node list in reverse, accumulating leaf adjoints
 * into the gradient buffers of the parameter tensors they were created
 * from. The tape is meant to be built, differentiated, and discarded per
 * training step; nothing persists except the parameter grads.
 *
 * Constant leaves (observations, targets, frozen networks) carry no
 * closure, so running a forward pass through constants costs the same as
 * an inference pass.
 */
class Tape {
public:
    /// Tracked leaf. Backward accumulates into p.grad (allocated on demand).
    /// The tensor must outlive the tape.
    Var param(Tensor& p);

    /// Untracked leaf; gradient flow stops here.
    Var constant(Tensor v);

    const Tensor& value(Var v) const { return nodes_[static_cast<std::size_t>(v.idx)].value; }
    bool needs_grad(Var v) const { return nodes_[static_cast<std::size_t>(v.idx)].needs; }

    // Elementwise.
    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var neg(Var a);
    Var scale(Var a, float c);
    Var add_scalar(Var a, float c);
    Var relu(Var a);
    Var tanh(Var a);
    Var exp(Var a);
    Var log(Var a);
    Var square(Var a);
    Var clamp(Var a, float lo, float hi);
    Var min2(Var a, Var b); // elementwise min; ties route grad to a

    // Shape.
    Var reshape(Var a, std::vector<int> shape);
    Var concat_cols(Var a, Var b); // [B,N] ++ [B,M] -> [B,N+M]

    // Linear algebra.
    Var dense(Var x, Var w, Var b);       // x:[B,N] or [N], w:[M,N], b:[M]
    Var matmul_nt(Var a, Var b);          // a:[B,Z] x b:[C,Z]^T -> [B,C]
    Var conv2d(Var x, Var w, int stride); // x:[B,C,H,W] or [C,H,W], w:[F,C,k,k], valid padding

    // Reductions.
    Var sum(Var a);                                        // -> scalar
    Var mean(Var a);                                       // -> scalar
    Var row_sum(Var a);                                    // [B,N] -> [B]
    Var row_dot(Var a, Var b);                             // [B,N].[B,N] -> [B]
    Var logsumexp_rows(Var a);                             // [B,N] -> [B]; [N] -> scalar
    Var weighted_mean(Var a, const std::vector<float>& w); // (1/B) sum w_i a_i

    /// Reverse sweep from a scalar loss node.
    void backward(Var loss);

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        std::vector<float> adj; // allocated lazily during backward
        bool needs = false;
        Tensor* sink = nullptr;                // leaf params accumulate here
        std::function<void(Tape&, int)> back;  // empty for leaves
    };

    std::deque<Node> nodes_; // deque: value() references stay valid as ops append

    Node& node(Var v) { return nodes_[static_cast<std::size_t>(v.idx)]; }
    const Node& node(Var v) const { return nodes_[static_cast<std::size_t>(v.idx)]; }
    Var push(Tensor value, bool needs, std::function<void(Tape&, int)> back);
    std::vector<float>& adj(int i);
    bool has_adj(int i) const { return !nodes_[static_cast<std::size_t>(i)].adj.empty(); }

    template <class Fwd, class Bwd>
    Var unary(Var a, Fwd f, Bwd df); // df(x, y) = dy/dx
};

} // namespace dcuprl
