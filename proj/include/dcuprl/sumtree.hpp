#pragma once
#include <cstddef>
#include <vector>

namespace dcuprl {

/**
 * Sum-tree (segment tree) for O(log N) proportional sampling.
 *
 * Complete binary tree in a flat array: node 1 is the root (total sum),
 * leaves live at [cap, 2*cap) with cap the next power of two >= the
 * requested capacity. Internal nodes hold the sum of their children.
 * Sums are kept in double and rebuilt exactly from the leaves every
 * 65536 writes, so drift never accumulates.
 */
class SumTree {
public:
    explicit SumTree(std::size_t capacity);

    /// Write a leaf and propagate sums to the root. O(log N).
    void update(std::size_t leaf, double value);

    double get(std::size_t leaf) const;
    double total() const { return nodes_[1]; }
    std::size_t capacity() const { return logical_; }

    /// Prefix-sum descent: the leaf i with cum(p_0..p_{i-1}) <= u < cum(p_0..p_i).
    /// u must be in [0, total()).
    std::size_t sample(double u) const;

    /// Recompute every internal node from the leaves. O(N).
    void rebuild();

private:
    std::size_t logical_;
    std::size_t cap_; // power-of-two leaf count
    std::vector<double> nodes_;
    std::size_t writes_since_rebuild_ = 0;
};

} // namespace dcuprl
