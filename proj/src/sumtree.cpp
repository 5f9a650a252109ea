#include "dcuprl/sumtree.hpp"

#include "dcuprl/errors.hpp"

namespace dcuprl {

SumTree::SumTree(std::size_t capacity) : logical_(capacity) {
    if (capacity == 0) throw ContractError("sum tree: zero capacity");
    cap_ = 1;
    while (cap_ < capacity) cap_ <<= 1;
    nodes_.assign(2 * cap_, 0.0);
}

void SumTree::update(std::size_t leaf, double value) {
    if (leaf >= logical_) throw ContractError("sum tree: leaf out of range");
    if (value < 0.0) throw ContractError("sum tree: negative priority");
    std::size_t i = cap_ + leaf;
    nodes_[i] = value;
    for (i >>= 1; i >= 1; i >>= 1) nodes_[i] = nodes_[2 * i] + nodes_[2 * i + 1];
    if (++writes_since_rebuild_ >= 65536) rebuild();
}

double SumTree::get(std::size_t leaf) const {
    if (leaf >= logical_) throw ContractError("sum tree: leaf out of range");
    return nodes_[cap_ + leaf];
}

std::size_t SumTree::sample(double u) const {
    std::size_t i = 1;
    while (i < cap_) {
        const std::size_t left = 2 * i;
        if (u < nodes_[left]) {
            i = left;
        } else {
            u -= nodes_[left];
            i = left + 1;
        }
    }
    std::size_t leaf = i - cap_;
    // rounding at segment edges can step onto a zero padding leaf
    while (leaf > 0 && (leaf >= logical_ || nodes_[cap_ + leaf] <= 0.0)) --leaf;
    return leaf;
}

void SumTree::rebuild() {
    for (std::size_t i = cap_ - 1; i >= 1; --i) nodes_[i] = nodes_[2 * i] + nodes_[2 * i + 1];
    writes_since_rebuild_ = 0;
}

} // namespace dcuprl
