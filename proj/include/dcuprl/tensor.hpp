#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dcuprl/errors.hpp"

namespace dcuprl {

/**
 * Dense row-major float32 tensor with an optional same-shape gradient
 * accumulator. Shapes are small integer vectors; rank 0 is not used,
 * scalars are shape {1}.
 */
struct Tensor {
    std::vector<int> shape;
    std::vector<float> data;
    std::optional<std::vector<float>> grad;

    Tensor() = default;

    static std::int64_t count(const std::vector<int>& shape) {
        std::int64_t n = 1;
        for (int d : shape) {
            if (d <= 0) throw ShapeError("nonpositive dimension " + std::to_string(d));
            n *= d;
        }
        return n;
    }

    static Tensor zeros(std::vector<int> shape) {
        Tensor t;
        t.data.assign(static_cast<std::size_t>(count(shape)), 0.0f);
        t.shape = std::move(shape);
        return t;
    }

    static Tensor full(std::vector<int> shape, float v) {
        Tensor t = zeros(std::move(shape));
        for (auto& x : t.data) x = v;
        return t;
    }

    static Tensor from(std::vector<int> shape, std::vector<float> values) {
        if (count(shape) != static_cast<std::int64_t>(values.size()))
            throw ShapeError("data length " + std::to_string(values.size()) +
                             " does not match shape product " + std::to_string(count(shape)));
        Tensor t;
        t.shape = std::move(shape);
        t.data = std::move(values);
        return t;
    }

    static Tensor scalar(float v) { return from({1}, {v}); }

    std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
    int rank() const { return static_cast<int>(shape.size()); }

    int dim(int i) const {
        if (i < 0 || i >= rank()) throw ShapeError("axis " + std::to_string(i) + " out of rank " + std::to_string(rank()));
        return shape[static_cast<std::size_t>(i)];
    }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    /// Gradient accumulator, allocated (zeroed) on first use.
    std::vector<float>& ensure_grad() {
        if (!grad) grad.emplace(data.size(), 0.0f);
        return *grad;
    }

    void zero_grad() {
        if (grad) std::fill(grad->begin(), grad->end(), 0.0f);
    }

    float& at(std::size_t i) { return data[i]; }
    float at(std::size_t i) const { return data[i]; }
};

inline std::string shape_str(const std::vector<int>& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

} // namespace dcuprl
