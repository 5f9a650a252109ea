#include "dcuprl/contrastive.hpp"

#include <cmath>

namespace dcuprl {

Var info_nce(Tape& t, Var q, Var k) {
    if (t.needs_grad(k))
        throw ContractError("info_nce: keys must be constants (no gradient through the key encoder)");
    Var logits = t.matmul_nt(q, k);       // [B,B]
    Var lse = t.logsumexp_rows(logits);   // [B]
    Var pos = t.row_dot(q, k);            // [B]
    return t.mean(t.sub(lse, pos));
}

Var info_nce_bilinear(Tape& t, Var q, Var w, Var k) {
    if (t.needs_grad(k))
        throw ContractError("info_nce: keys must be constants (no gradient through the key encoder)");
    const int Z = t.value(q).dim(1);
    Var zero_bias = t.constant(Tensor::zeros({Z}));
    Var qw = t.dense(q, w, zero_bias); // [B,Z], W stored transposed
    Var logits = t.matmul_nt(qw, k);
    Var lse = t.logsumexp_rows(logits);
    Var pos = t.row_dot(qw, k);
    return t.mean(t.sub(lse, pos));
}

double info_nce_value(const Tensor& q, const Tensor& k) {
    if (q.rank() != 2 || !q.same_shape(k))
        throw ShapeError("info_nce_value: latents must be matching [B,Z], got " +
                         shape_str(q.shape) + " and " + shape_str(k.shape));
    const int B = q.dim(0), Z = q.dim(1);
    double total = 0.0;
    std::vector<double> row(static_cast<std::size_t>(B));
    for (int i = 0; i < B; ++i) {
        for (int j = 0; j < B; ++j) {
            double dot = 0.0;
            for (int z = 0; z < Z; ++z)
                dot += static_cast<double>(q.data[static_cast<std::size_t>(i) * Z + z]) *
                       k.data[static_cast<std::size_t>(j) * Z + z];
            row[static_cast<std::size_t>(j)] = dot;
        }
        double mx = row[0];
        for (double v : row) mx = std::max(mx, v);
        double acc = 0.0;
        for (double v : row) acc += std::exp(v - mx);
        total += (mx + std::log(acc)) - row[static_cast<std::size_t>(i)];
    }
    return total / B;
}

} // namespace dcuprl
