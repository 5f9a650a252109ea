#include "dcuprl/tape.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "dcuprl/blas.hpp"

namespace dcuprl {

Var Tape::push(Tensor value, bool needs, std::function<void(Tape&, int)> back) {
    Node n;
    n.value = std::move(value);
    n.needs = needs;
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

std::vector<float>& Tape::adj(int i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.adj.empty()) n.adj.assign(n.value.data.size(), 0.0f);
    return n.adj;
}

Var Tape::param(Tensor& p) {
    Node n;
    n.value = p; // snapshot of current values
    n.needs = true;
    n.sink = &p;
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(Tensor v) { return push(std::move(v), false, {}); }

template <class Fwd, class Bwd>
Var Tape::unary(Var a, Fwd f, Bwd df) {
    const Tensor& x = value(a);
    Tensor y = Tensor::zeros(x.shape);
    for (std::size_t i = 0; i < x.data.size(); ++i) y.data[i] = f(x.data[i]);
    bool needs = needs_grad(a);
    std::function<void(Tape&, int)> back;
    if (needs) {
        int pa = a.idx;
        back = [pa, df](Tape& t, int self) {
            const auto& g = t.nodes_[static_cast<std::size_t>(self)].adj;
            const Tensor& xv = t.nodes_[static_cast<std::size_t>(pa)].value;
            const Tensor& yv = t.nodes_[static_cast<std::size_t>(self)].value;
            auto& ga = t.adj(pa);
            for (std::size_t i = 0; i < g.size(); ++i)
                ga[i] += g[i] * df(xv.data[i], yv.data[i]);
        };
    }
    return push(std::move(y), needs, std::move(back));
}

namespace {

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape) + " vs " +
                         shape_str(b.shape));
}

} // namespace

Var Tape::add(Var a, Var b) {
    const Tensor& xa = value(a);
    const Tensor& xb = value(b);
    check_same_shape(xa, xb, "add");
    Tensor y = Tensor::zeros(xa.shape);
    for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] = xa.data[i] + xb.data[i];
    bool needs = needs_grad(a) || needs_grad(b);
    std::function<void(Tape&, int)> back;
    if (needs) {
        int pa = a.idx, pb = b.idx;
        bool na = needs_grad(a), nb = needs_grad(b);
        back = [pa, pb, na, nb](Tape& t, int self) {
            const auto& g = t.nodes_[static_cast<std::size_t>(self)].adj;
            if (na) {
                auto& ga = t.adj(pa);
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
            }
            if (nb) {
                auto& gb = t.adj(pb);
                for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
            }
        };
    }
    return push(std::move(y), needs, std::move(back));
}

Var Tape::sub(Var a, Var b) {
    const Tensor& xa = value(a);
    const Tensor& xb = value(b);
    check_same_shape(xa, xb, "sub");
    Tensor y = Tensor::zeros(xa.shape);
    for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] = xa.data[i] - xb.data[i];
    bool needs = needs_grad(a) || needs_grad(b);
    std::function<void(Tape&, int)> back;
    if (needs) {
        int pa = a.idx, pb = b.idx;
        bool na = needs_grad(a), nb = needs_grad(b);
        back = [pa, pb, na, nb](Tape& t, int self) {
            const auto& g = t.nodes_[static_cast<std::size_t>(self)].adj;
            if (na) {
                auto& ga = t.adj(pa);
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
            }
            if (nb) {
                auto& gb = t.adj(pb);
                for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
            }
        };
    }
    return push(std::move(y), needs, std::move(back));
}

Var Tape::mul(Var a, Var b) {
    const Tensor& xa = value(a);
    const Tensor& xb = value(b);
    check_same_shape(xa, xb, "mul");
    Tensor y = Tensor::zeros(xa.shape);
    for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] = xa.data[i] * xb.data[i];
    bool needs = needs_grad(a) || needs_grad(b);
    std::function<void(Tape&, int)> back;
    if (needs) {
        int pa = a.idx, pb = b.idx;
        bool na = needs_grad(a), nb = needs_grad(b);
        back = [pa, pb, na, nb](Tape& t, int self) {
            const auto& g = t.nodes_[static_cast<std::size_t>(self)].adj;
            const auto& va = t.nodes_[static_cast<std::size_t>(pa)].value.data;
            const auto& vb = t.nodes_[static_cast<std::size_t>(pb)].value.data;
            if (na) {
                auto& ga = t.adj(pa);
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * vb[i];
            }
            if (nb) {
                auto& gb = t.adj(pb);
                for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * va[i];
            }
        };
    }
    return push(std::move(y), needs, std::move(back));
}

Var Tape::neg(Var a) {
    return unary(a, [](float x) { return -x; }, [](float, float) { return -1.0f; });
}

Var Tape::scale(Var a, float c) {
    return unary(a, [c](float x) { return c * x; }, [c](float, float) { return c; });
}

Var Tape::add_scalar(Var a, float c) {
    return unary(a, [c](float x) { return x + c; }, [](float, float) { return 1.0f; });
}

Var Tape::relu(Var a) {
    return unary(a, [](float x) { return x > 0.0f ? x : 0.0f; },
                 [](float x, float) { return x > 0.0f ? 1.0f : 0.0f; });
}

Var Tape::tanh(Var a) {
    return unary(a, [](float x) { return std::tanh(x); },
                 [](float, float y) { return 1.0f - y * y; });
}

Var Tape::exp(Var a) {
    return unary(a, [](float x) { return std::exp(x); }, [](float, float y) { return y; });
}

Var Tape::log(Var a) {
    return unary(a, [](float x) { return std::log(x); }, [](float x, float) { return 1.0f / x; });
}

Var Tape::square(Var a) {
    return unary(a, [](float x) { return x * x; }, [](float x, float) { return 2.0f * x; });
}

Var Tape::clamp(Var a, float lo, float hi) {
    return unary(a, [lo, hi](float x) { return std::min(std::max(x, lo), hi); },
                 [lo, hi](float x, float) { return (x >= lo && x <= hi) ? 1.0f : 0.0f; });
}

Var Tape::min2(Var a, Var b) {
    const Tensor& xa = value(a);
    const Tensor& xb = value(b);
    check_same_shape(xa, xb, "min2");
    Tensor y = Tensor::zeros(xa.shape);
    for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] = std::min(xa.data[i], xb.data[i]);
    bool needs = needs_grad(a) || needs_grad(b);
    std::function<void(Tape&, int)> back;
    if (needs) {
        int pa = a.idx, pb = b.idx;
        bool na = needs_grad(a), nb = needs_grad(b);
        back = [pa, pb, na, nb](Tape& t, int self) {
            const auto& g = t.nodes_[static_cast<std::size_t>(self)].adj;
            const auto& va = t.nodes_[static_cast<std::size_t>(pa)].value.data;
            const auto& vb = t.nodes_[static_cast<std::size_t>(pb)].value.data;
            for (std::size_t i = 0; i < g.size(); ++i) {
                bool take_a = va[i] <= vb[i];
                if (take_a && na) t.adj(pa)[i] += g[i];
                if (!take_a && nb) t.adj(pb)[i] += g[i];
            }
        };
    }
    return push(std::move(y), needs, std::move(back));
}

Var Tape::reshape(Var a, std::vector<int> shape) {
    const Tensor& x = value(a);
    if (Tensor::count(shape) != x.numel())
        throw ShapeError("reshape: " + shape_str(x.shape) + " -> " + shape_str(shape) +
                         " changes element count");
    Tensor y = x;
    y.shape = std::move(shape);
    y.grad.reset();
    bool needs = needs_grad(a);
    std::function<void(Tape&, int)> back;
    if (needs) {
        int pa = a.idx;
        back = [pa](Tape& t, int self) {
            const auto& g = t.nodes_[static_cast<std::size_t>(self)].adj;
            auto& ga = t.adj(pa);
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
        };
    }
    return push(std::move(y), needs, std::move(back));
}

Var Tape::concat_cols(Var a, Var b) {
    const Tensor& xa = value(a);
    const Tensor& xb = value(b);
    if (xa.rank() != 2 || xb.rank() != 2 || xa.dim(0) != xb.dim(0))
        throw ShapeError("concat_cols: need matching row counts, got " + shape_str(xa.shape) +
                         " and " + shape_str(xb.shape));
    const int rows = xa.dim(0), ca = xa.dim(1), cb = xb.dim(1);
    Tensor y = Tensor::zeros({rows, ca + cb});
    for (int r = 0; r < rows; ++r) {
        std::memcpy(&y.data[static_cast<std::size_t>(r) * (ca + cb)],
                    &xa.data[static_cast<std::size_t>(r) * ca], sizeof(float) * ca);
        std::memcpy(&y.data[static_cast<std::size_t>(r) * (ca + cb) + ca],
                    &xb.data[static_cast<std::size_t>(r) * cb], sizeof(float) * cb);
    }
    bool needs = needs_grad(a) || needs_grad(b);
    std::function<void(Tape&, int)> back;
    if (needs) {
        int pa = a.idx, pb = b.idx;
        bool na = needs_grad(a), nb = needs_grad(b);
        back = [pa, pb, na, nb, rows, ca, cb](Tape& t, int self) {
            const auto& g = t.nodes_[static_cast<std::size_t>(self)].adj;
            for (int r = 0; r < rows; ++r) {
                if (na) {
                    auto& ga = t.adj(pa);
                    for (int c = 0; c < ca; ++c)
                        ga[static_cast<std::size_t>(r) * ca + c] +=
                            g[static_cast<std::size_t>(r) * (ca + cb) + c];
                }
                if (nb) {
                    auto& gb = t.adj(pb);
                    for (int c = 0; c < cb; ++c)
                        gb[static_cast<std::size_t>(r) * cb + c] +=
                            g[static_cast<std::size_t>(r) * (ca + cb) + ca + c];
                }
            }
        };
    }
    return push(std::move(y), needs, std::move(back));
}

Var Tape::dense(Var x, Var w, Var b) {
    const Tensor& xv = value(x);
    const Tensor& wv = value(w);
    const Tensor& bv = value(b);
    if (wv.rank() != 2) throw ShapeError("dense: weights must be rank 2, got " + shape_str(wv.shape));
    const int M = wv.dim(0), N = wv.dim(1);
    const bool batched = xv.rank() == 2;
    const int B = batched ? xv.dim(0) : 1;
    const int xn = batched ? xv.dim(1) : (xv.rank() == 1 ? xv.dim(0) : -1);
    if (xn != N)
        throw ShapeError("dense: input axis " + std::to_string(xn) + " does not match weight axis 1 (" +
                         std::to_string(N) + ")");
    if (bv.rank() != 1 || bv.dim(0) != M)
        throw ShapeError("dense: bias " + shape_str(bv.shape) + " does not match weight axis 0 (" +
                         std::to_string(M) + ")");

    Tensor y = Tensor::zeros(batched ? std::vector<int>{B, M} : std::vector<int>{M});
    sgemm(false, true, B, M, N, 1.0f, xv.data.data(), N, wv.data.data(), N, 0.0f, y.data.data(), M);
    for (int r = 0; r < B; ++r)
        for (int m = 0; m < M; ++m) y.data[static_cast<std::size_t>(r) * M + m] += bv.data[m];

    bool needs = needs_grad(x) || needs_grad(w) || needs_grad(b);
    std::function<void(Tape&, int)> back;
    if (needs) {
        int px = x.idx, pw = w.idx, pb = b.idx;
        bool nx = needs_grad(x), nw = needs_grad(w), nb = needs_grad(b);
        back = [px, pw, pb, nx, nw, nb, B, M, N](Tape& t, int self) {
            const auto& g = t.nodes_[static_cast<std::size_t>(self)].adj;
            const auto& xd = t.nodes_[static_cast<std::size_t>(px)].value.data;
            const auto& wd = t.nodes_[static_cast<std::size_t>(pw)].value.data;
            if (nx) {
                auto& gx = t.adj(px); // dX = dY * W
                sgemm(false, false, B, N, M, 1.0f, g.data(), M, wd.data(), N, 1.0f, gx.data(), N);
            }
            if (nw) {
                auto& gw = t.adj(pw); // dW = dY^T * X
                sgemm(true, false, M, N, B, 1.0f, g.data(), M, xd.data(), N, 1.0f, gw.data(), N);
            }
            if (nb) {
                auto& gb = t.adj(pb);
                for (int r = 0; r < B; ++r)
                    for (int m = 0; m < M; ++m) gb[m] += g[static_cast<std::size_t>(r) * M + m];
            }
        };
    }
    return push(std::move(y), needs, std::move(back));
}

Var Tape::matmul_nt(Var a, Var b) {
    const Tensor& av = value(a);
    const Tensor& bv = value(b);
    if (av.rank() != 2 || bv.rank() != 2 || av.dim(1) != bv.dim(1))
        throw ShapeError("matmul_nt: inner axes disagree, " + shape_str(av.shape) + " vs " +
                         shape_str(bv.shape));
    const int B = av.dim(0), Z = av.dim(1), C = bv.dim(0);
    Tensor y = Tensor::zeros({B, C});
    sgemm(false, true, B, C, Z, 1.0f, av.data.data(), Z, bv.data.data(), Z, 0.0f, y.data.data(), C);
    bool needs = needs_grad(a) || needs_grad(b);
    std::function<void(Tape&, int)> back;
    if (needs) {
        int pa = a.idx, pb = b.idx;
        bool na = needs_grad(a), nb = needs_grad(b);
        back = [pa, pb, na, nb, B, Z, C](Tape& t, int self) {
            const auto& g = t.nodes_[static_cast<std::size_t>(self)].adj;
            const auto& ad = t.nodes_[static_cast<std::size_t>(pa)].value.data;
            const auto& bd = t.nodes_[static_cast<std::size_t>(pb)].value.data;
            if (na) {
                auto& ga = t.adj(pa); // dA = dY * B
                sgemm(false, false, B, Z, C, 1.0f, g.data(), C, bd.data(), Z, 1.0f, ga.data(), Z);
            }
            if (nb) {
                auto& gb = t.adj(pb); // dB = dY^T * A
                sgemm(true, false, C, Z, B, 1.0f, g.data(), C, ad.data(), Z, 1.0f, gb.data(), Z);
            }
        };
    }
    return push(std::move(y), needs, std::move(back));
}

namespace {

// Transient conv workspaces. The tape is single-threaded per update, so
// one warm buffer per role avoids re-allocating (and re-zeroing) tens of
// megabytes every step.
enum ScratchRole { kScratchCols = 0, kScratchGemm, kScratchGradPerm, kScratchGradCols };

std::vector<float>& scratch(ScratchRole role, std::size_t n) {
    thread_local std::vector<float> bufs[4];
    auto& b = bufs[role];
    if (b.size() < n) b.resize(n);
    return b;
}

// Column matrices on gradient paths must outlive the forward pass (the
// backward lambda reuses them), so they cycle through a freelist instead
// of the flat scratch. Buffers only ever grow; im2col overwrites the
// region it uses, so stale tails are harmless.
std::vector<std::unique_ptr<std::vector<float>>>& cols_freelist() {
    thread_local std::vector<std::unique_ptr<std::vector<float>>> pool;
    return pool;
}

std::shared_ptr<std::vector<float>> acquire_cols(std::size_t n) {
    auto& pool = cols_freelist();
    int best = -1;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (pool[i]->size() >= n && (best < 0 || pool[i]->size() < pool[static_cast<std::size_t>(best)]->size()))
            best = static_cast<int>(i);
    }
    if (best < 0 && !pool.empty()) best = 0; // grow the first one
    std::unique_ptr<std::vector<float>> buf;
    if (best >= 0) {
        buf = std::move(pool[static_cast<std::size_t>(best)]);
        pool.erase(pool.begin() + best);
        if (buf->size() < n) buf->resize(n);
    } else {
        buf = std::make_unique<std::vector<float>>(n);
    }
    return {buf.release(), [](std::vector<float>* p) {
                cols_freelist().emplace_back(p);
            }};
}

struct ConvDims {
    int B, C, H, W, F, K, stride, OH, OW;
    long cols_rows() const { return static_cast<long>(C) * K * K; }
    long cols_cols() const { return static_cast<long>(B) * OH * OW; }
};

// cols[(c*K+ki)*K+kj][b*OH*OW + o] = x[b][c][oi*s+ki][oj*s+kj]
void im2col(const float* x, const ConvDims& d, float* cols) {
    const long ohw = static_cast<long>(d.OH) * d.OW;
    const long col_w = d.cols_cols();
    for (int b = 0; b < d.B; ++b) {
        const float* xb = x + static_cast<long>(b) * d.C * d.H * d.W;
        for (int c = 0; c < d.C; ++c) {
            for (int ki = 0; ki < d.K; ++ki) {
                for (int kj = 0; kj < d.K; ++kj) {
                    const long row = (static_cast<long>(c) * d.K + ki) * d.K + kj;
                    float* dst = cols + row * col_w + static_cast<long>(b) * ohw;
                    const float* src = xb + static_cast<long>(c) * d.H * d.W + static_cast<long>(ki) * d.W + kj;
                    for (int oi = 0; oi < d.OH; ++oi) {
                        const float* s = src + static_cast<long>(oi) * d.stride * d.W;
                        if (d.stride == 1) {
                            std::memcpy(dst, s, sizeof(float) * static_cast<std::size_t>(d.OW));
                            dst += d.OW;
                        } else {
                            for (int oj = 0; oj < d.OW; ++oj) *dst++ = s[static_cast<long>(oj) * d.stride];
                        }
                    }
                }
            }
        }
    }
}

// scatter-add transpose of im2col
void col2im_add(const float* cols, const ConvDims& d, float* gx) {
    const long ohw = static_cast<long>(d.OH) * d.OW;
    const long col_w = d.cols_cols();
    for (int b = 0; b < d.B; ++b) {
        float* gxb = gx + static_cast<long>(b) * d.C * d.H * d.W;
        for (int c = 0; c < d.C; ++c) {
            for (int ki = 0; ki < d.K; ++ki) {
                for (int kj = 0; kj < d.K; ++kj) {
                    const long row = (static_cast<long>(c) * d.K + ki) * d.K + kj;
                    const float* src = cols + row * col_w + static_cast<long>(b) * ohw;
                    float* dst = gxb + static_cast<long>(c) * d.H * d.W + static_cast<long>(ki) * d.W + kj;
                    for (int oi = 0; oi < d.OH; ++oi) {
                        float* t = dst + static_cast<long>(oi) * d.stride * d.W;
                        for (int oj = 0; oj < d.OW; ++oj) t[static_cast<long>(oj) * d.stride] += *src++;
                    }
                }
            }
        }
    }
}

// [F, B*OH*OW] (gemm layout) -> [B, F, OH*OW] (tensor layout)
void split_batch_major(const float* gemm_out, const ConvDims& d, float* out) {
    const long ohw = static_cast<long>(d.OH) * d.OW;
    const long col_w = d.cols_cols();
    for (int f = 0; f < d.F; ++f)
        for (int b = 0; b < d.B; ++b)
            std::memcpy(out + (static_cast<long>(b) * d.F + f) * ohw,
                        gemm_out + static_cast<long>(f) * col_w + static_cast<long>(b) * ohw,
                        sizeof(float) * static_cast<std::size_t>(ohw));
}

void merge_filter_major(const float* in, const ConvDims& d, float* gemm_in) {
    const long ohw = static_cast<long>(d.OH) * d.OW;
    const long col_w = d.cols_cols();
    for (int f = 0; f < d.F; ++f)
        for (int b = 0; b < d.B; ++b)
            std::memcpy(gemm_in + static_cast<long>(f) * col_w + static_cast<long>(b) * ohw,
                        in + (static_cast<long>(b) * d.F + f) * ohw,
                        sizeof(float) * static_cast<std::size_t>(ohw));
}

} // namespace

Var Tape::conv2d(Var x, Var w, int stride) {
    const Tensor& xv = value(x);
    const Tensor& wv = value(w);
    if (stride < 1) throw ContractError("conv2d: stride must be >= 1");
    if (wv.rank() != 4 || wv.dim(2) != wv.dim(3))
        throw ShapeError("conv2d: kernels must be [F,C,k,k], got " + shape_str(wv.shape));
    const bool batched = xv.rank() == 4;
    if (!batched && xv.rank() != 3)
        throw ShapeError("conv2d: input must be [C,H,W] or [B,C,H,W], got " + shape_str(xv.shape));

    ConvDims d;
    d.B = batched ? xv.dim(0) : 1;
    d.C = xv.dim(batched ? 1 : 0);
    d.H = xv.dim(batched ? 2 : 1);
    d.W = xv.dim(batched ? 3 : 2);
    d.F = wv.dim(0);
    d.K = wv.dim(2);
    d.stride = stride;
    if (wv.dim(1) != d.C)
        throw ShapeError("conv2d: input channels " + std::to_string(d.C) +
                         " vs kernel channel axis " + std::to_string(wv.dim(1)));
    if (d.H < d.K || d.W < d.K)
        throw ShapeError("conv2d: spatial input " + std::to_string(d.H) + "x" + std::to_string(d.W) +
                         " smaller than kernel " + std::to_string(d.K));
    d.OH = (d.H - d.K) / stride + 1;
    d.OW = (d.W - d.K) / stride + 1;

    const std::size_t cols_len = static_cast<std::size_t>(d.cols_rows() * d.cols_cols());
    const bool needs = needs_grad(x) || needs_grad(w);

    // backward reuses the column matrix, so it only persists on grad paths
    std::shared_ptr<std::vector<float>> cols;
    float* cols_ptr;
    if (needs) {
        cols = acquire_cols(cols_len);
        cols_ptr = cols->data();
    } else {
        cols_ptr = scratch(kScratchCols, cols_len).data();
    }
    im2col(xv.data.data(), d, cols_ptr);

    auto& gemm_out = scratch(kScratchGemm, static_cast<std::size_t>(d.F) * d.cols_cols());
    sgemm(false, false, d.F, static_cast<int>(d.cols_cols()), static_cast<int>(d.cols_rows()), 1.0f,
          wv.data.data(), static_cast<int>(d.cols_rows()), cols_ptr,
          static_cast<int>(d.cols_cols()), 0.0f, gemm_out.data(), static_cast<int>(d.cols_cols()));

    Tensor y = Tensor::zeros(batched ? std::vector<int>{d.B, d.F, d.OH, d.OW}
                                     : std::vector<int>{d.F, d.OH, d.OW});
    split_batch_major(gemm_out.data(), d, y.data.data());
    std::function<void(Tape&, int)> back;
    if (needs) {
        int px = x.idx, pw = w.idx;
        bool nx = needs_grad(x), nw = needs_grad(w);
        back = [px, pw, nx, nw, d, cols](Tape& t, int self) {
            const auto& g = t.nodes_[static_cast<std::size_t>(self)].adj;
            auto& gperm = scratch(kScratchGradPerm, static_cast<std::size_t>(d.F) * d.cols_cols());
            merge_filter_major(g.data(), d, gperm.data());
            if (nw) {
                auto& gw = t.adj(pw); // dW = dY * cols^T
                sgemm(false, true, d.F, static_cast<int>(d.cols_rows()),
                      static_cast<int>(d.cols_cols()), 1.0f, gperm.data(),
                      static_cast<int>(d.cols_cols()), cols->data(),
                      static_cast<int>(d.cols_cols()), 1.0f, gw.data(),
                      static_cast<int>(d.cols_rows()));
            }
            if (nx) {
                const auto& wd = t.nodes_[static_cast<std::size_t>(pw)].value.data;
                auto& gcols = scratch(kScratchGradCols, cols->size());
                sgemm(true, false, static_cast<int>(d.cols_rows()),
                      static_cast<int>(d.cols_cols()), d.F, 1.0f, wd.data(),
                      static_cast<int>(d.cols_rows()), gperm.data(),
                      static_cast<int>(d.cols_cols()), 0.0f, gcols.data(),
                      static_cast<int>(d.cols_cols()));
                col2im_add(gcols.data(), d, t.adj(px).data());
            }
        };
    }
    return push(std::move(y), needs, std::move(back));
}

Var Tape::sum(Var a) {
    const Tensor& x = value(a);
    double acc = 0.0;
    for (float v : x.data) acc += v;
    Tensor y = Tensor::scalar(static_cast<float>(acc));
    bool needs = needs_grad(a);
    std::function<void(Tape&, int)> back;
    if (needs) {
        int pa = a.idx;
        back = [pa](Tape& t, int self) {
            const float g = t.nodes_[static_cast<std::size_t>(self)].adj[0];
            auto& ga = t.adj(pa);
            for (auto& v : ga) v += g;
        };
    }
    return push(std::move(y), needs, std::move(back));
}

Var Tape::mean(Var a) {
    const Tensor& x = value(a);
    const float inv = 1.0f / static_cast<float>(x.numel());
    double acc = 0.0;
    for (float v : x.data) acc += v;
    Tensor y = Tensor::scalar(static_cast<float>(acc) * inv);
    bool needs = needs_grad(a);
    std::function<void(Tape&, int)> back;
    if (needs) {
        int pa = a.idx;
        back = [pa, inv](Tape& t, int self) {
            const float g = t.nodes_[static_cast<std::size_t>(self)].adj[0] * inv;
            auto& ga = t.adj(pa);
            for (auto& v : ga) v += g;
        };
    }
    return push(std::move(y), needs, std::move(back));
}

Var Tape::row_sum(Var a) {
    const Tensor& x = value(a);
    if (x.rank() != 2) throw ShapeError("row_sum: need rank 2, got " + shape_str(x.shape));
    const int B = x.dim(0), N = x.dim(1);
    Tensor y = Tensor::zeros({B});
    for (int r = 0; r < B; ++r) {
        double acc = 0.0;
        for (int c = 0; c < N; ++c) acc += x.data[static_cast<std::size_t>(r) * N + c];
        y.data[static_cast<std::size_t>(r)] = static_cast<float>(acc);
    }
    bool needs = needs_grad(a);
    std::function<void(Tape&, int)> back;
    if (needs) {
        int pa = a.idx;
        back = [pa, B, N](Tape& t, int self) {
            const auto& g = t.nodes_[static_cast<std::size_t>(self)].adj;
            auto& ga = t.adj(pa);
            for (int r = 0; r < B; ++r)
                for (int c = 0; c < N; ++c) ga[static_cast<std::size_t>(r) * N + c] += g[static_cast<std::size_t>(r)];
        };
    }
    return push(std::move(y), needs, std::move(back));
}

Var Tape::row_dot(Var a, Var b) {
    const Tensor& xa = value(a);
    const Tensor& xb = value(b);
    check_same_shape(xa, xb, "row_dot");
    if (xa.rank() != 2) throw ShapeError("row_dot: need rank 2, got " + shape_str(xa.shape));
    const int B = xa.dim(0), N = xa.dim(1);
    Tensor y = Tensor::zeros({B});
    for (int r = 0; r < B; ++r) {
        double acc = 0.0;
        for (int c = 0; c < N; ++c)
            acc += static_cast<double>(xa.data[static_cast<std::size_t>(r) * N + c]) *
                   xb.data[static_cast<std::size_t>(r) * N + c];
        y.data[static_cast<std::size_t>(r)] = static_cast<float>(acc);
    }
    bool needs = needs_grad(a) || needs_grad(b);
    std::function<void(Tape&, int)> back;
    if (needs) {
        int pa = a.idx, pb = b.idx;
        bool na = needs_grad(a), nb = needs_grad(b);
        back = [pa, pb, na, nb, B, N](Tape& t, int self) {
            const auto& g = t.nodes_[static_cast<std::size_t>(self)].adj;
            const auto& va = t.nodes_[static_cast<std::size_t>(pa)].value.data;
            const auto& vb = t.nodes_[static_cast<std::size_t>(pb)].value.data;
            for (int r = 0; r < B; ++r) {
                const float gr = g[static_cast<std::size_t>(r)];
                for (int c = 0; c < N; ++c) {
                    const std::size_t i = static_cast<std::size_t>(r) * N + c;
                    if (na) t.adj(pa)[i] += gr * vb[i];
                    if (nb) t.adj(pb)[i] += gr * va[i];
                }
            }
        };
    }
    return push(std::move(y), needs, std::move(back));
}

Var Tape::logsumexp_rows(Var a) {
    const Tensor& x = value(a);
    const bool batched = x.rank() == 2;
    if (!batched && x.rank() != 1)
        throw ShapeError("logsumexp_rows: need rank 1 or 2, got " + shape_str(x.shape));
    const int B = batched ? x.dim(0) : 1;
    const int N = batched ? x.dim(1) : x.dim(0);
    Tensor y = Tensor::zeros({B});
    // max-subtracted form; exact shift invariance by construction
    for (int r = 0; r < B; ++r) {
        const float* row = &x.data[static_cast<std::size_t>(r) * N];
        float mx = row[0];
        for (int c = 1; c < N; ++c) mx = std::max(mx, row[c]);
        double acc = 0.0;
        for (int c = 0; c < N; ++c) acc += std::exp(static_cast<double>(row[c]) - mx);
        y.data[static_cast<std::size_t>(r)] = mx + static_cast<float>(std::log(acc));
    }
    bool needs = needs_grad(a);
    std::function<void(Tape&, int)> back;
    if (needs) {
        int pa = a.idx;
        back = [pa, B, N](Tape& t, int self) {
            const auto& g = t.nodes_[static_cast<std::size_t>(self)].adj;
            const auto& yv = t.nodes_[static_cast<std::size_t>(self)].value.data;
            const auto& xv = t.nodes_[static_cast<std::size_t>(pa)].value.data;
            auto& ga = t.adj(pa);
            for (int r = 0; r < B; ++r) {
                const float gr = g[static_cast<std::size_t>(r)];
                if (gr == 0.0f) continue;
                for (int c = 0; c < N; ++c) {
                    const std::size_t i = static_cast<std::size_t>(r) * N + c;
                    ga[i] += gr * std::exp(xv[i] - yv[static_cast<std::size_t>(r)]); // softmax
                }
            }
        };
    }
    return push(std::move(y), needs, std::move(back));
}

Var Tape::weighted_mean(Var a, const std::vector<float>& w) {
    const Tensor& x = value(a);
    if (static_cast<std::size_t>(x.numel()) != w.size())
        throw ShapeError("weighted_mean: " + std::to_string(w.size()) + " weights for " +
                         std::to_string(x.numel()) + " values");
    const float inv = 1.0f / static_cast<float>(x.numel());
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) acc += static_cast<double>(w[i]) * x.data[i];
    Tensor y = Tensor::scalar(static_cast<float>(acc) * inv);
    bool needs = needs_grad(a);
    std::function<void(Tape&, int)> back;
    if (needs) {
        int pa = a.idx;
        auto wcopy = std::make_shared<std::vector<float>>(w);
        back = [pa, inv, wcopy](Tape& t, int self) {
            const float g = t.nodes_[static_cast<std::size_t>(self)].adj[0] * inv;
            auto& ga = t.adj(pa);
            for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g * (*wcopy)[i];
        };
    }
    return push(std::move(y), needs, std::move(back));
}

void Tape::backward(Var loss) {
    Node& ln = node(loss);
    if (ln.value.numel() != 1)
        throw ContractError("backward: loss must be scalar, got " + shape_str(ln.value.shape));
    adj(loss.idx)[0] = 1.0f;
    for (int i = loss.idx; i >= 0; --i) {
        Node& n = nodes_[static_cast<std::size_t>(i)];
        if (!n.needs || n.adj.empty()) continue;
        if (n.back) n.back(*this, i);
        if (n.sink) {
            auto& g = n.sink->ensure_grad();
            for (std::size_t j = 0; j < g.size(); ++j) g[j] += n.adj[j];
        }
    }
}

} // namespace dcuprl
