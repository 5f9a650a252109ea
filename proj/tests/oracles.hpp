#pragma once
// Test-only reference implementations, all in double precision and kept
// deliberately independent of the library's forward/backward code paths.
// Gradient checks compare the library's analytic float32 gradients against
// central finite differences of these references.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace oracle {

struct Mat {
    int rows = 0, cols = 0;
    std::vector<double> d;
    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), d(static_cast<std::size_t>(r) * c, 0.0) {}
    double& at(int r, int c) { return d[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return d[static_cast<std::size_t>(r) * cols + c]; }
};

// valid (unpadded) convolution, input [C,H,W], kernels [F,C,k,k]
inline std::vector<double> conv2d(const std::vector<double>& x, int C, int H, int W,
                                  const std::vector<double>& w, int F, int K, int stride,
                                  int& OH, int& OW) {
    OH = (H - K) / stride + 1;
    OW = (W - K) / stride + 1;
    std::vector<double> y(static_cast<std::size_t>(F) * OH * OW, 0.0);
    for (int f = 0; f < F; ++f)
        for (int oi = 0; oi < OH; ++oi)
            for (int oj = 0; oj < OW; ++oj) {
                double acc = 0.0;
                for (int c = 0; c < C; ++c)
                    for (int ki = 0; ki < K; ++ki)
                        for (int kj = 0; kj < K; ++kj)
                            acc += x[(static_cast<std::size_t>(c) * H + oi * stride + ki) * W +
                                     oj * stride + kj] *
                                   w[((static_cast<std::size_t>(f) * C + c) * K + ki) * K + kj];
                y[(static_cast<std::size_t>(f) * OH + oi) * OW + oj] = acc;
            }
    return y;
}

inline std::vector<double> dense(const std::vector<double>& x, const std::vector<double>& w,
                                 const std::vector<double>& b, int M, int N) {
    std::vector<double> y(static_cast<std::size_t>(M), 0.0);
    for (int m = 0; m < M; ++m) {
        double acc = b[static_cast<std::size_t>(m)];
        for (int n = 0; n < N; ++n) acc += w[static_cast<std::size_t>(m) * N + n] * x[static_cast<std::size_t>(n)];
        y[static_cast<std::size_t>(m)] = acc;
    }
    return y;
}

inline void relu_inplace(std::vector<double>& x) {
    for (auto& v : x) v = v > 0.0 ? v : 0.0;
}

// Central finite differences of f over the coordinates of x.
inline std::vector<double> finite_diff(std::vector<double> x,
                                       const std::function<double(const std::vector<double>&)>& f,
                                       double h = 1e-3) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double x0 = x[i];
        x[i] = x0 + h;
        const double fp = f(x);
        x[i] = x0 - h;
        const double fm = f(x);
        x[i] = x0;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

// max_i |a_i - b_i| / max(1e-8, ||b||_inf-style per-element scale)
inline double max_rel_err(const std::vector<float>& a, const std::vector<double>& b,
                          double floor = 1e-6) {
    double worst = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        const double denom = std::max(floor, std::abs(b[i]));
        worst = std::max(worst, std::abs(static_cast<double>(a[i]) - b[i]) / denom);
    }
    return worst;
}

// ||a - b||_2 / max(||b||_2, floor); the right metric for deep-net
// gradients where isolated relu-kink coordinates would dominate a max.
inline double norm_rel_err(const std::vector<float>& a, const std::vector<double>& b,
                           double floor = 1e-12) {
    double diff = 0.0, ref = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        const double d = static_cast<double>(a[i]) - b[i];
        diff += d * d;
        ref += b[i] * b[i];
    }
    return std::sqrt(diff) / std::max(std::sqrt(ref), floor);
}

// Softmax cross-entropy with diagonal labels: mean_i -log softmax(row_i)[i].
// Direct per-row normalization, no logsumexp composition.
inline double softmax_ce_diagonal(const Mat& logits) {
    double total = 0.0;
    for (int r = 0; r < logits.rows; ++r) {
        double mx = logits.at(r, 0);
        for (int c = 1; c < logits.cols; ++c) mx = std::max(mx, logits.at(r, c));
        double z = 0.0;
        for (int c = 0; c < logits.cols; ++c) z += std::exp(logits.at(r, c) - mx);
        const double p = std::exp(logits.at(r, r) - mx) / z;
        total += -std::log(p);
    }
    return total / logits.rows;
}

// Kolmogorov-Smirnov statistic of samples against U(lo,hi).
inline double ks_uniform(std::vector<double> samples, double lo, double hi) {
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double cdf = (samples[i] - lo) / (hi - lo);
        d = std::max(d, std::abs(cdf - (static_cast<double>(i) + 1.0) / n));
        d = std::max(d, std::abs(cdf - static_cast<double>(i) / n));
    }
    return d;
}

// Chi-square statistic against equal expected counts.
inline double chi_square_uniform(const std::vector<long>& counts, long total) {
    const double expected = static_cast<double>(total) / static_cast<double>(counts.size());
    double stat = 0.0;
    for (long c : counts) {
        const double diff = static_cast<double>(c) - expected;
        stat += diff * diff / expected;
    }
    return stat;
}

// Gauss-Legendre style fixed-grid quadrature of f over [lo,hi] (midpoint
// rule with a dense grid; plenty for smooth integrands in tests).
inline double integrate(const std::function<double(double)>& f, double lo, double hi,
                        int steps = 200000) {
    const double dx = (hi - lo) / steps;
    double acc = 0.0;
    for (int i = 0; i < steps; ++i) acc += f(lo + (i + 0.5) * dx);
    return acc * dx;
}

} // namespace oracle
