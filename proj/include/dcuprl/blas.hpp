#pragma once

namespace dcuprl {

/**
 * Row-major sgemm: C = alpha * op(A) * op(B) + beta * C.
 * op(A) is [m,k], op(B) is [k,n], C is [m,n]; leading dimensions are the
 * row strides of the stored (untransposed) matrices. Backed by OpenBLAS
 * when available, otherwise a blocked scalar fallback.
 */
void sgemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha,
           const float* a, int lda, const float* b, int ldb, float beta,
           float* c, int ldc);

/// Cap the backend's internal threading (no-op for the scalar fallback).
/// Callers running several trainers in parallel pin this to 1.
void set_blas_threads(int n);

} // namespace dcuprl
