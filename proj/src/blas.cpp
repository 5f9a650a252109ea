#include "dcuprl/blas.hpp"

#ifdef DCUPRL_WITH_OPENBLAS
#include <cblas.h>

#include <cstdlib>
#include <cstring>

extern "C" void gotoblas_dynamic_init(void) __attribute__((weak));
extern "C" void gotoblas_dynamic_quit(void) __attribute__((weak));
extern "C" char* openblas_get_corename(void) __attribute__((weak));
extern "C" void openblas_set_num_threads(int) __attribute__((weak));

namespace {

// OpenBLAS's runtime dispatch reads CPUID strings that hypervisors often
// mask, dropping it to the generic SSE2 kernel (several times slower than
// the AVX paths this machine supports). When that happened, pin the kernel
// family from the ISA feature bits and re-run the dispatch. A user-set
// OPENBLAS_CORETYPE wins untouched.
struct OpenBlasRedispatch {
    OpenBlasRedispatch() {
#if defined(__x86_64__)
        if (!openblas_get_corename || !gotoblas_dynamic_init || !gotoblas_dynamic_quit) return;
        if (std::getenv("OPENBLAS_CORETYPE")) return;
        if (std::strcmp(openblas_get_corename(), "Prescott") != 0) return;
        if (__builtin_cpu_supports("avx512f"))
            setenv("OPENBLAS_CORETYPE", "SKYLAKEX", 1);
        else if (__builtin_cpu_supports("avx2"))
            setenv("OPENBLAS_CORETYPE", "HASWELL", 1);
        else
            return;
        gotoblas_dynamic_quit();
        gotoblas_dynamic_init();
#endif
    }
};

} // namespace
#endif

namespace dcuprl {

#ifdef DCUPRL_WITH_OPENBLAS

void sgemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha,
           const float* a, int lda, const float* b, int ldb, float beta,
           float* c, int ldc) {
    static OpenBlasRedispatch redispatch_once;
    cblas_sgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans,
                trans_b ? CblasTrans : CblasNoTrans, m, n, k, alpha, a, lda, b,
                ldb, beta, c, ldc);
}

void set_blas_threads(int n) {
    if (openblas_set_num_threads) openblas_set_num_threads(n);
}

#else

void set_blas_threads(int) {}

namespace {
inline float elem(const float* p, int ld, bool trans, int r, int c) {
    return trans ? p[static_cast<long>(c) * ld + r] : p[static_cast<long>(r) * ld + c];
}
} // namespace

void sgemm(bool trans_a, bool trans_b, int m, int n, int k, float alpha,
           const float* a, int lda, const float* b, int ldb, float beta,
           float* c, int ldc) {
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            float acc = 0.0f;
            for (int p = 0; p < k; ++p)
                acc += elem(a, lda, trans_a, i, p) * elem(b, ldb, trans_b, p, j);
            float* cij = c + static_cast<long>(i) * ldc + j;
            *cij = alpha * acc + beta * *cij;
        }
    }
}

#endif

} // namespace dcuprl
