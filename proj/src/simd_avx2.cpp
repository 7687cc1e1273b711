// AVX2 kernel variants: four column lanes per vector, rows innermost so each
// column accumulates in exactly the scalar order. Plain mul+add (no FMA) keeps
// the rounding sequence identical to the reference kernels.

#include "permstat/simd.hpp"

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

namespace permstat::simd {

namespace {

__attribute__((target("avx2"))) void select_sum_ssq_avx2(const double* data, std::size_t stride,
                                                         std::size_t n_cols,
                                                         const std::uint32_t* rows,
                                                         std::size_t n_rows, double* out_sum,
                                                         double* out_ssq) {
    std::size_t v = 0;
    for (; v + 4 <= n_cols; v += 4) {
        __m256d s = _mm256_setzero_pd();
        __m256d q = _mm256_setzero_pd();
        for (std::size_t i = 0; i < n_rows; ++i) {
            const __m256d x =
                _mm256_loadu_pd(data + static_cast<std::size_t>(rows[i]) * stride + v);
            s = _mm256_add_pd(s, x);
            q = _mm256_add_pd(q, _mm256_mul_pd(x, x));
        }
        _mm256_storeu_pd(out_sum + v, s);
        _mm256_storeu_pd(out_ssq + v, q);
    }
    for (; v < n_cols; ++v) {
        double s = 0.0, q = 0.0;
        for (std::size_t i = 0; i < n_rows; ++i) {
            const double x = data[static_cast<std::size_t>(rows[i]) * stride + v];
            s += x;
            q += x * x;
        }
        out_sum[v] = s;
        out_ssq[v] = q;
    }
}

__attribute__((target("avx2"))) void weighted_rowsum_avx2(const double* data, std::size_t stride,
                                                          std::size_t n_cols,
                                                          const double* weights,
                                                          std::size_t n_rows,
                                                          const std::uint32_t* perm, double* out) {
    std::size_t v = 0;
    for (; v + 4 <= n_cols; v += 4) {
        __m256d s = _mm256_setzero_pd();
        for (std::size_t i = 0; i < n_rows; ++i) {
            const std::size_t row = perm ? perm[i] : i;
            const __m256d x = _mm256_loadu_pd(data + row * stride + v);
            s = _mm256_add_pd(s, _mm256_mul_pd(_mm256_set1_pd(weights[i]), x));
        }
        _mm256_storeu_pd(out + v, s);
    }
    for (; v < n_cols; ++v) {
        double s = 0.0;
        for (std::size_t i = 0; i < n_rows; ++i) {
            const std::size_t row = perm ? perm[i] : i;
            s += weights[i] * data[row * stride + v];
        }
        out[v] = s;
    }
}

__attribute__((target("avx2"))) void coldot_perm_avx2(const double* x, const double* y,
                                                      std::size_t stride, std::size_t n_cols,
                                                      std::size_t n_rows,
                                                      const std::uint32_t* perm, double* out) {
    std::size_t v = 0;
    for (; v + 4 <= n_cols; v += 4) {
        __m256d s = _mm256_setzero_pd();
        for (std::size_t i = 0; i < n_rows; ++i) {
            const __m256d a = _mm256_loadu_pd(x + i * stride + v);
            const __m256d b =
                _mm256_loadu_pd(y + static_cast<std::size_t>(perm[i]) * stride + v);
            s = _mm256_add_pd(s, _mm256_mul_pd(a, b));
        }
        _mm256_storeu_pd(out + v, s);
    }
    for (; v < n_cols; ++v) {
        double s = 0.0;
        for (std::size_t i = 0; i < n_rows; ++i) {
            s += x[i * stride + v] * y[static_cast<std::size_t>(perm[i]) * stride + v];
        }
        out[v] = s;
    }
}

}  // namespace

namespace detail {
extern const KernelTable avx2_table;
const KernelTable avx2_table = {select_sum_ssq_avx2, weighted_rowsum_avx2, coldot_perm_avx2};
}

}  // namespace permstat::simd

#endif  // x86
