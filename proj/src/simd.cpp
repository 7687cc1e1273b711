#include "permstat/simd.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <string>

#include "permstat/error.hpp"

#if defined(__aarch64__)
#include <arm_neon.h>
#endif

namespace permstat::simd {

// ---------------------------------------------------------------------------
// Scalar reference kernels. Column-outer, row-inner: the per-column
// accumulation order is the contract every vector variant must reproduce.
// ---------------------------------------------------------------------------

namespace {

void select_sum_ssq_scalar(const double* data, std::size_t stride, std::size_t n_cols,
                           const std::uint32_t* rows, std::size_t n_rows, double* out_sum,
                           double* out_ssq) {
    for (std::size_t v = 0; v < n_cols; ++v) {
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

void weighted_rowsum_scalar(const double* data, std::size_t stride, std::size_t n_cols,
                            const double* weights, std::size_t n_rows, const std::uint32_t* perm,
                            double* out) {
    for (std::size_t v = 0; v < n_cols; ++v) {
        double s = 0.0;
        for (std::size_t i = 0; i < n_rows; ++i) {
            const std::size_t row = perm ? perm[i] : i;
            s += weights[i] * data[row * stride + v];
        }
        out[v] = s;
    }
}

void coldot_perm_scalar(const double* x, const double* y, std::size_t stride, std::size_t n_cols,
                        std::size_t n_rows, const std::uint32_t* perm, double* out) {
    for (std::size_t v = 0; v < n_cols; ++v) {
        double s = 0.0;
        for (std::size_t i = 0; i < n_rows; ++i) {
            s += x[i * stride + v] * y[static_cast<std::size_t>(perm[i]) * stride + v];
        }
        out[v] = s;
    }
}

constexpr KernelTable kScalarTable = {select_sum_ssq_scalar, weighted_rowsum_scalar,
                                      coldot_perm_scalar};

}  // namespace

// ---------------------------------------------------------------------------
// NEON variants (two lanes across columns; row loop innermost, like scalar).
// ---------------------------------------------------------------------------

#if defined(__aarch64__)
namespace {

void select_sum_ssq_neon(const double* data, std::size_t stride, std::size_t n_cols,
                         const std::uint32_t* rows, std::size_t n_rows, double* out_sum,
                         double* out_ssq) {
    std::size_t v = 0;
    for (; v + 2 <= n_cols; v += 2) {
        float64x2_t s = vdupq_n_f64(0.0);
        float64x2_t q = vdupq_n_f64(0.0);
        for (std::size_t i = 0; i < n_rows; ++i) {
            const float64x2_t x = vld1q_f64(data + static_cast<std::size_t>(rows[i]) * stride + v);
            s = vaddq_f64(s, x);
            q = vaddq_f64(q, vmulq_f64(x, x));
        }
        vst1q_f64(out_sum + v, s);
        vst1q_f64(out_ssq + v, q);
    }
    if (v < n_cols) {
        select_sum_ssq_scalar(data + v, stride, n_cols - v, rows, n_rows, out_sum + v, out_ssq + v);
    }
}

void weighted_rowsum_neon(const double* data, std::size_t stride, std::size_t n_cols,
                          const double* weights, std::size_t n_rows, const std::uint32_t* perm,
                          double* out) {
    std::size_t v = 0;
    for (; v + 2 <= n_cols; v += 2) {
        float64x2_t s = vdupq_n_f64(0.0);
        for (std::size_t i = 0; i < n_rows; ++i) {
            const std::size_t row = perm ? perm[i] : i;
            const float64x2_t x = vld1q_f64(data + row * stride + v);
            s = vaddq_f64(s, vmulq_f64(vdupq_n_f64(weights[i]), x));
        }
        vst1q_f64(out + v, s);
    }
    if (v < n_cols) {
        weighted_rowsum_scalar(data + v, stride, n_cols - v, weights, n_rows, perm, out + v);
    }
}

void coldot_perm_neon(const double* x, const double* y, std::size_t stride, std::size_t n_cols,
                      std::size_t n_rows, const std::uint32_t* perm, double* out) {
    std::size_t v = 0;
    for (; v + 2 <= n_cols; v += 2) {
        float64x2_t s = vdupq_n_f64(0.0);
        for (std::size_t i = 0; i < n_rows; ++i) {
            const float64x2_t a = vld1q_f64(x + i * stride + v);
            const float64x2_t b = vld1q_f64(y + static_cast<std::size_t>(perm[i]) * stride + v);
            s = vaddq_f64(s, vmulq_f64(a, b));
        }
        vst1q_f64(out + v, s);
    }
    if (v < n_cols) {
        coldot_perm_scalar(x + v, y + v, stride, n_cols - v, n_rows, perm, out + v);
    }
}

constexpr KernelTable kNeonTable = {select_sum_ssq_neon, weighted_rowsum_neon, coldot_perm_neon};

}  // namespace
#endif  // __aarch64__

#if defined(__x86_64__) || defined(__i386__)
namespace detail {
extern const KernelTable avx2_table;  // simd_avx2.cpp
}
#endif

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

const char* backend_name(Backend backend) noexcept {
    switch (backend) {
        case Backend::Scalar: return "scalar";
        case Backend::Avx2: return "avx2";
        case Backend::Neon: return "neon";
    }
    return "scalar";
}

bool backend_available(Backend backend) noexcept {
    switch (backend) {
        case Backend::Scalar:
            return true;
        case Backend::Avx2:
#if defined(__x86_64__) || defined(__i386__)
            return __builtin_cpu_supports("avx2") != 0;
#else
            return false;
#endif
        case Backend::Neon:
#if defined(__aarch64__)
            return true;
#else
            return false;
#endif
    }
    return false;
}

namespace {

Backend detect_backend() {
    if (const char* env = std::getenv("PERMSTAT_SIMD")) {
        const std::string want(env);
        if (want == "scalar") return Backend::Scalar;
        if (want == "avx2" && backend_available(Backend::Avx2)) return Backend::Avx2;
        if (want == "neon" && backend_available(Backend::Neon)) return Backend::Neon;
        // Unknown or unavailable request falls through to autodetection.
    }
    if (backend_available(Backend::Avx2)) return Backend::Avx2;
    if (backend_available(Backend::Neon)) return Backend::Neon;
    return Backend::Scalar;
}

std::atomic<Backend> g_backend{detect_backend()};

}  // namespace

Backend active_backend() noexcept { return g_backend.load(std::memory_order_relaxed); }

void select_backend(Backend backend) {
    if (!backend_available(backend)) {
        throw Error(ErrorCode::BadArgument,
                    std::string("simd backend not available: ") + backend_name(backend));
    }
    g_backend.store(backend, std::memory_order_relaxed);
}

const KernelTable& kernels_for(Backend backend) {
    switch (backend) {
        case Backend::Scalar:
            return kScalarTable;
        case Backend::Avx2:
#if defined(__x86_64__) || defined(__i386__)
            return detail::avx2_table;
#else
            break;
#endif
        case Backend::Neon:
#if defined(__aarch64__)
            return kNeonTable;
#else
            break;
#endif
    }
    throw Error(ErrorCode::BadArgument,
                std::string("simd backend not compiled in: ") + backend_name(backend));
}

const KernelTable& kernels() noexcept {
    const Backend backend = active_backend();
    switch (backend) {
        case Backend::Scalar:
            return kScalarTable;
#if defined(__x86_64__) || defined(__i386__)
        case Backend::Avx2:
            return detail::avx2_table;
#endif
#if defined(__aarch64__)
        case Backend::Neon:
            return kNeonTable;
#endif
        default:
            return kScalarTable;
    }
}

}  // namespace permstat::simd
