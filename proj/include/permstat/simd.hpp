#pragma once

// Vectorized inner-loop kernels with runtime backend selection.
//
// All kernels accumulate each output column independently, visiting rows in
// the same order as the scalar reference, and the vector variants avoid FMA
// contraction. Every backend therefore produces bit-identical results — the
// equivalence suite asserts this — so backend choice never affects output.

#include <cstddef>
#include <cstdint>

namespace permstat::simd {

enum class Backend { Scalar, Avx2, Neon };

// out_sum[v] = sum over selected rows of data[row * stride + v],
// out_ssq[v] = the matching sum of squares. n_cols <= stride.
using SelectSumFn = void (*)(const double* data, std::size_t stride, std::size_t n_cols,
                             const std::uint32_t* rows, std::size_t n_rows, double* out_sum,
                             double* out_ssq);

// out[v] = sum_i weights[i] * data[(perm ? perm[i] : i) * stride + v].
using WeightedRowsumFn = void (*)(const double* data, std::size_t stride, std::size_t n_cols,
                                  const double* weights, std::size_t n_rows,
                                  const std::uint32_t* perm, double* out);

// out[v] = sum_i x[i * stride + v] * y[perm[i] * stride + v].
using ColdotPermFn = void (*)(const double* x, const double* y, std::size_t stride,
                              std::size_t n_cols, std::size_t n_rows, const std::uint32_t* perm,
                              double* out);

struct KernelTable {
    SelectSumFn select_sum_ssq;
    WeightedRowsumFn weighted_rowsum;
    ColdotPermFn coldot_perm;
};

const char* backend_name(Backend backend) noexcept;
bool backend_available(Backend backend) noexcept;

// Active backend: best available at startup, overridable via the
// PERMSTAT_SIMD environment variable (scalar | avx2 | neon) or select_backend.
Backend active_backend() noexcept;
void select_backend(Backend backend);

const KernelTable& kernels() noexcept;
const KernelTable& kernels_for(Backend backend);

}  // namespace permstat::simd
