#pragma once

// Deterministic permutation / bootstrap index generation. Monte Carlo draws
// are counter-based (one Philox stream per draw index); exact mode unranks
// the i-th rearrangement directly, so draw i is always a pure function of
// (seed, i, dimensions) regardless of evaluation order.

#include <cstdint>
#include <limits>
#include <vector>

#include "permstat/rng.hpp"
#include "permstat/types.hpp"

namespace permstat::resample {

enum class Scheme {
    SignFlip,    // one-sample / paired designs: +-1 per observation
    Partition,   // two-sample designs: re-split nx+ny pooled rows
    RowPerm,     // correlation designs: permute rows of the second member
    LabelPerm,   // ANOVA designs: rearrange observations across fixed groups
    Bootstrap,   // with-replacement index draws
};

// Sentinel for rearrangement counts that exceed the unsigned 64-bit range.
inline constexpr std::uint64_t kHugeCount = std::numeric_limits<std::uint64_t>::max();

// Number of distinct rearrangements: 2^n (SignFlip), C(nx+ny, nx)
// (Partition), n! (RowPerm), or the multinomial for LabelPerm group sizes.
// Saturates at kHugeCount. Bootstrap spaces are never enumerated.
std::uint64_t count_exact_signflip(std::size_t n);
std::uint64_t count_exact_partition(std::size_t nx, std::size_t ny);
std::uint64_t count_exact_rowperm(std::size_t n);
std::uint64_t count_exact_labelperm(const std::vector<std::size_t>& group_sizes);

std::uint64_t binomial_or_huge(std::uint64_t n, std::uint64_t k);

// A fully specified resampling run: scheme, dimensions, number of draws and
// whether they exhaust the rearrangement space.
class ResamplePlan {
public:
    static ResamplePlan signflips(std::size_t n, std::uint64_t n_perm, std::uint64_t seed,
                                  std::uint64_t exact_threshold);
    static ResamplePlan partitions(std::size_t nx, std::size_t ny, std::uint64_t n_perm,
                                   std::uint64_t seed, std::uint64_t exact_threshold);
    static ResamplePlan rowperms(std::size_t n, std::uint64_t n_perm, std::uint64_t seed,
                                 std::uint64_t exact_threshold);
    static ResamplePlan labelperms(std::vector<std::size_t> group_sizes, std::uint64_t n_perm,
                                   std::uint64_t seed, std::uint64_t exact_threshold);
    static ResamplePlan bootstrap(std::size_t nx, std::size_t ny, bool paired,
                                  std::uint64_t n_boot, std::uint64_t seed);

    Scheme scheme() const noexcept { return scheme_; }
    bool exact() const noexcept { return exact_; }
    std::uint64_t n_draws() const noexcept { return n_draws_; }
    std::uint64_t seed() const noexcept { return seed_; }
    std::size_t n_total() const noexcept { return n_; }
    std::size_t nx() const noexcept { return nx_; }
    std::size_t ny() const noexcept { return ny_; }

    // SignFlip: fills out[0..n) with +-1.0.
    void draw_signs(std::uint64_t i, double* out) const;

    // Partition / RowPerm / LabelPerm: fills out[0..n) with a permutation of
    // 0..n-1. For Partition the first nx entries are pseudo-group X.
    // Draw 0 in exact mode is always the identity arrangement.
    void draw_permutation(std::uint64_t i, std::uint32_t* out) const;

    // Bootstrap: paired mode fills idx_x[0..n) (shared for both members);
    // independent mode fills idx_x[0..nx) then idx_y[0..ny).
    void draw_bootstrap(std::uint64_t i, std::uint32_t* idx_x, std::uint32_t* idx_y) const;

private:
    Scheme scheme_ = Scheme::SignFlip;
    bool exact_ = false;
    bool paired_ = false;
    std::uint64_t n_draws_ = 0;
    std::uint64_t seed_ = 0;
    std::size_t n_ = 0;   // total observations
    std::size_t nx_ = 0;
    std::size_t ny_ = 0;
    std::vector<std::size_t> group_sizes_;  // LabelPerm only
};

// Spec-level convenience wrappers (materialize every draw).
std::vector<std::vector<double>> gen_signflips(std::size_t n, std::uint64_t n_perm,
                                               std::uint64_t seed,
                                               std::uint64_t exact_threshold = 20000,
                                               bool* exact_mode = nullptr);
std::vector<std::vector<std::uint32_t>> gen_partitions(std::size_t nx, std::size_t ny,
                                                       std::uint64_t n_perm, std::uint64_t seed,
                                                       std::uint64_t exact_threshold = 20000,
                                                       bool* exact_mode = nullptr);
struct BootstrapDraw {
    std::vector<std::uint32_t> idx_x;
    std::vector<std::uint32_t> idx_y;  // empty in paired mode
};
std::vector<BootstrapDraw> gen_bootstrap(std::size_t nx, std::size_t ny, bool paired,
                                         std::uint64_t n_boot, std::uint64_t seed);

}  // namespace permstat::resample
