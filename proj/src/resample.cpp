#include "permstat/resample.hpp"

#include <algorithm>
#include <numeric>

namespace permstat::resample {

namespace {

// Saturating helpers for rearrangement counting.

std::uint64_t mul_or_huge(std::uint64_t a, std::uint64_t b) {
    if (a == kHugeCount || b == kHugeCount) return kHugeCount;
    const __uint128_t p = static_cast<__uint128_t>(a) * b;
    if (p >= static_cast<__uint128_t>(kHugeCount)) return kHugeCount;
    return static_cast<std::uint64_t>(p);
}

}  // namespace

std::uint64_t binomial_or_huge(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    // C(n, k) = prod_{j=1..k} (n-k+j)/j; each partial product is the integer
    // C(n-k+j, j), so the stepwise division is exact.
    __uint128_t result = 1;
    for (std::uint64_t j = 1; j <= k; ++j) {
        result = result * (n - k + j) / j;
        if (result >= static_cast<__uint128_t>(kHugeCount)) return kHugeCount;
    }
    return static_cast<std::uint64_t>(result);
}

std::uint64_t count_exact_signflip(std::size_t n) {
    if (n >= 63) return kHugeCount;
    return std::uint64_t{1} << n;
}

std::uint64_t count_exact_partition(std::size_t nx, std::size_t ny) {
    return binomial_or_huge(nx + ny, nx);
}

std::uint64_t count_exact_rowperm(std::size_t n) {
    std::uint64_t result = 1;
    for (std::size_t j = 2; j <= n; ++j) {
        result = mul_or_huge(result, j);
        if (result == kHugeCount) return kHugeCount;
    }
    return result;
}

std::uint64_t count_exact_labelperm(const std::vector<std::size_t>& group_sizes) {
    // multinomial(N; n1..nk) = prod C(partial_sum_i, n_i)
    std::uint64_t result = 1;
    std::uint64_t total = 0;
    for (std::size_t size : group_sizes) {
        total += size;
        result = mul_or_huge(result, binomial_or_huge(total, size));
        if (result == kHugeCount) return kHugeCount;
    }
    return result;
}

ResamplePlan ResamplePlan::signflips(std::size_t n, std::uint64_t n_perm, std::uint64_t seed,
                                     std::uint64_t exact_threshold) {
    if (n < 2) throw Error(ErrorCode::DimensionTooSmall, "sign-flip design requires n >= 2");
    ResamplePlan plan;
    plan.scheme_ = Scheme::SignFlip;
    plan.seed_ = seed;
    plan.n_ = n;
    const std::uint64_t total = count_exact_signflip(n);
    if (total != kHugeCount && total <= exact_threshold) {
        plan.exact_ = true;
        plan.n_draws_ = total;
    } else {
        plan.n_draws_ = n_perm;
    }
    return plan;
}

ResamplePlan ResamplePlan::partitions(std::size_t nx, std::size_t ny, std::uint64_t n_perm,
                                      std::uint64_t seed, std::uint64_t exact_threshold) {
    if (nx < 2 || ny < 2) {
        throw Error(ErrorCode::DimensionTooSmall, "partition design requires nx, ny >= 2");
    }
    ResamplePlan plan;
    plan.scheme_ = Scheme::Partition;
    plan.seed_ = seed;
    plan.nx_ = nx;
    plan.ny_ = ny;
    plan.n_ = nx + ny;
    const std::uint64_t total = count_exact_partition(nx, ny);
    if (total != kHugeCount && total <= exact_threshold) {
        plan.exact_ = true;
        plan.n_draws_ = total;
    } else {
        plan.n_draws_ = n_perm;
    }
    return plan;
}

ResamplePlan ResamplePlan::rowperms(std::size_t n, std::uint64_t n_perm, std::uint64_t seed,
                                    std::uint64_t exact_threshold) {
    if (n < 2) throw Error(ErrorCode::DimensionTooSmall, "row permutation requires n >= 2");
    ResamplePlan plan;
    plan.scheme_ = Scheme::RowPerm;
    plan.seed_ = seed;
    plan.n_ = n;
    const std::uint64_t total = count_exact_rowperm(n);
    if (total != kHugeCount && total <= exact_threshold) {
        plan.exact_ = true;
        plan.n_draws_ = total;
    } else {
        plan.n_draws_ = n_perm;
    }
    return plan;
}

ResamplePlan ResamplePlan::labelperms(std::vector<std::size_t> group_sizes, std::uint64_t n_perm,
                                      std::uint64_t seed, std::uint64_t exact_threshold) {
    std::size_t total_obs = 0;
    for (std::size_t size : group_sizes) total_obs += size;
    if (group_sizes.size() < 2 || total_obs < 3) {
        throw Error(ErrorCode::DimensionTooSmall, "label permutation requires >= 2 groups");
    }
    ResamplePlan plan;
    plan.scheme_ = Scheme::LabelPerm;
    plan.seed_ = seed;
    plan.n_ = total_obs;
    plan.group_sizes_ = std::move(group_sizes);
    const std::uint64_t total = count_exact_labelperm(plan.group_sizes_);
    if (total != kHugeCount && total <= exact_threshold) {
        plan.exact_ = true;
        plan.n_draws_ = total;
    } else {
        plan.n_draws_ = n_perm;
    }
    return plan;
}

ResamplePlan ResamplePlan::bootstrap(std::size_t nx, std::size_t ny, bool paired,
                                     std::uint64_t n_boot, std::uint64_t seed) {
    if (nx < 2 || (!paired && ny > 0 && ny < 2)) {
        throw Error(ErrorCode::DimensionTooSmall, "bootstrap requires group sizes >= 2");
    }
    ResamplePlan plan;
    plan.scheme_ = Scheme::Bootstrap;
    plan.seed_ = seed;
    plan.paired_ = paired;
    plan.nx_ = nx;
    plan.ny_ = ny;
    plan.n_ = paired ? nx : nx + ny;
    plan.n_draws_ = n_boot;
    return plan;
}

void ResamplePlan::draw_signs(std::uint64_t i, double* out) const {
    if (exact_) {
        // Pattern i: bit j chooses the sign of observation j.
        for (std::size_t j = 0; j < n_; ++j) {
            out[j] = (i >> j) & 1u ? -1.0 : 1.0;
        }
        return;
    }
    rng::CounterRng stream(seed_, i);
    for (std::size_t j = 0; j < n_; ++j) {
        out[j] = (stream.next_u32() >> 31) ? -1.0 : 1.0;
    }
}

namespace {

// Lexicographic unranking of the i-th k-combination of 0..n-1 (combinadic).
void unrank_combination(std::uint64_t rank, std::size_t n, std::size_t k, std::uint32_t* out) {
    std::size_t next = 0;
    for (std::size_t slot = 0; slot < k; ++slot) {
        for (std::size_t candidate = next;; ++candidate) {
            const std::uint64_t below = binomial_or_huge(n - candidate - 1, k - slot - 1);
            if (rank < below) {
                out[slot] = static_cast<std::uint32_t>(candidate);
                next = candidate + 1;
                break;
            }
            rank -= below;
        }
    }
}

// Factoradic unranking of the i-th permutation of 0..n-1.
void unrank_permutation(std::uint64_t rank, std::size_t n, std::uint32_t* out) {
    std::vector<std::uint32_t> pool(n);
    std::iota(pool.begin(), pool.end(), 0u);
    std::vector<std::uint64_t> fact(n, 1);
    for (std::size_t j = 1; j < n; ++j) fact[j] = fact[j - 1] * j;
    for (std::size_t slot = 0; slot < n; ++slot) {
        const std::uint64_t f = fact[n - slot - 1];
        const std::size_t pick = static_cast<std::size_t>(rank / f);
        rank %= f;
        out[slot] = pool[pick];
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
    }
}

// Unranks the i-th distinct arrangement of the multiset {0^n0, 1^n1, ...}
// in lexicographic order, then converts the label arrangement into an
// observation permutation grouped by label.
void unrank_multiset(std::uint64_t rank, const std::vector<std::size_t>& group_sizes,
                     std::uint32_t* out) {
    const std::size_t n = [&] {
        std::size_t t = 0;
        for (std::size_t s : group_sizes) t += s;
        return t;
    }();
    std::vector<std::size_t> remaining = group_sizes;
    std::vector<std::size_t> labels(n);
    for (std::size_t pos = 0; pos < n; ++pos) {
        for (std::size_t g = 0; g < remaining.size(); ++g) {
            if (remaining[g] == 0) continue;
            remaining[g] -= 1;
            const std::uint64_t with_prefix = count_exact_labelperm(remaining);
            if (rank < with_prefix) {
                labels[pos] = g;
                break;
            }
            rank -= with_prefix;
            remaining[g] += 1;
        }
    }
    // Observation at position p carries label labels[p]; emit positions in
    // group order so out[0..n) lists group 0's rows, then group 1's, etc.
    std::size_t cursor = 0;
    for (std::size_t g = 0; g < group_sizes.size(); ++g) {
        for (std::size_t pos = 0; pos < n; ++pos) {
            if (labels[pos] == g) out[cursor++] = static_cast<std::uint32_t>(pos);
        }
    }
}

void fisher_yates(rng::CounterRng& stream, std::size_t n, std::uint32_t* out) {
    for (std::size_t j = 0; j < n; ++j) out[j] = static_cast<std::uint32_t>(j);
    for (std::size_t j = n - 1; j > 0; --j) {
        const std::size_t k = static_cast<std::size_t>(stream.bounded(j + 1));
        std::swap(out[j], out[k]);
    }
}

}  // namespace

void ResamplePlan::draw_permutation(std::uint64_t i, std::uint32_t* out) const {
    if (exact_) {
        switch (scheme_) {
            case Scheme::Partition: {
                unrank_combination(i, n_, nx_, out);
                // Complement (ascending) forms pseudo-group Y.
                std::vector<bool> used(n_, false);
                for (std::size_t j = 0; j < nx_; ++j) used[out[j]] = true;
                std::size_t cursor = nx_;
                for (std::size_t v = 0; v < n_; ++v) {
                    if (!used[v]) out[cursor++] = static_cast<std::uint32_t>(v);
                }
                return;
            }
            case Scheme::RowPerm:
                unrank_permutation(i, n_, out);
                return;
            case Scheme::LabelPerm:
                unrank_multiset(i, group_sizes_, out);
                return;
            default:
                break;
        }
    }
    rng::CounterRng stream(seed_, i);
    fisher_yates(stream, n_, out);
}

void ResamplePlan::draw_bootstrap(std::uint64_t i, std::uint32_t* idx_x, std::uint32_t* idx_y) const {
    rng::CounterRng stream(seed_, i);
    if (paired_) {
        for (std::size_t j = 0; j < nx_; ++j) {
            idx_x[j] = static_cast<std::uint32_t>(stream.bounded(nx_));
        }
        return;
    }
    for (std::size_t j = 0; j < nx_; ++j) {
        idx_x[j] = static_cast<std::uint32_t>(stream.bounded(nx_));
    }
    for (std::size_t j = 0; j < ny_; ++j) {
        idx_y[j] = static_cast<std::uint32_t>(stream.bounded(ny_));
    }
}

std::vector<std::vector<double>> gen_signflips(std::size_t n, std::uint64_t n_perm,
                                               std::uint64_t seed, std::uint64_t exact_threshold,
                                               bool* exact_mode) {
    const auto plan = ResamplePlan::signflips(n, n_perm, seed, exact_threshold);
    if (exact_mode) *exact_mode = plan.exact();
    std::vector<std::vector<double>> out(plan.n_draws(), std::vector<double>(n));
    for (std::uint64_t i = 0; i < plan.n_draws(); ++i) plan.draw_signs(i, out[i].data());
    return out;
}

std::vector<std::vector<std::uint32_t>> gen_partitions(std::size_t nx, std::size_t ny,
                                                       std::uint64_t n_perm, std::uint64_t seed,
                                                       std::uint64_t exact_threshold,
                                                       bool* exact_mode) {
    const auto plan = ResamplePlan::partitions(nx, ny, n_perm, seed, exact_threshold);
    if (exact_mode) *exact_mode = plan.exact();
    std::vector<std::vector<std::uint32_t>> out(plan.n_draws(),
                                                std::vector<std::uint32_t>(nx + ny));
    for (std::uint64_t i = 0; i < plan.n_draws(); ++i) plan.draw_permutation(i, out[i].data());
    return out;
}

std::vector<BootstrapDraw> gen_bootstrap(std::size_t nx, std::size_t ny, bool paired,
                                         std::uint64_t n_boot, std::uint64_t seed) {
    const auto plan = ResamplePlan::bootstrap(nx, ny, paired, n_boot, seed);
    std::vector<BootstrapDraw> out(n_boot);
    for (std::uint64_t i = 0; i < n_boot; ++i) {
        out[i].idx_x.resize(nx);
        if (!paired) out[i].idx_y.resize(ny);
        plan.draw_bootstrap(i, out[i].idx_x.data(), paired ? nullptr : out[i].idx_y.data());
    }
    return out;
}

}  // namespace permstat::resample
