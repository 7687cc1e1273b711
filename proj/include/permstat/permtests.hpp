#pragma once

// Permutation test drivers: observed statistics per variable, the permutation
// distribution under the family's rearrangement scheme, and p/CI assembly.

#include <cstdint>
#include <vector>

#include "permstat/kernels.hpp"
#include "permstat/types.hpp"

namespace permstat {

// One-sample (y == nullptr, tests x against mu) or paired-sample (tests x - y
// against mu) t-test under the sign-flip scheme. mu may be empty (all zeros),
// a single broadcast value, or one value per variable.
PermutationResult permuttest(const DataMatrix& x, const DataMatrix* y,
                             const std::vector<double>& mu, TestConfig cfg);

// Two-sample t-test: pooled observations re-partitioned into pseudo-groups.
PermutationResult permuttest2(const DataMatrix& x, const DataMatrix& y, TestConfig cfg);

// Two-sample variance test on the F-statistic. Observations are centered by
// their own group mean before pooling so mean shifts cannot masquerade as
// variance effects.
PermutationResult permuvartest2(const DataMatrix& x, const DataMatrix& y, TestConfig cfg);

// One-sample Z-test with known sigma (single value or one per variable).
PermutationResult permuztest(const DataMatrix& x, const std::vector<double>& mu,
                             const std::vector<double>& sigma, TestConfig cfg);

// Correlation test. With y: variable v of x against variable v of y. Without
// y: every unordered variable pair within x (correlation-matrix mode). The
// second member's rows are permuted, the first member stays fixed.
PermutationResult permucorr(const DataMatrix& x, const DataMatrix* y,
                            kernels::CorrelationKind kind, TestConfig cfg);

// One-way ANOVA by label shuffling; right-tailed only.
PermutationResult permuanova1(const std::vector<double>& values,
                              const std::vector<int>& group_labels, TestConfig cfg);

struct TwoWayAnovaResult {
    PermutationResult factor_a;
    PermutationResult factor_b;
    PermutationResult interaction;
};

// Balanced two-way ANOVA by unrestricted observation shuffling; all three
// F-statistics are recomputed on each shared rearrangement. Right-tailed only.
TwoWayAnovaResult permuanova2(const std::vector<double>& values, const std::vector<int>& a_labels,
                              const std::vector<int>& b_labels, TestConfig cfg);

}  // namespace permstat
