#pragma once

// Converts permutation distributions into p-values, confidence intervals,
// and multiplicity-corrected quantities.

#include <span>
#include <utility>
#include <vector>

#include "permstat/types.hpp"

namespace permstat::inference {

// Extremeness transform applied to both the observed statistic and the null
// distribution before counting: |x| two-tailed, x right, -x left. For
// two-tailed variance-ratio tests the engine stores max(F, 1/F) values in the
// distribution instead, paired with the same transform of the observed ratio.
double extreme_value(double value, Tail tail) noexcept;

// Row-wise reduction of a (rearrangements x variables) statistic matrix into
// the single joint null distribution used by max correction. TwoTailed takes
// the row maximum of |value|, Right the row maximum, Left the row minimum.
NullDistribution max_reduce(const std::vector<std::vector<double>>& stat_rows, Tail tail);

// Proportion of the null distribution at least as extreme as the observed
// value. Monte Carlo mode adds the observed arrangement: p = (1 + c)/(n + 1).
// Exact mode uses the plain proportion (the observed arrangement is already
// enumerated).
double pvalue(double observed, const NullDistribution& dist);

// Percentile by linear interpolation at rank 1 + pct/100 * (n - 1) on the
// sorted values.
double percentile(std::span<const double> values, double pct);
double percentile_sorted(std::span<const double> sorted, double pct);

enum class CiFamily {
    Scaled,  // t, z: estimate +/- crit * se
    Ratio,   // F: (F / crit, F * crit) in ratio units
    Shift,   // r: (r - q, r + q) clamped to [-1, 1]
};

// Critical-value CI derived from the permutation distribution. One-tailed
// intervals are half-open on the untested side.
std::pair<double, double> ci_from_dist(double estimate, double se, const NullDistribution& dist,
                                       double alpha, CiFamily family);

std::vector<double> adjust_bonferroni(std::span<const double> p, std::size_t m);
std::vector<double> adjust_holm(std::span<const double> p);

}  // namespace permstat::inference
