#pragma once

// Scalar reference statistics. These are the textbook two-pass formulas the
// permutation engine's vectorized inner loops are equivalence-tested against.

#include <span>
#include <vector>

#include "permstat/types.hpp"

namespace permstat::kernels {

enum class CorrelationKind { Pearson, Spearman, Rankit };

const char* correlation_kind_name(CorrelationKind kind) noexcept;

struct StatValue {
    double statistic = 0.0;
    double df = 0.0;
    double df2 = 0.0;      // F families only; NaN otherwise
    double se = 0.0;       // NaN where the family defines none
    double estimate = 0.0; // mean difference, variance ratio, or correlation
};

SampleSummary summary(std::span<const double> sample);

StatValue t_one_sample(std::span<const double> x, double mu);
StatValue t_two_sample(std::span<const double> x, std::span<const double> y, VarAssumption va);
StatValue f_two_sample(std::span<const double> x, std::span<const double> y);
StatValue z_one_sample(std::span<const double> x, double mu, double sigma);
StatValue correlation(std::span<const double> x, std::span<const double> y, CorrelationKind kind);

// Midranks; ties receive average ranks, so the ranks always sum to n(n+1)/2.
std::vector<double> rank_transform(std::span<const double> x);

// Normal scores phi^-1((i - 0.5) / n) for i = 1..n (Bliss plotting position).
std::vector<double> rankit_scores(std::size_t n);

StatValue anova1_f(const std::vector<std::vector<double>>& groups);

struct Anova2Stats {
    StatValue factor_a;
    StatValue factor_b;
    StatValue interaction;
};

// Balanced two-way fixed-effects decomposition. cells[i][j] holds the
// replicates of factor A level i and factor B level j; every cell must have
// the same replicate count r >= 2.
Anova2Stats anova2_f(const std::vector<std::vector<std::vector<double>>>& cells);

}  // namespace permstat::kernels
