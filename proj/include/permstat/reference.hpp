#pragma once

// Independent oracles and baselines: brute-force exact permutation tests,
// parametric distribution functions, and the Monte Carlo FWER/power harness.
// The exact tests share no enumeration or statistic code with the engine.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "permstat/special.hpp"
#include "permstat/types.hpp"

namespace permstat::reference {

using special::f_cdf;
using special::norm_cdf;
using special::norm_inv;
using special::t_cdf;

// Exhaustive-enumeration p-values (plain proportions). Throw
// TooLargeToEnumerate above 10^6 distinct rearrangements.
double exact_test_two_sample_t(std::span<const double> x, std::span<const double> y, Tail tail,
                               VarAssumption va = VarAssumption::Equal);
// Paired designs: pass the differences.
double exact_test_one_sample_t(std::span<const double> x, double mu, Tail tail);
double exact_test_var2(std::span<const double> x, std::span<const double> y, Tail tail);
// Pearson on the given columns (rank/rankit kinds: transform inputs first).
double exact_test_correlation(std::span<const double> x, std::span<const double> y, Tail tail);
// Right-tailed by construction.
double exact_test_anova1(const std::vector<std::vector<double>>& groups);

struct FwerReport {
    std::uint64_t n_sims = 0;
    std::size_t n_vars = 0;
    std::size_t n_obs = 0;
    double alpha = 0.05;
    CorrectionMethod correction = CorrectionMethod::Max;
    double effect_shift = 0.0;
    std::size_t n_shifted = 0;
    double empirical_fwer = 0.0;
    std::optional<double> empirical_power;  // absent when effect_shift == 0
    double mc_stderr = 0.0;
};

// Simulates two independent standard-normal groups per dataset (optionally
// shifting the first n_shifted Y variables by -effect_shift), runs the
// engine's two-sample permutation t-test under `correction`, and reports the
// family-wise error rate over the null variables plus the per-variable
// detection rate over the shifted ones.
FwerReport fwer_sim(std::size_t n_vars, std::size_t n_obs, std::uint64_t n_sims, double alpha,
                    CorrectionMethod correction, double effect_shift, std::size_t n_shifted,
                    std::uint64_t seed, std::uint64_t n_perm = 2000, unsigned n_threads = 0);

// Deterministic standard-normal matrix (inverse-CDF over the counter RNG).
DataMatrix sample_normal(std::size_t n_obs, std::size_t n_vars, std::uint64_t seed,
                         std::uint64_t stream = 0);

}  // namespace permstat::reference
