#pragma once

// Core domain types shared by every test family.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "permstat/error.hpp"

namespace permstat {

enum class Tail { TwoTailed, Right, Left };

enum class CorrectionMethod { Max, Bonferroni, Holm, None };

enum class VarAssumption { Equal, Unequal };

const char* tail_name(Tail tail) noexcept;
const char* correction_name(CorrectionMethod method) noexcept;
const char* var_assumption_name(VarAssumption va) noexcept;

std::optional<Tail> tail_from_name(const std::string& name) noexcept;
std::optional<CorrectionMethod> correction_from_name(const std::string& name) noexcept;
std::optional<VarAssumption> var_assumption_from_name(const std::string& name) noexcept;

// Observations x variables matrix, row-major. Rows are the resampling unit.
class DataMatrix {
public:
    DataMatrix() = default;
    DataMatrix(std::size_t n_obs, std::size_t n_vars)
        : n_obs_(n_obs), n_vars_(n_vars), values_(n_obs * n_vars, 0.0) {}
    DataMatrix(std::size_t n_obs, std::size_t n_vars, std::vector<double> values);

    static DataMatrix from_column(const std::vector<double>& column);

    std::size_t n_obs() const noexcept { return n_obs_; }
    std::size_t n_vars() const noexcept { return n_vars_; }
    bool empty() const noexcept { return values_.empty(); }

    double& at(std::size_t obs, std::size_t var) { return values_[obs * n_vars_ + var]; }
    double at(std::size_t obs, std::size_t var) const { return values_[obs * n_vars_ + var]; }

    const double* row(std::size_t obs) const noexcept { return values_.data() + obs * n_vars_; }
    double* row(std::size_t obs) noexcept { return values_.data() + obs * n_vars_; }

    const double* data() const noexcept { return values_.data(); }
    double* data() noexcept { return values_.data(); }

    std::vector<double> column(std::size_t var) const;

    // Throws NonFiniteValue naming the first offending cell (row/col, 0-based).
    void require_finite() const;

private:
    std::size_t n_obs_ = 0;
    std::size_t n_vars_ = 0;
    std::vector<double> values_;
};

struct SampleSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;  // n-1 denominator
};

struct TestConfig {
    std::uint64_t n_perm = 10000;
    std::uint64_t seed = 0;
    Tail tail = Tail::TwoTailed;
    double alpha = 0.05;
    CorrectionMethod correction = CorrectionMethod::Max;
    VarAssumption var_assumption = VarAssumption::Equal;
    // Enumerate exhaustively when the number of distinct rearrangements is at most this.
    std::uint64_t exact_threshold = 20000;
    unsigned n_threads = 0;  // 0 = hardware default
};

// Fills defaults and rejects out-of-range fields. Appends advisory messages
// (e.g. a permutation count below the recommended several thousand) to
// `warnings` when given.
TestConfig validate_config(TestConfig cfg, std::vector<std::string>* warnings = nullptr);

// Empirical null distribution of a (possibly max-reduced) statistic.
// `values` are stored in the comparison units used for p-values: |t| style
// magnitudes reduce under TwoTailed via abs, variance-ratio tests store
// max(F, 1/F) per draw before reduction.
struct NullDistribution {
    std::vector<double> values;
    Tail tail = Tail::TwoTailed;
    bool corrected = false;  // true when built by max reduction across variables
    std::size_t n_vars_joined = 1;
    bool exact = false;  // exhaustive enumeration (plain-proportion p-values)
};

// Per-variable (or per-pair) outcome of a permutation test.
struct VariableResult {
    double statistic = 0.0;
    double df = 0.0;    // NaN when the family has none (z)
    double df2 = 0.0;   // second df for F families, NaN otherwise
    double p = 1.0;     // final (corrected) p-value
    double p_raw = 1.0; // pre-adjustment p (equals p for Max/None)
    double ci_lower = 0.0;
    double ci_upper = 0.0;
    double estimate = 0.0;  // mean difference, variance ratio, or correlation
    double se = 0.0;        // NaN where the family defines none
    // Value compared against the null distribution (|statistic| for two-tailed
    // t/z/r, max(F,1/F) for two-tailed variance tests, statistic otherwise).
    double observed_extreme = 0.0;
    std::vector<SampleSummary> summaries;  // one per group
    std::optional<std::string> error;      // per-variable failure marker
    int var_a = -1;  // pair identity (correlation matrix mode), else -1
    int var_b = -1;
};

struct PermutationResult {
    std::string family;
    TestConfig config;
    bool exact = false;
    std::uint64_t n_rearrangements = 0;
    std::vector<VariableResult> variables;
    // One shared distribution under Max correction, one per variable otherwise
    // (failed variables hold an empty distribution).
    std::vector<NullDistribution> null_distributions;
    std::vector<std::string> warnings;
};

struct EffectVariableResult {
    double effect = 0.0;
    double ci_lower = 0.0;
    double ci_upper = 0.0;
    double correction_factor = 1.0;  // 1 when no bias correction applied
    std::optional<std::string> error;
};

struct BootConfig {
    std::uint64_t n_boot = 10000;
    std::uint64_t seed = 0;
    double alpha = 0.05;
    bool paired = false;
    VarAssumption var_assumption = VarAssumption::Equal;
    bool bias_correct = true;
    unsigned n_threads = 0;
};

BootConfig validate_boot_config(BootConfig cfg, std::vector<std::string>* warnings = nullptr);

struct EffectSizeResult {
    std::string kind;  // effective label: bias-corrected Cohen reports as "hedges_g"
    BootConfig config;
    std::vector<EffectVariableResult> variables;
};

}  // namespace permstat
