#include "permstat/types.hpp"

#include <cmath>
#include <sstream>

namespace permstat {

const char* error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::AlphaOutOfRange: return "alpha_out_of_range";
        case ErrorCode::PermCountTooLow: return "perm_count_too_low";
        case ErrorCode::BootCountTooLow: return "boot_count_too_low";
        case ErrorCode::DimensionTooSmall: return "dimension_too_small";
        case ErrorCode::ShapeMismatch: return "shape_mismatch";
        case ErrorCode::ZeroVariance: return "zero_variance";
        case ErrorCode::SigmaNonPositive: return "sigma_non_positive";
        case ErrorCode::TailUnsupported: return "tail_unsupported";
        case ErrorCode::Unbalanced: return "unbalanced";
        case ErrorCode::SampleTooSmall: return "sample_too_small";
        case ErrorCode::SEUnavailable: return "se_unavailable";
        case ErrorCode::DomainError: return "domain_error";
        case ErrorCode::TooLargeToEnumerate: return "too_large_to_enumerate";
        case ErrorCode::BootstrapDegenerate: return "bootstrap_degenerate";
        case ErrorCode::ParseError: return "parse_error";
        case ErrorCode::NonFiniteValue: return "non_finite_value";
        case ErrorCode::EmptyTable: return "empty_table";
        case ErrorCode::IoError: return "io_error";
        case ErrorCode::BadArgument: return "bad_argument";
    }
    return "unknown";
}

const char* tail_name(Tail tail) noexcept {
    switch (tail) {
        case Tail::TwoTailed: return "two";
        case Tail::Right: return "right";
        case Tail::Left: return "left";
    }
    return "two";
}

const char* correction_name(CorrectionMethod method) noexcept {
    switch (method) {
        case CorrectionMethod::Max: return "max";
        case CorrectionMethod::Bonferroni: return "bonferroni";
        case CorrectionMethod::Holm: return "holm";
        case CorrectionMethod::None: return "none";
    }
    return "max";
}

const char* var_assumption_name(VarAssumption va) noexcept {
    return va == VarAssumption::Equal ? "equal" : "unequal";
}

std::optional<Tail> tail_from_name(const std::string& name) noexcept {
    if (name == "two" || name == "both") return Tail::TwoTailed;
    if (name == "right") return Tail::Right;
    if (name == "left") return Tail::Left;
    return std::nullopt;
}

std::optional<CorrectionMethod> correction_from_name(const std::string& name) noexcept {
    if (name == "max") return CorrectionMethod::Max;
    if (name == "bonferroni") return CorrectionMethod::Bonferroni;
    if (name == "holm") return CorrectionMethod::Holm;
    if (name == "none") return CorrectionMethod::None;
    return std::nullopt;
}

std::optional<VarAssumption> var_assumption_from_name(const std::string& name) noexcept {
    if (name == "equal") return VarAssumption::Equal;
    if (name == "unequal") return VarAssumption::Unequal;
    return std::nullopt;
}

DataMatrix::DataMatrix(std::size_t n_obs, std::size_t n_vars, std::vector<double> values)
    : n_obs_(n_obs), n_vars_(n_vars), values_(std::move(values)) {
    if (values_.size() != n_obs_ * n_vars_) {
        throw Error(ErrorCode::ShapeMismatch, "value buffer does not match n_obs * n_vars");
    }
}

DataMatrix DataMatrix::from_column(const std::vector<double>& column) {
    return DataMatrix(column.size(), 1, column);
}

std::vector<double> DataMatrix::column(std::size_t var) const {
    std::vector<double> out(n_obs_);
    for (std::size_t i = 0; i < n_obs_; ++i) out[i] = values_[i * n_vars_ + var];
    return out;
}

void DataMatrix::require_finite() const {
    for (std::size_t i = 0; i < n_obs_; ++i) {
        for (std::size_t v = 0; v < n_vars_; ++v) {
            if (!std::isfinite(values_[i * n_vars_ + v])) {
                std::ostringstream msg;
                msg << "non-finite value at row " << i << ", column " << v;
                throw Error(ErrorCode::NonFiniteValue, msg.str());
            }
        }
    }
}

TestConfig validate_config(TestConfig cfg, std::vector<std::string>* warnings) {
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
        throw Error(ErrorCode::AlphaOutOfRange, "alpha must lie in (0, 1)");
    }
    if (cfg.n_perm < 100) {
        throw Error(ErrorCode::PermCountTooLow, "n_perm must be at least 100");
    }
    if (cfg.n_perm < 1000 && warnings) {
        warnings->push_back(
            "n_perm below 1000; several thousand permutations are recommended for reliable p-values");
    }
    return cfg;
}

BootConfig validate_boot_config(BootConfig cfg, std::vector<std::string>* warnings) {
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
        throw Error(ErrorCode::AlphaOutOfRange, "alpha must lie in (0, 1)");
    }
    if (cfg.n_boot < 100) {
        throw Error(ErrorCode::BootCountTooLow, "n_boot must be at least 100");
    }
    if (cfg.n_boot < 1000 && warnings) {
        warnings->push_back("n_boot below 1000; several thousand resamples are recommended");
    }
    return cfg;
}

}  // namespace permstat
