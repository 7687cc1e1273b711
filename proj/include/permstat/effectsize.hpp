#pragma once

// Standardised and unstandardised effect sizes with bootstrapped percentile
// CIs and automatic small-sample bias correction.

#include <optional>
#include <span>
#include <vector>

#include "permstat/types.hpp"

namespace permstat {

enum class EffectKind { Cohen, Glass, Cliff, MeanDiff, MedianDiff };

const char* effect_kind_name(EffectKind kind) noexcept;
std::optional<EffectKind> effect_kind_from_name(const std::string& name) noexcept;

// Which sample standardises Glass' delta (its sd forms the denominator).
enum class ControlSample { Y, X };

// Point estimate. y empty => one-sample (Cohen: mean/sd; MeanDiff: mean;
// MedianDiff: median; Glass and Cliff require two samples).
double effect_point(std::span<const double> x, std::span<const double> y, EffectKind kind,
                    bool paired, VarAssumption va, ControlSample control = ControlSample::Y);

// Small-sample bias factor 1 - 3/(4n - 9); n_total >= 3.
double bias_factor(std::size_t n_total);

double cliffs_d(std::span<const double> x, std::span<const double> y);

// Per-variable effect estimates with percentile bootstrap CIs. When
// cfg.bias_correct and the kind standardises by a sample sd (Cohen, Glass),
// the estimate and both CI bounds are multiplied by the bias factor; the
// corrected Cohen estimate is reported as Hedges' g.
EffectSizeResult booteffectsize(const DataMatrix& x, const DataMatrix* y, EffectKind kind,
                                BootConfig cfg, ControlSample control = ControlSample::Y);

}  // namespace permstat
