#include "permstat/effectsize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "permstat/inference.hpp"
#include "permstat/parallel.hpp"
#include "permstat/resample.hpp"

namespace permstat {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double variance_of(std::span<const double> v, double mean) {
    if (v.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : v) {
        const double d = x - mean;
        ss += d * d;
    }
    return ss / static_cast<double>(v.size() - 1);
}

double median_of(std::span<const double> v) {
    std::vector<double> copy(v.begin(), v.end());
    std::sort(copy.begin(), copy.end());
    const std::size_t n = copy.size();
    if (n % 2 == 1) return copy[n / 2];
    return 0.5 * (copy[n / 2 - 1] + copy[n / 2]);
}

double standardized_mean(std::span<const double> x) {
    const double m = mean_of(x);
    const double sd = std::sqrt(variance_of(x, m));
    if (!(sd > 0.0)) throw Error(ErrorCode::ZeroVariance, "sample sd is zero");
    return m / sd;
}

}  // namespace

const char* effect_kind_name(EffectKind kind) noexcept {
    switch (kind) {
        case EffectKind::Cohen: return "cohen";
        case EffectKind::Glass: return "glass";
        case EffectKind::Cliff: return "cliff";
        case EffectKind::MeanDiff: return "meandiff";
        case EffectKind::MedianDiff: return "mediandiff";
    }
    return "cohen";
}

std::optional<EffectKind> effect_kind_from_name(const std::string& name) noexcept {
    if (name == "cohen") return EffectKind::Cohen;
    if (name == "glass") return EffectKind::Glass;
    if (name == "cliff") return EffectKind::Cliff;
    if (name == "meandiff") return EffectKind::MeanDiff;
    if (name == "mediandiff") return EffectKind::MedianDiff;
    return std::nullopt;
}

double cliffs_d(std::span<const double> x, std::span<const double> y) {
    if (x.empty() || y.empty()) {
        throw Error(ErrorCode::DimensionTooSmall, "Cliff's d requires non-empty samples");
    }
    // Count dominances over all cross pairs via the sorted second sample.
    std::vector<double> ys(y.begin(), y.end());
    std::sort(ys.begin(), ys.end());
    long long net = 0;
    for (double xv : x) {
        const auto lo = std::lower_bound(ys.begin(), ys.end(), xv);
        const auto hi = std::upper_bound(ys.begin(), ys.end(), xv);
        const long long less = lo - ys.begin();          // y < x: x dominates
        const long long greater = ys.end() - hi;         // y > x: y dominates
        net += less - greater;
    }
    return static_cast<double>(net) /
           (static_cast<double>(x.size()) * static_cast<double>(y.size()));
}

double effect_point(std::span<const double> x, std::span<const double> y, EffectKind kind,
                    bool paired, VarAssumption va, ControlSample control) {
    const bool one_sample = y.empty();
    if (x.size() < (kind == EffectKind::Cliff ? 1u : 2u)) {
        throw Error(ErrorCode::DimensionTooSmall, "effect size requires a sample of >= 2");
    }
    if (one_sample) {
        switch (kind) {
            case EffectKind::Cohen: return standardized_mean(x);
            case EffectKind::MeanDiff: return mean_of(x);
            case EffectKind::MedianDiff: return median_of(x);
            default:
                throw Error(ErrorCode::BadArgument,
                            "glass and cliff effect sizes require two samples");
        }
    }
    if (kind != EffectKind::Cliff && y.size() < 2) {
        throw Error(ErrorCode::DimensionTooSmall, "effect size requires group sizes >= 2");
    }
    if (paired && x.size() != y.size()) {
        throw Error(ErrorCode::ShapeMismatch, "paired effect size requires equal lengths");
    }

    switch (kind) {
        case EffectKind::Cohen: {
            if (paired) {
                std::vector<double> diff(x.size());
                for (std::size_t i = 0; i < x.size(); ++i) diff[i] = x[i] - y[i];
                return standardized_mean(diff);
            }
            const double mx = mean_of(x);
            const double my = mean_of(y);
            const double vx = variance_of(x, mx);
            const double vy = variance_of(y, my);
            double denom;
            if (va == VarAssumption::Equal) {
                const double nx = static_cast<double>(x.size());
                const double ny = static_cast<double>(y.size());
                denom = std::sqrt(((nx - 1.0) * vx + (ny - 1.0) * vy) / (nx + ny - 2.0));
            } else {
                denom = std::sqrt(0.5 * (vx + vy));
            }
            if (!(denom > 0.0)) throw Error(ErrorCode::ZeroVariance, "pooled sd is zero");
            return (mx - my) / denom;
        }
        case EffectKind::Glass: {
            const std::span<const double> ctrl = control == ControlSample::Y ? y : x;
            const std::span<const double> treat = control == ControlSample::Y ? x : y;
            const double sd_ctrl = std::sqrt(variance_of(ctrl, mean_of(ctrl)));
            if (!(sd_ctrl > 0.0)) throw Error(ErrorCode::ZeroVariance, "control sd is zero");
            return (mean_of(treat) - mean_of(ctrl)) / sd_ctrl;
        }
        case EffectKind::Cliff:
            return cliffs_d(x, y);
        case EffectKind::MeanDiff:
            return mean_of(x) - mean_of(y);
        case EffectKind::MedianDiff:
            return median_of(x) - median_of(y);
    }
    return kNaN;
}

double bias_factor(std::size_t n_total) {
    if (n_total < 3) {
        throw Error(ErrorCode::SampleTooSmall, "bias factor requires n_total >= 3");
    }
    return 1.0 - 3.0 / (4.0 * static_cast<double>(n_total) - 9.0);
}

EffectSizeResult booteffectsize(const DataMatrix& x, const DataMatrix* y, EffectKind kind,
                                BootConfig cfg, ControlSample control) {
    EffectSizeResult res;
    std::vector<std::string> warnings;
    cfg = validate_boot_config(cfg, &warnings);
    res.config = cfg;
    x.require_finite();
    const std::size_t nx = x.n_obs();
    const std::size_t n_vars = x.n_vars();
    std::size_t ny = 0;
    if (y) {
        y->require_finite();
        ny = y->n_obs();
        if (y->n_vars() != n_vars) {
            throw Error(ErrorCode::ShapeMismatch, "x and y must have the same number of variables");
        }
        if (cfg.paired && ny != nx) {
            throw Error(ErrorCode::ShapeMismatch, "paired bootstrap requires equal group sizes");
        }
    } else if (cfg.paired) {
        throw Error(ErrorCode::BadArgument, "paired mode requires a second sample");
    }

    const bool standardized = kind == EffectKind::Cohen || kind == EffectKind::Glass;
    const bool corrected = cfg.bias_correct && standardized;
    // Bias n: total observations for independent designs, the pair count for
    // paired designs, n for one-sample.
    std::size_t bias_n = nx;
    if (y) bias_n = cfg.paired ? nx : nx + ny;
    const double factor = corrected ? bias_factor(bias_n) : 1.0;

    if (kind == EffectKind::Cohen) {
        res.kind = corrected ? "hedges_g" : "cohens_d";
    } else if (kind == EffectKind::Glass) {
        res.kind = "glass_delta";
    } else if (kind == EffectKind::Cliff) {
        res.kind = "cliffs_d";
    } else {
        res.kind = kind == EffectKind::MeanDiff ? "mean_diff" : "median_diff";
    }

    const auto plan = resample::ResamplePlan::bootstrap(nx, y ? ny : 0, cfg.paired || !y,
                                                        cfg.n_boot, cfg.seed);
    const std::uint64_t max_attempts = 10 * cfg.n_boot;

    res.variables.resize(n_vars);
    parallel::parallel_for(n_vars, parallel::resolve_threads(cfg.n_threads),
                           [&](std::uint64_t vbegin, std::uint64_t vend) {
        std::vector<std::uint32_t> idx_x(nx), idx_y(ny);
        std::vector<double> rx(nx), ry(ny);
        std::vector<double> boot;
        for (std::uint64_t v = vbegin; v < vend; ++v) {
            EffectVariableResult& out = res.variables[v];
            const auto col_x = x.column(v);
            const auto col_y = y ? y->column(v) : std::vector<double>();
            double point;
            try {
                point = effect_point(col_x, col_y, kind, cfg.paired, cfg.var_assumption, control);
            } catch (const Error& e) {
                out.effect = kNaN;
                out.ci_lower = kNaN;
                out.ci_upper = kNaN;
                out.error = error_code_name(e.code());
                continue;
            }

            boot.clear();
            boot.reserve(cfg.n_boot);
            std::uint64_t attempt = 0;
            // Degenerate resamples (zero denominator) are discarded and the
            // deterministic attempt stream is advanced instead.
            while (boot.size() < cfg.n_boot && attempt < max_attempts) {
                plan.draw_bootstrap(attempt, idx_x.data(), idx_y.data());
                ++attempt;
                if (cfg.paired && y) {
                    for (std::size_t i = 0; i < nx; ++i) {
                        rx[i] = col_x[idx_x[i]];
                        ry[i] = col_y[idx_x[i]];
                    }
                } else {
                    for (std::size_t i = 0; i < nx; ++i) rx[i] = col_x[idx_x[i]];
                    for (std::size_t i = 0; i < ny; ++i) ry[i] = col_y[idx_y[i]];
                }
                try {
                    boot.push_back(effect_point(rx, std::span<const double>(ry.data(), ny), kind,
                                                cfg.paired, cfg.var_assumption, control));
                } catch (const Error&) {
                    if (!standardized) throw;
                }
            }
            if (boot.size() < cfg.n_boot) {
                out.effect = kNaN;
                out.ci_lower = kNaN;
                out.ci_upper = kNaN;
                out.error = error_code_name(ErrorCode::BootstrapDegenerate);
                continue;
            }
            std::sort(boot.begin(), boot.end());
            const double lo = inference::percentile_sorted(boot, 100.0 * (cfg.alpha / 2.0));
            const double hi = inference::percentile_sorted(boot, 100.0 * (1.0 - cfg.alpha / 2.0));
            out.effect = factor * point;
            out.ci_lower = factor * lo;
            out.ci_upper = factor * hi;
            out.correction_factor = factor;
        }
    });
    return res;
}

}  // namespace permstat
