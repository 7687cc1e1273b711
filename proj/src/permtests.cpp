#include "permstat/permtests.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

#include "permstat/inference.hpp"
#include "permstat/parallel.hpp"
#include "permstat/resample.hpp"
#include "permstat/simd.hpp"
#include "permstat/special.hpp"

namespace permstat {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

// Statistic when a rearranged pseudo-sample has zero variance: zero evidence
// if the numerator also vanishes, otherwise infinitely extreme. NaN must
// never enter a permutation distribution.
double guarded_ratio(double numerator, double se) {
    if (se > 0.0) return numerator / se;
    if (numerator == 0.0) return 0.0;
    return std::copysign(kInf, numerator);
}

std::vector<double> broadcast_per_variable(const std::vector<double>& values, std::size_t n_vars,
                                           const char* what) {
    if (values.empty()) return std::vector<double>(n_vars, 0.0);
    if (values.size() == 1) return std::vector<double>(n_vars, values.front());
    if (values.size() != n_vars) {
        throw Error(ErrorCode::ShapeMismatch,
                    std::string(what) + " must be scalar or one value per variable");
    }
    return values;
}

// Per-draw statistic producer. A fresh instance is created per worker thread
// (owns its scratch); draw i writes the ok-variable statistics into out.
using RowFn = std::function<void(std::uint64_t draw, double* out)>;
using RowFnFactory = std::function<RowFn()>;

// Runs the rearrangement loop. Under Max correction the per-draw rows are
// reduced on the fly (row max of |s|, row max, or row min per tail); under
// the other methods the full per-variable columns are materialized.
struct EngineDists {
    std::vector<double> reduced;                // Max: one value per draw
    std::vector<std::vector<double>> columns;   // otherwise: per ok-variable
};

EngineDists run_draws(const resample::ResamplePlan& plan, std::size_t n_ok, Tail tail,
                      bool use_max, unsigned n_threads, const RowFnFactory& factory) {
    EngineDists out;
    if (n_ok == 0) return out;
    const std::uint64_t n_draws = plan.n_draws();
    if (use_max) {
        out.reduced.assign(n_draws, 0.0);
    } else {
        out.columns.assign(n_ok, std::vector<double>(n_draws, 0.0));
    }
    parallel::parallel_for(n_draws, parallel::resolve_threads(n_threads),
                           [&](std::uint64_t begin, std::uint64_t end) {
        RowFn row_fn = factory();
        std::vector<double> row(n_ok);
        for (std::uint64_t i = begin; i < end; ++i) {
            row_fn(i, row.data());
            if (use_max) {
                double best = row[0];
                switch (tail) {
                    case Tail::TwoTailed:
                        best = std::fabs(best);
                        for (double v : row) best = std::max(best, std::fabs(v));
                        break;
                    case Tail::Right:
                        for (double v : row) best = std::max(best, v);
                        break;
                    case Tail::Left:
                        for (double v : row) best = std::min(best, v);
                        break;
                }
                out.reduced[i] = best;
            } else {
                for (std::size_t k = 0; k < n_ok; ++k) out.columns[k][i] = row[k];
            }
        }
    });
    return out;
}

// Shared p-value / CI / correction assembly. `dist_stats[k]` is the observed
// value of ok-variable k in the same units as the stored distribution (the
// raw statistic for t/z/r families, max(F,1/F) for two-tailed variance
// tests). Ratio-family CIs additionally scale `estimate`.
void assemble(PermutationResult& res, const resample::ResamplePlan& plan,
              const std::vector<std::size_t>& ok, const std::vector<double>& dist_stats,
              EngineDists&& dists, inference::CiFamily family, CorrectionMethod method) {
    const TestConfig& cfg = res.config;
    const std::size_t m = ok.size();
    res.exact = plan.exact();
    res.n_rearrangements = plan.n_draws();
    if (m == 0) return;  // every variable failed; markers already set

    for (std::size_t k = 0; k < m; ++k) {
        res.variables[ok[k]].observed_extreme = dist_stats[k];
    }

    if (method == CorrectionMethod::Max) {
        NullDistribution dist;
        dist.values = std::move(dists.reduced);
        dist.tail = cfg.tail;
        dist.corrected = true;
        dist.n_vars_joined = m;
        dist.exact = plan.exact();
        for (std::size_t k = 0; k < m; ++k) {
            VariableResult& var = res.variables[ok[k]];
            var.p = inference::pvalue(dist_stats[k], dist);
            var.p_raw = var.p;
            const auto ci =
                inference::ci_from_dist(var.estimate, var.se, dist, cfg.alpha, family);
            var.ci_lower = ci.first;
            var.ci_upper = ci.second;
        }
        res.null_distributions.push_back(std::move(dist));
        return;
    }

    // Per-variable distributions; Bonferroni/Holm adjust the raw p-values and
    // their CIs use the alpha/m level.
    std::vector<NullDistribution> per_var(m);
    std::vector<double> p_raw(m);
    for (std::size_t k = 0; k < m; ++k) {
        per_var[k].values = std::move(dists.columns[k]);
        per_var[k].tail = cfg.tail;
        per_var[k].corrected = false;
        per_var[k].n_vars_joined = 1;
        per_var[k].exact = plan.exact();
        p_raw[k] = inference::pvalue(dist_stats[k], per_var[k]);
    }
    std::vector<double> p_final = p_raw;
    double ci_alpha = cfg.alpha;
    if (method == CorrectionMethod::Bonferroni) {
        p_final = inference::adjust_bonferroni(p_raw, m);
        ci_alpha = cfg.alpha / static_cast<double>(m);
    } else if (method == CorrectionMethod::Holm) {
        p_final = inference::adjust_holm(p_raw);
        ci_alpha = cfg.alpha / static_cast<double>(m);
    }
    // null_distributions aligns with res.variables (empty slot per failure).
    std::vector<NullDistribution> aligned(res.variables.size());
    for (std::size_t k = 0; k < m; ++k) {
        VariableResult& var = res.variables[ok[k]];
        var.p = p_final[k];
        var.p_raw = p_raw[k];
        const auto ci =
            inference::ci_from_dist(var.estimate, var.se, per_var[k], ci_alpha, family);
        var.ci_lower = ci.first;
        var.ci_upper = ci.second;
        aligned[ok[k]] = std::move(per_var[k]);
    }
    res.null_distributions = std::move(aligned);
}

void mark_failed(VariableResult& var, const char* reason) {
    var.error = reason;
    var.statistic = kNaN;
    var.df = kNaN;
    var.df2 = kNaN;
    var.p = kNaN;
    var.p_raw = kNaN;
    var.ci_lower = kNaN;
    var.ci_upper = kNaN;
    var.se = kNaN;
    var.observed_extreme = kNaN;
}

}  // namespace

// ---------------------------------------------------------------------------
// One-sample / paired t-test (sign-flip scheme)
// ---------------------------------------------------------------------------

PermutationResult permuttest(const DataMatrix& x, const DataMatrix* y,
                             const std::vector<double>& mu, TestConfig cfg) {
    PermutationResult res;
    res.family = y ? "ttest_paired" : "ttest";
    cfg = validate_config(cfg, &res.warnings);
    res.config = cfg;
    x.require_finite();
    if (y) {
        y->require_finite();
        if (y->n_obs() != x.n_obs() || y->n_vars() != x.n_vars()) {
            throw Error(ErrorCode::ShapeMismatch, "paired test requires x and y of equal shape");
        }
    }
    const std::size_t n = x.n_obs();
    const std::size_t n_vars = x.n_vars();
    if (n < 2) throw Error(ErrorCode::DimensionTooSmall, "t-test requires n >= 2");
    const auto mu_v = broadcast_per_variable(mu, n_vars, "mu");

    // Deviations: x - mu (one-sample) or (x - y) - mu (paired).
    DataMatrix dev(n, n_vars);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t v = 0; v < n_vars; ++v) {
            dev.at(i, v) = x.at(i, v) - (y ? y->at(i, v) : 0.0) - mu_v[v];
        }
    }
    std::vector<double> ssq(n_vars, 0.0);  // invariant under sign flips
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t v = 0; v < n_vars; ++v) {
            ssq[v] += dev.at(i, v) * dev.at(i, v);
        }
    }

    const double dn = static_cast<double>(n);
    const auto t_from_sum = [dn](double sum, double ssq_v) {
        const double m = sum / dn;
        const double var = (ssq_v - sum * sum / dn) / (dn - 1.0);
        const double se = var > 0.0 ? std::sqrt(var / dn) : 0.0;
        return guarded_ratio(m, se);
    };

    // Observed pass: identity signs through the same kernel path as the
    // permuted draws (exact-mode draw 0 reproduces it bit for bit).
    std::vector<double> ones(n, 1.0);
    std::vector<double> obs_sum(n_vars);
    simd::kernels().weighted_rowsum(dev.data(), n_vars, n_vars, ones.data(), n, nullptr,
                                    obs_sum.data());

    res.variables.resize(n_vars);
    std::vector<std::size_t> ok;
    std::vector<double> dist_stats;
    for (std::size_t v = 0; v < n_vars; ++v) {
        VariableResult& var = res.variables[v];
        var.summaries.push_back(kernels::summary(x.column(v)));
        if (y) var.summaries.push_back(kernels::summary(y->column(v)));
        const double mean_dev = obs_sum[v] / dn;
        const double sample_var = (ssq[v] - obs_sum[v] * obs_sum[v] / dn) / (dn - 1.0);
        if (!(sample_var > 0.0)) {
            mark_failed(var, "zero_variance");
            continue;
        }
        var.estimate = mean_dev;
        var.se = std::sqrt(sample_var / dn);
        var.statistic = mean_dev / var.se;
        var.df = dn - 1.0;
        var.df2 = kNaN;
        ok.push_back(v);
        dist_stats.push_back(var.statistic);
    }

    const auto plan =
        resample::ResamplePlan::signflips(n, cfg.n_perm, cfg.seed, cfg.exact_threshold);
    const auto factory = [&]() -> RowFn {
        auto signs = std::make_shared<std::vector<double>>(n);
        auto sums = std::make_shared<std::vector<double>>(n_vars);
        return [&, signs, sums](std::uint64_t i, double* out) {
            plan.draw_signs(i, signs->data());
            simd::kernels().weighted_rowsum(dev.data(), n_vars, n_vars, signs->data(), n, nullptr,
                                            sums->data());
            for (std::size_t k = 0; k < ok.size(); ++k) {
                const std::size_t v = ok[k];
                out[k] = t_from_sum((*sums)[v], ssq[v]);
            }
        };
    };
    auto dists = run_draws(plan, ok.size(), cfg.tail, cfg.correction == CorrectionMethod::Max,
                           cfg.n_threads, factory);
    assemble(res, plan, ok, dist_stats, std::move(dists), inference::CiFamily::Scaled,
             cfg.correction);
    return res;
}

// ---------------------------------------------------------------------------
// One-sample Z-test (sign-flip scheme, known sigma)
// ---------------------------------------------------------------------------

PermutationResult permuztest(const DataMatrix& x, const std::vector<double>& mu,
                             const std::vector<double>& sigma, TestConfig cfg) {
    PermutationResult res;
    res.family = "ztest";
    cfg = validate_config(cfg, &res.warnings);
    res.config = cfg;
    x.require_finite();
    const std::size_t n = x.n_obs();
    const std::size_t n_vars = x.n_vars();
    if (n < 2) throw Error(ErrorCode::DimensionTooSmall, "permutation z-test requires n >= 2");
    const auto mu_v = broadcast_per_variable(mu, n_vars, "mu");
    auto sigma_v = broadcast_per_variable(sigma, n_vars, "sigma");
    for (double s : sigma_v) {
        if (!(s > 0.0)) throw Error(ErrorCode::SigmaNonPositive, "sigma must be positive");
    }

    DataMatrix dev(n, n_vars);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t v = 0; v < n_vars; ++v) {
            dev.at(i, v) = x.at(i, v) - mu_v[v];
        }
    }
    const double dn = static_cast<double>(n);
    std::vector<double> se(n_vars);
    for (std::size_t v = 0; v < n_vars; ++v) se[v] = sigma_v[v] / std::sqrt(dn);

    std::vector<double> ones(n, 1.0);
    std::vector<double> obs_sum(n_vars);
    simd::kernels().weighted_rowsum(dev.data(), n_vars, n_vars, ones.data(), n, nullptr,
                                    obs_sum.data());

    res.variables.resize(n_vars);
    std::vector<std::size_t> ok(n_vars);
    std::iota(ok.begin(), ok.end(), 0u);
    std::vector<double> dist_stats(n_vars);
    for (std::size_t v = 0; v < n_vars; ++v) {
        VariableResult& var = res.variables[v];
        var.summaries.push_back(kernels::summary(x.column(v)));
        var.estimate = obs_sum[v] / dn;
        var.se = se[v];
        var.statistic = var.estimate / var.se;
        var.df = kNaN;
        var.df2 = kNaN;
        dist_stats[v] = var.statistic;
    }

    const auto plan =
        resample::ResamplePlan::signflips(n, cfg.n_perm, cfg.seed, cfg.exact_threshold);
    const auto factory = [&]() -> RowFn {
        auto signs = std::make_shared<std::vector<double>>(n);
        auto sums = std::make_shared<std::vector<double>>(n_vars);
        return [&, signs, sums](std::uint64_t i, double* out) {
            plan.draw_signs(i, signs->data());
            simd::kernels().weighted_rowsum(dev.data(), n_vars, n_vars, signs->data(), n, nullptr,
                                            sums->data());
            for (std::size_t v = 0; v < n_vars; ++v) {
                out[v] = ((*sums)[v] / dn) / se[v];
            }
        };
    };
    auto dists = run_draws(plan, n_vars, cfg.tail, cfg.correction == CorrectionMethod::Max,
                           cfg.n_threads, factory);
    assemble(res, plan, ok, dist_stats, std::move(dists), inference::CiFamily::Scaled,
             cfg.correction);
    return res;
}

// ---------------------------------------------------------------------------
// Two-sample t-test (partition scheme)
// ---------------------------------------------------------------------------

namespace {

struct GroupMoments {
    double mean, var;
};

GroupMoments moments_from_sums(double sum, double ssq, double n) {
    const double mean = sum / n;
    const double var = (ssq - sum * sum / n) / (n - 1.0);
    return {mean, var};
}

}  // namespace

PermutationResult permuttest2(const DataMatrix& x, const DataMatrix& y, TestConfig cfg) {
    PermutationResult res;
    res.family = "ttest2";
    cfg = validate_config(cfg, &res.warnings);
    res.config = cfg;
    x.require_finite();
    y.require_finite();
    if (x.n_vars() != y.n_vars()) {
        throw Error(ErrorCode::ShapeMismatch, "x and y must have the same number of variables");
    }
    const std::size_t nx = x.n_obs();
    const std::size_t ny = y.n_obs();
    const std::size_t n_vars = x.n_vars();
    if (nx < 2 || ny < 2) throw Error(ErrorCode::DimensionTooSmall, "two-sample t requires nx, ny >= 2");
    if (nx != ny && cfg.var_assumption == VarAssumption::Equal) {
        res.warnings.push_back(
            "unequal_sample_size: permutation t-tests are robust to variance differences "
            "only for equal-size samples; consider var_assumption=unequal");
    }

    const std::size_t n = nx + ny;
    const double dnx = static_cast<double>(nx);
    const double dny = static_cast<double>(ny);

    // Pool and center by the per-variable grand mean (t is shift-invariant;
    // centering conditions the one-pass variance used in the hot loop).
    DataMatrix pooled(n, n_vars);
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t v = 0; v < n_vars; ++v) pooled.at(i, v) = x.at(i, v);
    }
    for (std::size_t i = 0; i < ny; ++i) {
        for (std::size_t v = 0; v < n_vars; ++v) pooled.at(nx + i, v) = y.at(i, v);
    }
    for (std::size_t v = 0; v < n_vars; ++v) {
        double grand = 0.0;
        for (std::size_t i = 0; i < n; ++i) grand += pooled.at(i, v);
        grand /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) pooled.at(i, v) -= grand;
    }

    const bool welch = cfg.var_assumption == VarAssumption::Unequal;
    const auto t_from_groups = [&](double sx, double qx, double sy, double qy) {
        const double num = sx / dnx - sy / dny;
        double se2;
        if (welch) {
            const double vx = (qx - sx * sx / dnx) / (dnx - 1.0);
            const double vy = (qy - sy * sy / dny) / (dny - 1.0);
            se2 = vx / dnx + vy / dny;
        } else {
            const double sp2 = ((qx - sx * sx / dnx) + (qy - sy * sy / dny)) / (dnx + dny - 2.0);
            se2 = sp2 * (1.0 / dnx + 1.0 / dny);
        }
        return guarded_ratio(num, se2 > 0.0 ? std::sqrt(se2) : 0.0);
    };

    // Observed pass through the identity partition.
    std::vector<std::uint32_t> identity(n);
    std::iota(identity.begin(), identity.end(), 0u);
    std::vector<double> sx(n_vars), qx(n_vars), sy(n_vars), qy(n_vars);
    simd::kernels().select_sum_ssq(pooled.data(), n_vars, n_vars, identity.data(), nx, sx.data(),
                                   qx.data());
    simd::kernels().select_sum_ssq(pooled.data(), n_vars, n_vars, identity.data() + nx, ny,
                                   sy.data(), qy.data());

    res.variables.resize(n_vars);
    std::vector<std::size_t> ok;
    std::vector<double> dist_stats;
    for (std::size_t v = 0; v < n_vars; ++v) {
        VariableResult& var = res.variables[v];
        var.summaries.push_back(kernels::summary(x.column(v)));
        var.summaries.push_back(kernels::summary(y.column(v)));
        const auto gx = moments_from_sums(sx[v], qx[v], dnx);
        const auto gy = moments_from_sums(sy[v], qy[v], dny);
        double se2, df;
        if (welch) {
            const double wx = gx.var / dnx;
            const double wy = gy.var / dny;
            se2 = wx + wy;
            const double denom = wx * wx / (dnx - 1.0) + wy * wy / (dny - 1.0);
            df = denom > 0.0 ? se2 * se2 / denom : kNaN;
        } else {
            const double sp2 =
                ((dnx - 1.0) * gx.var + (dny - 1.0) * gy.var) / (dnx + dny - 2.0);
            se2 = sp2 * (1.0 / dnx + 1.0 / dny);
            df = dnx + dny - 2.0;
        }
        if (!(se2 > 0.0)) {
            mark_failed(var, "zero_variance");
            continue;
        }
        var.estimate = var.summaries[0].mean - var.summaries[1].mean;
        var.se = std::sqrt(se2);
        var.statistic = (gx.mean - gy.mean) / var.se;
        var.df = df;
        var.df2 = kNaN;
        ok.push_back(v);
        dist_stats.push_back(var.statistic);
    }

    const auto plan =
        resample::ResamplePlan::partitions(nx, ny, cfg.n_perm, cfg.seed, cfg.exact_threshold);
    const auto factory = [&]() -> RowFn {
        auto perm = std::make_shared<std::vector<std::uint32_t>>(n);
        auto bufs = std::make_shared<std::vector<double>>(4 * n_vars);
        return [&, perm, bufs](std::uint64_t i, double* out) {
            plan.draw_permutation(i, perm->data());
            double* psx = bufs->data();
            double* pqx = psx + n_vars;
            double* psy = pqx + n_vars;
            double* pqy = psy + n_vars;
            simd::kernels().select_sum_ssq(pooled.data(), n_vars, n_vars, perm->data(), nx, psx,
                                           pqx);
            simd::kernels().select_sum_ssq(pooled.data(), n_vars, n_vars, perm->data() + nx, ny,
                                           psy, pqy);
            for (std::size_t k = 0; k < ok.size(); ++k) {
                const std::size_t v = ok[k];
                out[k] = t_from_groups(psx[v], pqx[v], psy[v], pqy[v]);
            }
        };
    };
    auto dists = run_draws(plan, ok.size(), cfg.tail, cfg.correction == CorrectionMethod::Max,
                           cfg.n_threads, factory);
    assemble(res, plan, ok, dist_stats, std::move(dists), inference::CiFamily::Scaled,
             cfg.correction);
    return res;
}

// ---------------------------------------------------------------------------
// Two-sample variance test (partition scheme on group-centered data)
// ---------------------------------------------------------------------------

namespace {

// Two-tailed extremeness of a variance ratio, computed symmetrically as
// larger/smaller so mirrored partitions tie bit-exactly.
double ratio_extreme(double vx, double vy) {
    if (vx == 0.0 && vy == 0.0) return 1.0;
    if (vx == 0.0 || vy == 0.0) return kInf;
    return vx >= vy ? vx / vy : vy / vx;
}

double ratio_raw(double vx, double vy) {
    if (vy == 0.0) return vx == 0.0 ? 1.0 : kInf;
    return vx / vy;
}

}  // namespace

PermutationResult permuvartest2(const DataMatrix& x, const DataMatrix& y, TestConfig cfg) {
    PermutationResult res;
    res.family = "vartest2";
    cfg = validate_config(cfg, &res.warnings);
    res.config = cfg;
    x.require_finite();
    y.require_finite();
    if (x.n_vars() != y.n_vars()) {
        throw Error(ErrorCode::ShapeMismatch, "x and y must have the same number of variables");
    }
    const std::size_t nx = x.n_obs();
    const std::size_t ny = y.n_obs();
    const std::size_t n_vars = x.n_vars();
    if (nx < 2 || ny < 2) throw Error(ErrorCode::DimensionTooSmall, "variance test requires nx, ny >= 2");
    const std::size_t n = nx + ny;
    const double dnx = static_cast<double>(nx);
    const double dny = static_cast<double>(ny);
    const bool two_tailed = cfg.tail == Tail::TwoTailed;

    // Pool the observations centered by their own group mean.
    DataMatrix pooled(n, n_vars);
    for (std::size_t v = 0; v < n_vars; ++v) {
        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < nx; ++i) mx += x.at(i, v);
        for (std::size_t i = 0; i < ny; ++i) my += y.at(i, v);
        mx /= dnx;
        my /= dny;
        for (std::size_t i = 0; i < nx; ++i) pooled.at(i, v) = x.at(i, v) - mx;
        for (std::size_t i = 0; i < ny; ++i) pooled.at(nx + i, v) = y.at(i, v) - my;
    }

    const auto var_from_sums = [](double sum, double ssq, double n_obs) {
        // Tiny negative results are rounding artifacts of the one-pass form.
        return std::max(0.0, (ssq - sum * sum / n_obs) / (n_obs - 1.0));
    };

    std::vector<std::uint32_t> identity(n);
    std::iota(identity.begin(), identity.end(), 0u);
    std::vector<double> sx(n_vars), qx(n_vars), sy(n_vars), qy(n_vars);
    simd::kernels().select_sum_ssq(pooled.data(), n_vars, n_vars, identity.data(), nx, sx.data(),
                                   qx.data());
    simd::kernels().select_sum_ssq(pooled.data(), n_vars, n_vars, identity.data() + nx, ny,
                                   sy.data(), qy.data());

    res.variables.resize(n_vars);
    std::vector<std::size_t> ok;
    std::vector<double> dist_stats;
    for (std::size_t v = 0; v < n_vars; ++v) {
        VariableResult& var = res.variables[v];
        var.summaries.push_back(kernels::summary(x.column(v)));
        var.summaries.push_back(kernels::summary(y.column(v)));
        const double vx = var_from_sums(sx[v], qx[v], dnx);
        const double vy = var_from_sums(sy[v], qy[v], dny);
        if (!(vy > 0.0) || !(vx > 0.0)) {
            mark_failed(var, "zero_variance");
            continue;
        }
        var.statistic = vx / vy;
        var.estimate = var.statistic;
        var.df = dnx - 1.0;
        var.df2 = dny - 1.0;
        var.se = kNaN;
        ok.push_back(v);
        dist_stats.push_back(two_tailed ? ratio_extreme(vx, vy) : var.statistic);
    }

    const auto plan =
        resample::ResamplePlan::partitions(nx, ny, cfg.n_perm, cfg.seed, cfg.exact_threshold);
    const auto factory = [&]() -> RowFn {
        auto perm = std::make_shared<std::vector<std::uint32_t>>(n);
        auto bufs = std::make_shared<std::vector<double>>(4 * n_vars);
        return [&, perm, bufs](std::uint64_t i, double* out) {
            plan.draw_permutation(i, perm->data());
            double* psx = bufs->data();
            double* pqx = psx + n_vars;
            double* psy = pqx + n_vars;
            double* pqy = psy + n_vars;
            simd::kernels().select_sum_ssq(pooled.data(), n_vars, n_vars, perm->data(), nx, psx,
                                           pqx);
            simd::kernels().select_sum_ssq(pooled.data(), n_vars, n_vars, perm->data() + nx, ny,
                                           psy, pqy);
            for (std::size_t k = 0; k < ok.size(); ++k) {
                const std::size_t v = ok[k];
                const double vx = var_from_sums(psx[v], pqx[v], dnx);
                const double vy = var_from_sums(psy[v], pqy[v], dny);
                out[k] = two_tailed ? ratio_extreme(vx, vy) : ratio_raw(vx, vy);
            }
        };
    };
    auto dists = run_draws(plan, ok.size(), cfg.tail, cfg.correction == CorrectionMethod::Max,
                           cfg.n_threads, factory);
    assemble(res, plan, ok, dist_stats, std::move(dists), inference::CiFamily::Ratio,
             cfg.correction);
    return res;
}

// ---------------------------------------------------------------------------
// Correlation test (row permutation of the second member)
// ---------------------------------------------------------------------------

namespace {

// Column-wise transform for the chosen correlation kind, then center each
// column. Rank/rankit transforms commute with row permutation, so permuting
// transformed rows equals transforming permuted data.
DataMatrix transform_centered(const DataMatrix& m, kernels::CorrelationKind kind) {
    DataMatrix out(m.n_obs(), m.n_vars());
    const std::size_t n = m.n_obs();
    for (std::size_t v = 0; v < m.n_vars(); ++v) {
        std::vector<double> col = m.column(v);
        if (kind == kernels::CorrelationKind::Spearman) {
            col = kernels::rank_transform(col);
        } else if (kind == kernels::CorrelationKind::Rankit) {
            const auto ranks = kernels::rank_transform(col);
            for (std::size_t i = 0; i < n; ++i) {
                col[i] = special::norm_inv((ranks[i] - 0.5) / static_cast<double>(n));
            }
        }
        double mean = 0.0;
        for (double c : col) mean += c;
        mean /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) out.at(i, v) = col[i] - mean;
    }
    return out;
}

std::vector<double> column_ssq(const DataMatrix& m) {
    std::vector<double> out(m.n_vars(), 0.0);
    for (std::size_t i = 0; i < m.n_obs(); ++i) {
        for (std::size_t v = 0; v < m.n_vars(); ++v) {
            out[v] += m.at(i, v) * m.at(i, v);
        }
    }
    return out;
}

}  // namespace

PermutationResult permucorr(const DataMatrix& x, const DataMatrix* y,
                            kernels::CorrelationKind kind, TestConfig cfg) {
    PermutationResult res;
    res.family = std::string("corr_") + kernels::correlation_kind_name(kind);
    cfg = validate_config(cfg, &res.warnings);
    res.config = cfg;
    x.require_finite();
    const std::size_t n = x.n_obs();
    if (n < 3) throw Error(ErrorCode::DimensionTooSmall, "correlation requires n >= 3");
    if (y) {
        y->require_finite();
        if (y->n_obs() != n || y->n_vars() != x.n_vars()) {
            throw Error(ErrorCode::ShapeMismatch, "correlation requires x and y of equal shape");
        }
    } else if (x.n_vars() < 2) {
        throw Error(ErrorCode::DimensionTooSmall, "correlation-matrix mode requires >= 2 variables");
    }
    const double dn = static_cast<double>(n);

    const DataMatrix xt = transform_centered(x, kind);
    const auto sxx = column_ssq(xt);
    const std::size_t k_vars = x.n_vars();

    const auto plan = resample::ResamplePlan::rowperms(n, cfg.n_perm, cfg.seed, cfg.exact_threshold);

    std::vector<std::size_t> ok;
    std::vector<double> dist_stats;

    if (y) {
        const DataMatrix yt = transform_centered(*y, kind);
        const auto syy = column_ssq(yt);

        std::vector<std::uint32_t> identity(n);
        std::iota(identity.begin(), identity.end(), 0u);
        std::vector<double> dots(k_vars);
        simd::kernels().coldot_perm(xt.data(), yt.data(), k_vars, k_vars, n, identity.data(),
                                    dots.data());

        res.variables.resize(k_vars);
        for (std::size_t v = 0; v < k_vars; ++v) {
            VariableResult& var = res.variables[v];
            var.summaries.push_back(kernels::summary(x.column(v)));
            var.summaries.push_back(kernels::summary(y->column(v)));
            if (!(sxx[v] > 0.0) || !(syy[v] > 0.0)) {
                mark_failed(var, "zero_variance");
                continue;
            }
            var.statistic = dots[v] / std::sqrt(sxx[v] * syy[v]);
            var.estimate = var.statistic;
            var.df = dn - 2.0;
            var.df2 = kNaN;
            var.se = kNaN;
            ok.push_back(v);
            dist_stats.push_back(var.statistic);
        }

        const auto factory = [&, ytp = &yt, sxxp = &sxx, syyp = &syy]() -> RowFn {
            auto perm = std::make_shared<std::vector<std::uint32_t>>(n);
            auto dots_buf = std::make_shared<std::vector<double>>(k_vars);
            return [&, ytp, sxxp, syyp, perm, dots_buf](std::uint64_t i, double* out) {
                plan.draw_permutation(i, perm->data());
                simd::kernels().coldot_perm(xt.data(), ytp->data(), k_vars, k_vars, n,
                                            perm->data(), dots_buf->data());
                for (std::size_t k = 0; k < ok.size(); ++k) {
                    const std::size_t v = ok[k];
                    out[k] = (*dots_buf)[v] / std::sqrt((*sxxp)[v] * (*syyp)[v]);
                }
            };
        };
        auto dists = run_draws(plan, ok.size(), cfg.tail, cfg.correction == CorrectionMethod::Max,
                               cfg.n_threads, factory);
        assemble(res, plan, ok, dist_stats, std::move(dists), inference::CiFamily::Shift,
             cfg.correction);
        return res;
    }

    // Matrix mode: every unordered pair (a, b), a < b; permute the rows of
    // the second member b.
    struct Pair {
        std::size_t a, b;
    };
    std::vector<Pair> pairs;
    for (std::size_t a = 0; a + 1 < k_vars; ++a) {
        for (std::size_t b = a + 1; b < k_vars; ++b) pairs.push_back({a, b});
    }

    // Transposed copy: row a holds column a contiguously (kernel weights).
    std::vector<double> xtT(k_vars * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t v = 0; v < k_vars; ++v) xtT[v * n + i] = xt.at(i, v);
    }

    res.variables.resize(pairs.size());
    std::vector<std::size_t> pair_slot(pairs.size());  // slot within dots buffer
    std::vector<std::uint32_t> identity(n);
    std::iota(identity.begin(), identity.end(), 0u);
    std::vector<double> dots(k_vars);
    {
        std::size_t p = 0;
        for (std::size_t a = 0; a + 1 < k_vars; ++a) {
            simd::kernels().weighted_rowsum(xt.data() + a + 1, k_vars, k_vars - a - 1,
                                            xtT.data() + a * n, n, identity.data(), dots.data());
            for (std::size_t b = a + 1; b < k_vars; ++b, ++p) {
                VariableResult& var = res.variables[p];
                var.var_a = static_cast<int>(a);
                var.var_b = static_cast<int>(b);
                var.summaries.push_back(kernels::summary(x.column(a)));
                var.summaries.push_back(kernels::summary(x.column(b)));
                pair_slot[p] = b - a - 1;
                if (!(sxx[a] > 0.0) || !(sxx[b] > 0.0)) {
                    mark_failed(var, "zero_variance");
                    continue;
                }
                var.statistic = dots[b - a - 1] / std::sqrt(sxx[a] * sxx[b]);
                var.estimate = var.statistic;
                var.df = dn - 2.0;
                var.df2 = kNaN;
                var.se = kNaN;
                ok.push_back(p);
                dist_stats.push_back(var.statistic);
            }
        }
    }

    const auto factory = [&, xtTp = &xtT, sxxp = &sxx, pairsp = &pairs]() -> RowFn {
        auto perm = std::make_shared<std::vector<std::uint32_t>>(n);
        auto r_all = std::make_shared<std::vector<double>>(pairsp->size());
        auto dots_buf = std::make_shared<std::vector<double>>(k_vars);
        return [&, xtTp, sxxp, pairsp, perm, r_all, dots_buf](std::uint64_t i, double* out) {
            plan.draw_permutation(i, perm->data());
            std::size_t p = 0;
            for (std::size_t a = 0; a + 1 < k_vars; ++a) {
                simd::kernels().weighted_rowsum(xt.data() + a + 1, k_vars, k_vars - a - 1,
                                                xtTp->data() + a * n, n, perm->data(),
                                                dots_buf->data());
                for (std::size_t b = a + 1; b < k_vars; ++b, ++p) {
                    (*r_all)[p] = (*dots_buf)[b - a - 1] / std::sqrt((*sxxp)[a] * (*sxxp)[b]);
                }
            }
            for (std::size_t k = 0; k < ok.size(); ++k) out[k] = (*r_all)[ok[k]];
        };
    };
    auto dists = run_draws(plan, ok.size(), cfg.tail, cfg.correction == CorrectionMethod::Max,
                           cfg.n_threads, factory);
    assemble(res, plan, ok, dist_stats, std::move(dists), inference::CiFamily::Shift,
             cfg.correction);
    return res;
}

// ---------------------------------------------------------------------------
// One-way ANOVA (label shuffle)
// ---------------------------------------------------------------------------

namespace {

struct GroupedValues {
    std::vector<double> values;             // grand-centered, grouped contiguously
    std::vector<std::size_t> offsets;       // group g occupies [offsets[g], offsets[g+1])
    std::vector<std::vector<double>> raw_groups;  // original values per group
    double ssq_total = 0.0;
};

GroupedValues group_values(const std::vector<double>& values, const std::vector<int>& labels,
                           std::size_t min_group) {
    if (values.size() != labels.size()) {
        throw Error(ErrorCode::ShapeMismatch, "values and labels differ in length");
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, "non-finite observation");
    }
    std::vector<int> distinct = labels;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < 2) {
        throw Error(ErrorCode::DimensionTooSmall, "at least two groups required");
    }
    GroupedValues out;
    out.raw_groups.resize(distinct.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto it = std::lower_bound(distinct.begin(), distinct.end(), labels[i]);
        out.raw_groups[static_cast<std::size_t>(it - distinct.begin())].push_back(values[i]);
    }
    out.offsets.push_back(0);
    for (const auto& g : out.raw_groups) {
        if (g.size() < min_group) {
            throw Error(ErrorCode::DimensionTooSmall, "each group requires >= 2 observations");
        }
        out.offsets.push_back(out.offsets.back() + g.size());
    }
    double grand = 0.0;
    for (const auto& g : out.raw_groups) {
        for (double v : g) grand += v;
    }
    grand /= static_cast<double>(values.size());
    for (const auto& g : out.raw_groups) {
        for (double v : g) {
            const double c = v - grand;
            out.values.push_back(c);
            out.ssq_total += c * c;
        }
    }
    return out;
}

}  // namespace

PermutationResult permuanova1(const std::vector<double>& values,
                              const std::vector<int>& group_labels, TestConfig cfg) {
    PermutationResult res;
    res.family = "anova1";
    cfg = validate_config(cfg, &res.warnings);
    res.config = cfg;
    if (cfg.tail != Tail::Right) {
        throw Error(ErrorCode::TailUnsupported, "ANOVA p-values are right-tailed only");
    }
    GroupedValues g = group_values(values, group_labels, 2);
    const std::size_t k = g.raw_groups.size();
    const std::size_t n = g.values.size();
    const double df1 = static_cast<double>(k) - 1.0;
    const double df2 = static_cast<double>(n - k);

    std::vector<std::size_t> sizes(k);
    for (std::size_t i = 0; i < k; ++i) sizes[i] = g.raw_groups[i].size();

    // One-pass F from grouped sums; values are grand-centered so the total
    // correction term is numerically benign. Group terms are reduced in
    // sorted (size, sum) order so arrangements that merely relabel
    // equal-sized groups produce bit-identical F values (they are exact
    // mathematical ties and must count as such).
    const auto f_from_perm = [&](const std::uint32_t* perm,
                                 std::vector<std::pair<double, double>>& terms) {
        terms.clear();
        for (std::size_t gi = 0; gi < k; ++gi) {
            double s = 0.0, q = 0.0;
            simd::kernels().select_sum_ssq(g.values.data(), 1, 1, perm + g.offsets[gi],
                                           sizes[gi], &s, &q);
            (void)q;
            terms.emplace_back(static_cast<double>(sizes[gi]), s);
        }
        std::sort(terms.begin(), terms.end());
        double total = 0.0;
        double between = 0.0;
        for (const auto& [gn, s] : terms) {
            total += s;
            between += s * s / gn;
        }
        const double correction = total * total / static_cast<double>(n);
        const double ss_between = between - correction;
        const double ss_within = g.ssq_total - between;
        const double ms_within = ss_within / df2;
        const double ms_between = ss_between / df1;
        if (!(ms_within > 0.0)) {
            return ms_between > 0.0 ? kInf : 0.0;
        }
        return ms_between / ms_within;
    };

    if (g.ssq_total == 0.0) throw Error(ErrorCode::ZeroVariance, "all observations identical");
    std::vector<std::uint32_t> identity(n);
    std::iota(identity.begin(), identity.end(), 0u);
    std::vector<std::pair<double, double>> obs_terms;
    const double f_obs = f_from_perm(identity.data(), obs_terms);
    if (!std::isfinite(f_obs)) {
        throw Error(ErrorCode::ZeroVariance, "within-group variance is zero");
    }

    res.variables.resize(1);
    VariableResult& var = res.variables[0];
    for (const auto& grp : g.raw_groups) var.summaries.push_back(kernels::summary(grp));
    var.statistic = f_obs;
    var.estimate = f_obs;
    var.df = df1;
    var.df2 = df2;
    var.se = kNaN;

    const auto plan =
        resample::ResamplePlan::labelperms(sizes, cfg.n_perm, cfg.seed, cfg.exact_threshold);
    const auto factory = [&]() -> RowFn {
        auto perm = std::make_shared<std::vector<std::uint32_t>>(n);
        auto terms = std::make_shared<std::vector<std::pair<double, double>>>();
        return [&, perm, terms](std::uint64_t i, double* out) {
            plan.draw_permutation(i, perm->data());
            out[0] = f_from_perm(perm->data(), *terms);
        };
    };
    auto dists = run_draws(plan, 1, cfg.tail, cfg.correction == CorrectionMethod::Max,
                           cfg.n_threads, factory);
    assemble(res, plan, {0}, {f_obs}, std::move(dists), inference::CiFamily::Ratio,
             cfg.correction);
    return res;
}

// ---------------------------------------------------------------------------
// Balanced two-way ANOVA (unrestricted observation shuffle)
// ---------------------------------------------------------------------------

TwoWayAnovaResult permuanova2(const std::vector<double>& values, const std::vector<int>& a_labels,
                              const std::vector<int>& b_labels, TestConfig cfg) {
    std::vector<std::string> cfg_warnings;
    cfg = validate_config(cfg, &cfg_warnings);
    if (cfg.tail != Tail::Right) {
        throw Error(ErrorCode::TailUnsupported, "ANOVA p-values are right-tailed only");
    }
    if (values.size() != a_labels.size() || values.size() != b_labels.size()) {
        throw Error(ErrorCode::ShapeMismatch, "values and factor labels differ in length");
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, "non-finite observation");
    }

    std::vector<int> levels_a = a_labels;
    std::sort(levels_a.begin(), levels_a.end());
    levels_a.erase(std::unique(levels_a.begin(), levels_a.end()), levels_a.end());
    std::vector<int> levels_b = b_labels;
    std::sort(levels_b.begin(), levels_b.end());
    levels_b.erase(std::unique(levels_b.begin(), levels_b.end()), levels_b.end());
    const std::size_t a = levels_a.size();
    const std::size_t b = levels_b.size();
    if (a < 2 || b < 2) {
        throw Error(ErrorCode::DimensionTooSmall, "two-way ANOVA requires >= 2 levels per factor");
    }

    // Bucket observations into cells (A-major order) and check balance.
    std::vector<std::vector<double>> cells(a * b);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const std::size_t ia = static_cast<std::size_t>(
            std::lower_bound(levels_a.begin(), levels_a.end(), a_labels[i]) - levels_a.begin());
        const std::size_t ib = static_cast<std::size_t>(
            std::lower_bound(levels_b.begin(), levels_b.end(), b_labels[i]) - levels_b.begin());
        cells[ia * b + ib].push_back(values[i]);
    }
    const std::size_t r = cells.front().size();
    for (const auto& cell : cells) {
        if (cell.size() != r) {
            throw Error(ErrorCode::Unbalanced, "cells differ in replicate count");
        }
    }
    if (r < 2) throw Error(ErrorCode::DimensionTooSmall, "two-way ANOVA requires r >= 2 replicates");

    const std::size_t n = a * b * r;
    const double dn = static_cast<double>(n);
    double grand = 0.0;
    for (const auto& cell : cells) {
        for (double v : cell) grand += v;
    }
    grand /= dn;
    std::vector<double> flat;  // grand-centered, cell-major
    flat.reserve(n);
    double ssq_total = 0.0;
    for (const auto& cell : cells) {
        for (double v : cell) {
            const double c = v - grand;
            flat.push_back(c);
            ssq_total += c * c;
        }
    }

    const double df_a = static_cast<double>(a) - 1.0;
    const double df_b = static_cast<double>(b) - 1.0;
    const double df_ab = df_a * df_b;
    const double df_err = static_cast<double>(a * b * (r - 1));
    const double dr = static_cast<double>(r);

    struct FTriple {
        double fa, fb, fab;
    };
    // All reductions over cells/levels run in sorted order so arrangements
    // that merely relabel factor levels (exact mathematical ties) produce
    // bit-identical F values.
    const auto sorted_sum = [](std::vector<double>& v) {
        std::sort(v.begin(), v.end());
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    };
    const auto sorted_sumsq = [](std::vector<double>& v, double scale) {
        std::sort(v.begin(), v.end());
        double s = 0.0;
        for (double x : v) s += x * x / scale;
        return s;
    };
    const auto f_from_perm = [&](const std::uint32_t* perm) -> FTriple {
        std::vector<double> cell_sum(a * b, 0.0);
        for (std::size_t c = 0; c < a * b; ++c) {
            double s = 0.0, q = 0.0;
            simd::kernels().select_sum_ssq(flat.data(), 1, 1, perm + c * r, r, &s, &q);
            cell_sum[c] = s;
            (void)q;
        }
        std::vector<double> scratch = cell_sum;
        const double total = sorted_sum(scratch);
        scratch = cell_sum;
        const double ss_cells_num = sorted_sumsq(scratch, dr);
        const double correction = total * total / dn;

        std::vector<double> row_sums(a), col_sums(b), inner;
        for (std::size_t ia = 0; ia < a; ++ia) {
            inner.assign(cell_sum.begin() + static_cast<std::ptrdiff_t>(ia * b),
                         cell_sum.begin() + static_cast<std::ptrdiff_t>((ia + 1) * b));
            row_sums[ia] = sorted_sum(inner);
        }
        for (std::size_t ib = 0; ib < b; ++ib) {
            inner.clear();
            for (std::size_t ia = 0; ia < a; ++ia) inner.push_back(cell_sum[ia * b + ib]);
            col_sums[ib] = sorted_sum(inner);
        }
        const double ss_a = sorted_sumsq(row_sums, static_cast<double>(b) * dr) - correction;
        const double ss_b = sorted_sumsq(col_sums, static_cast<double>(a) * dr) - correction;
        const double ss_cells = ss_cells_num - correction;
        const double ss_ab = ss_cells - ss_a - ss_b;
        const double ss_err = ssq_total - ss_cells_num;
        const double ms_err = ss_err / df_err;
        const auto f_of = [&](double ss, double df) {
            const double ms = ss / df;
            if (!(ms_err > 0.0)) return ms > 0.0 ? kInf : 0.0;
            return ms / ms_err;
        };
        return {f_of(ss_a, df_a), f_of(ss_b, df_b), f_of(ss_ab, df_ab)};
    };

    if (ssq_total == 0.0) throw Error(ErrorCode::ZeroVariance, "all observations identical");
    std::vector<std::uint32_t> identity(n);
    std::iota(identity.begin(), identity.end(), 0u);
    const FTriple f_obs = f_from_perm(identity.data());
    if (!std::isfinite(f_obs.fa) || !std::isfinite(f_obs.fb) || !std::isfinite(f_obs.fab)) {
        throw Error(ErrorCode::ZeroVariance, "error mean square is zero");
    }

    const std::vector<std::size_t> sizes(a * b, r);
    const auto plan =
        resample::ResamplePlan::labelperms(sizes, cfg.n_perm, cfg.seed, cfg.exact_threshold);

    // One engine pass computes all three statistics per shared rearrangement.
    const auto factory = [&]() -> RowFn {
        auto perm = std::make_shared<std::vector<std::uint32_t>>(n);
        return [&, perm](std::uint64_t i, double* out) {
            plan.draw_permutation(i, perm->data());
            const FTriple f = f_from_perm(perm->data());
            out[0] = f.fa;
            out[1] = f.fb;
            out[2] = f.fab;
        };
    };
    auto dists = run_draws(plan, 3, cfg.tail, /*use_max=*/false, cfg.n_threads, factory);

    TwoWayAnovaResult out;
    const char* names[3] = {"anova2_a", "anova2_b", "anova2_interaction"};
    const double fs[3] = {f_obs.fa, f_obs.fb, f_obs.fab};
    const double dfs[3] = {df_a, df_b, df_ab};
    PermutationResult* slots[3] = {&out.factor_a, &out.factor_b, &out.interaction};
    for (int e = 0; e < 3; ++e) {
        PermutationResult& res = *slots[e];
        res.family = names[e];
        res.config = cfg;
        res.warnings = cfg_warnings;
        res.variables.resize(1);
        VariableResult& var = res.variables[0];
        for (const auto& cell : cells) var.summaries.push_back(kernels::summary(cell));
        var.statistic = fs[e];
        var.estimate = fs[e];
        var.df = dfs[e];
        var.df2 = df_err;
        var.se = kNaN;
        EngineDists single;
        single.columns.push_back(std::move(dists.columns[static_cast<std::size_t>(e)]));
        assemble(res, plan, {0}, {fs[e]}, std::move(single), inference::CiFamily::Ratio,
                 CorrectionMethod::None);
    }
    return out;
}

}  // namespace permstat
