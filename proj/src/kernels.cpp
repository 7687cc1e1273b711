#include "permstat/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "permstat/special.hpp"

namespace permstat::kernels {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_of(std::span<const double> sample) {
    double s = 0.0;
    for (double v : sample) s += v;
    return s / static_cast<double>(sample.size());
}

// Two-pass sample variance (n-1 denominator).
double variance_of(std::span<const double> sample, double mean) {
    if (sample.size() < 2) return 0.0;
    double ss = 0.0;
    for (double v : sample) {
        const double d = v - mean;
        ss += d * d;
    }
    return ss / static_cast<double>(sample.size() - 1);
}

}  // namespace

const char* correlation_kind_name(CorrelationKind kind) noexcept {
    switch (kind) {
        case CorrelationKind::Pearson: return "pearson";
        case CorrelationKind::Spearman: return "spearman";
        case CorrelationKind::Rankit: return "rankit";
    }
    return "pearson";
}

SampleSummary summary(std::span<const double> sample) {
    SampleSummary out;
    out.n = sample.size();
    if (sample.empty()) return out;
    out.mean = mean_of(sample);
    out.sd = std::sqrt(variance_of(sample, out.mean));
    return out;
}

StatValue t_one_sample(std::span<const double> x, double mu) {
    if (x.size() < 2) throw Error(ErrorCode::DimensionTooSmall, "one-sample t requires n >= 2");
    const double n = static_cast<double>(x.size());
    const double m = mean_of(x);
    const double sd = std::sqrt(variance_of(x, m));
    const double se = sd / std::sqrt(n);
    if (se == 0.0) throw Error(ErrorCode::ZeroVariance, "sample has zero variance");
    StatValue out;
    out.estimate = m - mu;
    out.se = se;
    out.statistic = out.estimate / se;
    out.df = n - 1.0;
    out.df2 = kNaN;
    return out;
}

StatValue t_two_sample(std::span<const double> x, std::span<const double> y, VarAssumption va) {
    if (x.size() < 2 || y.size() < 2) {
        throw Error(ErrorCode::DimensionTooSmall, "two-sample t requires nx, ny >= 2");
    }
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    const double mx = mean_of(x);
    const double my = mean_of(y);
    const double vx = variance_of(x, mx);
    const double vy = variance_of(y, my);
    StatValue out;
    out.estimate = mx - my;
    out.df2 = kNaN;
    if (va == VarAssumption::Equal) {
        const double sp2 = ((nx - 1.0) * vx + (ny - 1.0) * vy) / (nx + ny - 2.0);
        out.se = std::sqrt(sp2 * (1.0 / nx + 1.0 / ny));
        out.df = nx + ny - 2.0;
    } else {
        const double wx = vx / nx;
        const double wy = vy / ny;
        out.se = std::sqrt(wx + wy);
        const double denom = wx * wx / (nx - 1.0) + wy * wy / (ny - 1.0);
        out.df = denom > 0.0 ? (wx + wy) * (wx + wy) / denom : kNaN;
    }
    if (out.se == 0.0) throw Error(ErrorCode::ZeroVariance, "pooled standard error is zero");
    out.statistic = out.estimate / out.se;
    return out;
}

StatValue f_two_sample(std::span<const double> x, std::span<const double> y) {
    if (x.size() < 2 || y.size() < 2) {
        throw Error(ErrorCode::DimensionTooSmall, "two-sample F requires nx, ny >= 2");
    }
    const double vx = variance_of(x, mean_of(x));
    const double vy = variance_of(y, mean_of(y));
    if (vy == 0.0) throw Error(ErrorCode::ZeroVariance, "denominator sample has zero variance");
    StatValue out;
    out.statistic = vx / vy;
    out.estimate = out.statistic;
    out.df = static_cast<double>(x.size()) - 1.0;
    out.df2 = static_cast<double>(y.size()) - 1.0;
    out.se = kNaN;
    return out;
}

StatValue z_one_sample(std::span<const double> x, double mu, double sigma) {
    if (x.empty()) throw Error(ErrorCode::DimensionTooSmall, "z test requires n >= 1");
    if (!(sigma > 0.0)) throw Error(ErrorCode::SigmaNonPositive, "sigma must be positive");
    const double n = static_cast<double>(x.size());
    StatValue out;
    out.estimate = mean_of(x) - mu;
    out.se = sigma / std::sqrt(n);
    out.statistic = out.estimate / out.se;
    out.df = kNaN;
    out.df2 = kNaN;
    return out;
}

std::vector<double> rank_transform(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = midrank;
        i = j + 1;
    }
    return ranks;
}

std::vector<double> rankit_scores(std::size_t n) {
    std::vector<double> scores(n);
    for (std::size_t i = 0; i < n; ++i) {
        scores[i] = special::norm_inv((static_cast<double>(i + 1) - 0.5) / static_cast<double>(n));
    }
    return scores;
}

namespace {

double pearson(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    const double mx = mean_of(x);
    const double my = mean_of(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw Error(ErrorCode::ZeroVariance, "correlation input is constant");
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

StatValue correlation(std::span<const double> x, std::span<const double> y, CorrelationKind kind) {
    if (x.size() != y.size()) throw Error(ErrorCode::ShapeMismatch, "correlation inputs differ in length");
    if (x.size() < 3) throw Error(ErrorCode::DimensionTooSmall, "correlation requires n >= 3");
    StatValue out;
    out.df = static_cast<double>(x.size()) - 2.0;
    out.df2 = kNaN;
    out.se = kNaN;
    double r = 0.0;
    switch (kind) {
        case CorrelationKind::Pearson:
            r = pearson(x, y);
            break;
        case CorrelationKind::Spearman: {
            const auto rx = rank_transform(x);
            const auto ry = rank_transform(y);
            r = pearson(rx, ry);
            break;
        }
        case CorrelationKind::Rankit: {
            // Normal scores applied through the midranks (ties share scores).
            const auto rx = rank_transform(x);
            const auto ry = rank_transform(y);
            const std::size_t n = x.size();
            std::vector<double> zx(n), zy(n);
            for (std::size_t i = 0; i < n; ++i) {
                zx[i] = special::norm_inv((rx[i] - 0.5) / static_cast<double>(n));
                zy[i] = special::norm_inv((ry[i] - 0.5) / static_cast<double>(n));
            }
            r = pearson(zx, zy);
            break;
        }
    }
    out.statistic = r;
    out.estimate = r;
    return out;
}

StatValue anova1_f(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) throw Error(ErrorCode::DimensionTooSmall, "one-way ANOVA requires >= 2 groups");
    std::size_t total_n = 0;
    for (const auto& g : groups) {
        if (g.size() < 2) {
            throw Error(ErrorCode::DimensionTooSmall, "each group requires >= 2 observations");
        }
        total_n += g.size();
    }
    double grand_sum = 0.0;
    for (const auto& g : groups) {
        for (double v : g) grand_sum += v;
    }
    const double grand_mean = grand_sum / static_cast<double>(total_n);
    double ss_between = 0.0, ss_within = 0.0;
    for (const auto& g : groups) {
        const double gm = mean_of(g);
        const double d = gm - grand_mean;
        ss_between += static_cast<double>(g.size()) * d * d;
        for (double v : g) {
            const double w = v - gm;
            ss_within += w * w;
        }
    }
    const double df1 = static_cast<double>(groups.size()) - 1.0;
    const double df2 = static_cast<double>(total_n - groups.size());
    const double ms_within = ss_within / df2;
    if (ms_within == 0.0) throw Error(ErrorCode::ZeroVariance, "within-group variance is zero");
    StatValue out;
    out.statistic = (ss_between / df1) / ms_within;
    out.estimate = out.statistic;
    out.df = df1;
    out.df2 = df2;
    out.se = kNaN;
    return out;
}

Anova2Stats anova2_f(const std::vector<std::vector<std::vector<double>>>& cells) {
    const std::size_t a = cells.size();
    if (a < 2) throw Error(ErrorCode::DimensionTooSmall, "two-way ANOVA requires >= 2 A levels");
    const std::size_t b = cells.front().size();
    if (b < 2) throw Error(ErrorCode::DimensionTooSmall, "two-way ANOVA requires >= 2 B levels");
    std::size_t r = 0;
    for (const auto& row : cells) {
        if (row.size() != b) throw Error(ErrorCode::Unbalanced, "ragged factor-B levels");
        for (const auto& cell : row) {
            if (r == 0) r = cell.size();
            if (cell.size() != r) throw Error(ErrorCode::Unbalanced, "cells differ in replicate count");
        }
    }
    if (r < 2) throw Error(ErrorCode::DimensionTooSmall, "two-way ANOVA requires r >= 2 replicates");

    const double dn = static_cast<double>(a * b * r);
    double grand = 0.0;
    for (const auto& row : cells) {
        for (const auto& cell : row) {
            for (double v : cell) grand += v;
        }
    }
    grand /= dn;

    std::vector<double> mean_a(a, 0.0), mean_b(b, 0.0);
    for (std::size_t i = 0; i < a; ++i) {
        for (std::size_t j = 0; j < b; ++j) {
            for (double v : cells[i][j]) {
                mean_a[i] += v;
                mean_b[j] += v;
            }
        }
        mean_a[i] /= static_cast<double>(b * r);
    }
    for (std::size_t j = 0; j < b; ++j) mean_b[j] /= static_cast<double>(a * r);

    double ss_a = 0.0, ss_b = 0.0, ss_ab = 0.0, ss_err = 0.0;
    for (std::size_t i = 0; i < a; ++i) {
        const double da = mean_a[i] - grand;
        ss_a += static_cast<double>(b * r) * da * da;
    }
    for (std::size_t j = 0; j < b; ++j) {
        const double db = mean_b[j] - grand;
        ss_b += static_cast<double>(a * r) * db * db;
    }
    for (std::size_t i = 0; i < a; ++i) {
        for (std::size_t j = 0; j < b; ++j) {
            const double cm = mean_of(cells[i][j]);
            const double dab = cm - mean_a[i] - mean_b[j] + grand;
            ss_ab += static_cast<double>(r) * dab * dab;
            for (double v : cells[i][j]) {
                const double e = v - cm;
                ss_err += e * e;
            }
        }
    }

    const double df_a = static_cast<double>(a) - 1.0;
    const double df_b = static_cast<double>(b) - 1.0;
    const double df_ab = df_a * df_b;
    const double df_err = static_cast<double>(a * b * (r - 1));
    const double ms_err = ss_err / df_err;
    if (ms_err == 0.0) throw Error(ErrorCode::ZeroVariance, "error mean square is zero");

    Anova2Stats out;
    const auto fill = [&](StatValue& sv, double ss, double df1) {
        sv.statistic = (ss / df1) / ms_err;
        sv.estimate = sv.statistic;
        sv.df = df1;
        sv.df2 = df_err;
        sv.se = kNaN;
    };
    fill(out.factor_a, ss_a, df_a);
    fill(out.factor_b, ss_b, df_b);
    fill(out.interaction, ss_ab, df_ab);
    return out;
}

}  // namespace permstat::kernels
