#include "permstat/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace permstat::inference {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double extreme_value(double value, Tail tail) noexcept {
    switch (tail) {
        case Tail::TwoTailed: return std::fabs(value);
        case Tail::Right: return value;
        case Tail::Left: return -value;
    }
    return std::fabs(value);
}

NullDistribution max_reduce(const std::vector<std::vector<double>>& stat_rows, Tail tail) {
    if (stat_rows.empty() || stat_rows.front().empty()) {
        throw Error(ErrorCode::DimensionTooSmall, "max_reduce requires a non-empty matrix");
    }
    NullDistribution dist;
    dist.tail = tail;
    dist.corrected = true;
    dist.n_vars_joined = stat_rows.front().size();
    dist.values.reserve(stat_rows.size());
    for (const auto& row : stat_rows) {
        double best = row.front();
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
        dist.values.push_back(best);
    }
    return dist;
}

double pvalue(double observed, const NullDistribution& dist) {
    if (dist.values.empty()) {
        throw Error(ErrorCode::DimensionTooSmall, "pvalue requires a non-empty distribution");
    }
    const double threshold = extreme_value(observed, dist.tail);
    std::size_t count = 0;
    for (double v : dist.values) {
        if (extreme_value(v, dist.tail) >= threshold) ++count;
    }
    const double n = static_cast<double>(dist.values.size());
    if (dist.exact) return static_cast<double>(count) / n;
    return (1.0 + static_cast<double>(count)) / (n + 1.0);
}

double percentile_sorted(std::span<const double> sorted, double pct) {
    if (sorted.empty()) {
        throw Error(ErrorCode::DimensionTooSmall, "percentile of an empty sequence");
    }
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double pos = 1.0 + pct / 100.0 * static_cast<double>(n - 1);  // 1-based rank
    const double floor_pos = std::floor(pos);
    std::size_t idx = static_cast<std::size_t>(floor_pos);
    if (idx >= n) return sorted[n - 1];
    if (idx < 1) idx = 1;
    const double frac = pos - static_cast<double>(idx);
    const double lower = sorted[idx - 1];
    if (frac <= 0.0) return lower;
    return lower + frac * (sorted[idx] - lower);
}

double percentile(std::span<const double> values, double pct) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    return percentile_sorted(sorted, pct);
}

std::pair<double, double> ci_from_dist(double estimate, double se, const NullDistribution& dist,
                                       double alpha, CiFamily family) {
    if (dist.values.empty()) {
        throw Error(ErrorCode::DimensionTooSmall, "ci_from_dist requires a distribution");
    }
    if (family == CiFamily::Scaled && !(se > 0.0)) {
        throw Error(ErrorCode::SEUnavailable, "se-scaled CI requested without a standard error");
    }
    // Work in extremeness units; for Left the transform negates, making the
    // critical value the magnitude of the alpha-tail bound.
    std::vector<double> extremes(dist.values.size());
    std::transform(dist.values.begin(), dist.values.end(), extremes.begin(),
                   [&](double v) { return extreme_value(v, dist.tail); });
    std::sort(extremes.begin(), extremes.end());
    const double crit = percentile_sorted(extremes, 100.0 * (1.0 - alpha));

    switch (family) {
        case CiFamily::Scaled:
            switch (dist.tail) {
                case Tail::TwoTailed: return {estimate - crit * se, estimate + crit * se};
                case Tail::Right: return {estimate - crit * se, kInf};
                case Tail::Left: return {-kInf, estimate + crit * se};
            }
            break;
        case CiFamily::Ratio:
            switch (dist.tail) {
                case Tail::TwoTailed: return {estimate / crit, estimate * crit};
                case Tail::Right: return {estimate / crit, kInf};
                // crit is the negated alpha-quantile of the min-reduced null;
                // mirror of the Right rule on the lower ratio tail.
                case Tail::Left: return {0.0, crit != 0.0 ? estimate / -crit : kInf};
            }
            break;
        case CiFamily::Shift: {
            const auto clamp = [](double v) { return std::min(1.0, std::max(-1.0, v)); };
            switch (dist.tail) {
                case Tail::TwoTailed: return {clamp(estimate - crit), clamp(estimate + crit)};
                case Tail::Right: return {clamp(estimate - crit), 1.0};
                case Tail::Left: return {-1.0, clamp(estimate + crit)};
            }
            break;
        }
    }
    return {-kInf, kInf};
}

std::vector<double> adjust_bonferroni(std::span<const double> p, std::size_t m) {
    std::vector<double> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        out[i] = std::min(1.0, static_cast<double>(m) * p[i]);
    }
    return out;
}

std::vector<double> adjust_holm(std::span<const double> p) {
    const std::size_t m = p.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
    std::vector<double> out(m);
    double running = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double scaled = p[order[k]] * static_cast<double>(m - k);
        running = std::max(running, scaled);
        out[order[k]] = std::min(1.0, running);
    }
    return out;
}

}  // namespace permstat::inference
