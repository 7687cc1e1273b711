#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "permstat/reference.hpp"
#include "permstat/resample.hpp"

// Brute-force oracles. Enumeration is lexicographic and self-contained:
// combinations advance by the classic next-combination step, permutations and
// label arrangements by std::next_permutation.

namespace permstat::reference {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint64_t kEnumCap = 1000000;

double extreme(double v, Tail tail) {
    switch (tail) {
        case Tail::TwoTailed: return std::fabs(v);
        case Tail::Right: return v;
        case Tail::Left: return -v;
    }
    return std::fabs(v);
}

struct SumPair {
    double s = 0.0, q = 0.0;
};

SumPair accumulate(std::span<const double> pool, const std::vector<std::size_t>& idx) {
    SumPair out;
    for (std::size_t i : idx) {
        out.s += pool[i];
        out.q += pool[i] * pool[i];
    }
    return out;
}

// t from raw group sums; zero-variance rearrangements map to 0 / +-inf.
double t_from_sums(const SumPair& gx, double nx, const SumPair& gy, double ny,
                   VarAssumption va) {
    const double num = gx.s / nx - gy.s / ny;
    double se2;
    if (va == VarAssumption::Unequal) {
        const double vx = (gx.q - gx.s * gx.s / nx) / (nx - 1.0);
        const double vy = (gy.q - gy.s * gy.s / ny) / (ny - 1.0);
        se2 = vx / nx + vy / ny;
    } else {
        const double sp2 = ((gx.q - gx.s * gx.s / nx) + (gy.q - gy.s * gy.s / ny)) /
                           (nx + ny - 2.0);
        se2 = sp2 * (1.0 / nx + 1.0 / ny);
    }
    if (se2 > 0.0) return num / std::sqrt(se2);
    if (num == 0.0) return 0.0;
    return std::copysign(kInf, num);
}

// Advances idx (ascending k-combination of 0..n-1) to its lexicographic
// successor; returns false after the last combination.
bool next_combination(std::vector<std::size_t>& idx, std::size_t n) {
    const std::size_t k = idx.size();
    for (std::size_t slot = k; slot-- > 0;) {
        if (idx[slot] < n - k + slot) {
            ++idx[slot];
            for (std::size_t j = slot + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
            return true;
        }
    }
    return false;
}

template <typename StatFn>
double enumerate_partitions(std::span<const double> pool, std::size_t nx, Tail tail,
                            StatFn&& stat_fn) {
    const std::size_t n = pool.size();
    const std::uint64_t total = resample::binomial_or_huge(n, nx);
    if (total > kEnumCap) {
        throw Error(ErrorCode::TooLargeToEnumerate, "too many partitions to enumerate");
    }
    std::vector<std::size_t> in_x(nx);
    std::iota(in_x.begin(), in_x.end(), 0u);
    std::vector<std::size_t> in_y;
    const auto complement = [&]() {
        in_y.clear();
        std::size_t cursor = 0;
        for (std::size_t v = 0; v < n; ++v) {
            if (cursor < nx && in_x[cursor] == v) {
                ++cursor;
            } else {
                in_y.push_back(v);
            }
        }
    };
    complement();
    const double observed = extreme(stat_fn(in_x, in_y), tail);  // identity split
    std::uint64_t count = 0, seen = 0;
    do {
        complement();
        if (extreme(stat_fn(in_x, in_y), tail) >= observed) ++count;
        ++seen;
    } while (next_combination(in_x, n));
    (void)seen;
    return static_cast<double>(count) / static_cast<double>(total);
}

}  // namespace

double exact_test_two_sample_t(std::span<const double> x, std::span<const double> y, Tail tail,
                               VarAssumption va) {
    std::vector<double> pool(x.begin(), x.end());
    pool.insert(pool.end(), y.begin(), y.end());
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    return enumerate_partitions(
        pool, x.size(), tail,
        [&](const std::vector<std::size_t>& ix, const std::vector<std::size_t>& iy) {
            return t_from_sums(accumulate(pool, ix), nx, accumulate(pool, iy), ny, va);
        });
}

double exact_test_var2(std::span<const double> x, std::span<const double> y, Tail tail) {
    // Same null scheme as the engine: pool group-mean-centered observations.
    std::vector<double> pool;
    pool.reserve(x.size() + y.size());
    double mx = 0.0, my = 0.0;
    for (double v : x) mx += v;
    for (double v : y) my += v;
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    for (double v : x) pool.push_back(v - mx);
    for (double v : y) pool.push_back(v - my);
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    const auto var_of = [](const SumPair& g, double n) {
        return std::max(0.0, (g.q - g.s * g.s / n) / (n - 1.0));
    };
    if (tail == Tail::TwoTailed) {
        // Symmetric larger/smaller ratio, matching the engine's two-tailed rule.
        return enumerate_partitions(
            pool, x.size(), Tail::Right,
            [&](const std::vector<std::size_t>& ix, const std::vector<std::size_t>& iy) {
                const double vx = var_of(accumulate(pool, ix), nx);
                const double vy = var_of(accumulate(pool, iy), ny);
                if (vx == 0.0 && vy == 0.0) return 1.0;
                if (vx == 0.0 || vy == 0.0) return kInf;
                return vx >= vy ? vx / vy : vy / vx;
            });
    }
    return enumerate_partitions(
        pool, x.size(), tail,
        [&](const std::vector<std::size_t>& ix, const std::vector<std::size_t>& iy) {
            const double vx = var_of(accumulate(pool, ix), nx);
            const double vy = var_of(accumulate(pool, iy), ny);
            if (vy == 0.0) return vx == 0.0 ? 1.0 : kInf;
            return vx / vy;
        });
}

double exact_test_one_sample_t(std::span<const double> x, double mu, Tail tail) {
    const std::size_t n = x.size();
    if (n >= 20) {
        throw Error(ErrorCode::TooLargeToEnumerate, "too many sign patterns to enumerate");
    }
    std::vector<double> dev(n);
    double ssq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        dev[i] = x[i] - mu;
        ssq += dev[i] * dev[i];
    }
    const double dn = static_cast<double>(n);
    const auto t_of = [&](std::uint64_t mask) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sum += (mask >> i) & 1u ? -dev[i] : dev[i];
        }
        const double m = sum / dn;
        const double var = (ssq - sum * sum / dn) / (dn - 1.0);
        if (var > 0.0) return m / std::sqrt(var / dn);
        if (m == 0.0) return 0.0;
        return std::copysign(kInf, m);
    };
    const double observed = extreme(t_of(0), tail);
    const std::uint64_t total = std::uint64_t{1} << n;
    std::uint64_t count = 0;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        if (extreme(t_of(mask), tail) >= observed) ++count;
    }
    return static_cast<double>(count) / static_cast<double>(total);
}

double exact_test_correlation(std::span<const double> x, std::span<const double> y, Tail tail) {
    const std::size_t n = x.size();
    if (n != y.size()) throw Error(ErrorCode::ShapeMismatch, "length mismatch");
    const std::uint64_t total = resample::count_exact_rowperm(n);
    if (total > kEnumCap) {
        throw Error(ErrorCode::TooLargeToEnumerate, "too many row permutations to enumerate");
    }
    std::vector<double> cx(x.begin(), x.end()), cy(y.begin(), y.end());
    double mx = 0.0, my = 0.0;
    for (double v : cx) mx += v;
    for (double v : cy) my += v;
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cx[i] -= mx;
        cy[i] -= my;
        sxx += cx[i] * cx[i];
        syy += cy[i] * cy[i];
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw Error(ErrorCode::ZeroVariance, "correlation input is constant");
    }
    const double denom = std::sqrt(sxx * syy);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    const auto r_of = [&]() {
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += cx[i] * cy[perm[i]];
        return dot / denom;
    };
    const double observed = extreme(r_of(), tail);
    std::uint64_t count = 0;
    do {
        if (extreme(r_of(), tail) >= observed) ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(count) / static_cast<double>(total);
}

double exact_test_anova1(const std::vector<std::vector<double>>& groups) {
    std::vector<double> values;
    std::vector<int> labels;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        for (double v : groups[g]) {
            values.push_back(v);
            labels.push_back(static_cast<int>(g));
        }
    }
    std::vector<std::size_t> sizes;
    for (const auto& g : groups) sizes.push_back(g.size());
    const std::uint64_t total = resample::count_exact_labelperm(sizes);
    if (total > kEnumCap) {
        throw Error(ErrorCode::TooLargeToEnumerate, "too many label arrangements to enumerate");
    }
    const std::size_t n = values.size();
    const std::size_t k = groups.size();
    const double df1 = static_cast<double>(k) - 1.0;
    const double df2 = static_cast<double>(n - k);
    double grand = 0.0;
    for (double v : values) grand += v;
    grand /= static_cast<double>(n);
    std::vector<double> centered(n);
    double ssq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        centered[i] = values[i] - grand;
        ssq += centered[i] * centered[i];
    }

    // Group terms reduced in sorted (size, sum) order: arrangements that
    // merely relabel equal-sized groups are exact ties and must stay ties.
    const auto f_of = [&](const std::vector<int>& lab) {
        std::vector<std::pair<double, double>> terms(k, {0.0, 0.0});
        for (std::size_t i = 0; i < n; ++i) {
            auto& [gn, gs] = terms[static_cast<std::size_t>(lab[i])];
            gn += 1.0;
            gs += centered[i];
        }
        std::sort(terms.begin(), terms.end());
        double total = 0.0;
        double between_num = 0.0;
        for (const auto& [gn, gs] : terms) {
            total += gs;
            between_num += gs * gs / gn;
        }
        const double between = between_num - total * total / static_cast<double>(n);
        const double within = ssq - between_num;
        const double msw = within / df2;
        if (!(msw > 0.0)) return between > 0.0 ? kInf : 0.0;
        return (between / df1) / msw;
    };

    const double observed = f_of(labels);
    std::vector<int> arrangement = labels;
    std::sort(arrangement.begin(), arrangement.end());
    std::uint64_t count = 0;
    do {
        if (f_of(arrangement) >= observed) ++count;
    } while (std::next_permutation(arrangement.begin(), arrangement.end()));
    return static_cast<double>(count) / static_cast<double>(total);
}

}  // namespace permstat::reference
