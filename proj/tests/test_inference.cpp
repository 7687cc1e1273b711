#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "permstat/inference.hpp"
#include "permstat/rng.hpp"

using namespace permstat;
using namespace permstat::inference;
using doctest::Approx;

TEST_CASE("validate_config") {
    TestConfig cfg;
    std::vector<std::string> warnings;
    const auto normalized = validate_config(cfg, &warnings);
    CHECK(normalized.n_perm == 10000);
    CHECK(normalized.alpha == 0.05);
    CHECK(normalized.tail == Tail::TwoTailed);
    CHECK(normalized.correction == CorrectionMethod::Max);
    CHECK(warnings.empty());

    cfg.alpha = 1.5;
    CHECK_THROWS_AS(validate_config(cfg), Error);
    cfg.alpha = 0.05;
    cfg.n_perm = 50;
    CHECK_THROWS_AS(validate_config(cfg), Error);
    cfg.n_perm = 500;
    warnings.clear();
    validate_config(cfg, &warnings);
    CHECK(warnings.size() == 1);
}

TEST_CASE("max_reduce per tail") {
    const std::vector<std::vector<double>> rows{{1, -3}, {2, 0.5}};
    auto two = max_reduce(rows, Tail::TwoTailed);
    CHECK(two.values == std::vector<double>{3, 2});
    CHECK(two.corrected);
    CHECK(two.n_vars_joined == 2);
    auto right = max_reduce(rows, Tail::Right);
    CHECK(right.values == std::vector<double>{1, 2});
    auto left = max_reduce(rows, Tail::Left);
    CHECK(left.values == std::vector<double>{-3, 0.5});
}

TEST_CASE("pvalue conventions") {
    NullDistribution dist;
    dist.values = {3.0, 1.0, 2.0, 0.5};
    dist.tail = Tail::TwoTailed;
    dist.exact = false;
    CHECK(pvalue(2.5, dist) == Approx(0.4));  // (1+1)/5

    NullDistribution low;
    low.tail = Tail::TwoTailed;
    low.exact = false;
    low.values.assign(9999, 0.0);
    CHECK(pvalue(1.0, low) == Approx(1.0 / 10000.0));

    dist.exact = true;
    CHECK(pvalue(2.5, dist) == Approx(0.25));  // plain proportion

    // Left tail counts values <= observed.
    NullDistribution left;
    left.tail = Tail::Left;
    left.exact = true;
    left.values = {-2.0, -1.0, 0.0, 1.0};
    CHECK(pvalue(-1.0, left) == Approx(0.5));
}

TEST_CASE("pvalue bounds over random distributions") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        rng::CounterRng gen(seed, 0);
        NullDistribution dist;
        dist.tail = Tail::TwoTailed;
        dist.exact = false;
        const std::size_t n = 100 + gen.bounded(400);
        for (std::size_t i = 0; i < n; ++i) dist.values.push_back(4.0 * gen.next_open01() - 2.0);
        const double observed = 4.0 * gen.next_open01() - 2.0;
        const double p = pvalue(observed, dist);
        CHECK(p >= 1.0 / (static_cast<double>(n) + 1.0));
        CHECK(p <= 1.0);
    }
}

TEST_CASE("percentile definition") {
    CHECK(percentile(std::vector<double>{1, 2, 3, 4}, 50.0) == Approx(2.5));
    CHECK(percentile(std::vector<double>{7}, 31.0) == Approx(7.0));
    CHECK(percentile(std::vector<double>{1, 2, 3, 4}, 100.0) == Approx(4.0));
    CHECK(percentile(std::vector<double>{1, 2, 3, 4}, 0.0) == Approx(1.0));
    // Monotone in pct, invariant under input order.
    const std::vector<double> values{5, 1, 9, 2, 7, 3};
    std::vector<double> shuffled{3, 9, 1, 7, 2, 5};
    double prev = -1e300;
    for (double pct = 0.0; pct <= 100.0; pct += 2.5) {
        const double v = percentile(values, pct);
        CHECK(v >= prev);
        CHECK(v == Approx(percentile(shuffled, pct)));
        prev = v;
    }
}

TEST_CASE("ci_from_dist scaled family") {
    NullDistribution dist;
    dist.tail = Tail::TwoTailed;
    // crit = 2.0 at the 95th percentile: 100 values, position 1+0.95*99
    for (int i = 1; i <= 100; ++i) dist.values.push_back(i <= 95 ? 1.0 : 2.0);
    std::sort(dist.values.begin(), dist.values.end());
    const auto [lo, hi] = ci_from_dist(1.03, 0.2286, dist, 0.05, CiFamily::Scaled);
    // percentile at 95 of this step distribution interpolates between 1 and 2
    CHECK(lo < hi);
    CHECK(lo == Approx(1.03 - (hi - 1.03)));

    // Exact spec arithmetic with a constant-crit distribution.
    NullDistribution flat;
    flat.tail = Tail::TwoTailed;
    flat.values.assign(200, 2.0);
    const auto [l2, h2] = ci_from_dist(1.03, 0.2286, flat, 0.05, CiFamily::Scaled);
    CHECK(l2 == Approx(0.5728));
    CHECK(h2 == Approx(1.4872));

    flat.tail = Tail::Right;
    const auto [l3, h3] = ci_from_dist(1.03, 0.2286, flat, 0.05, CiFamily::Scaled);
    CHECK(l3 == Approx(0.5728));
    CHECK(std::isinf(h3));
    flat.tail = Tail::Left;
    flat.values.assign(200, -2.0);
    const auto [l4, h4] = ci_from_dist(1.03, 0.2286, flat, 0.05, CiFamily::Scaled);
    CHECK(std::isinf(l4));
    CHECK(l4 < 0);
    CHECK(h4 == Approx(1.4872));

    CHECK_THROWS_AS(ci_from_dist(1.0, 0.0, flat, 0.05, CiFamily::Scaled), Error);
}

TEST_CASE("ci_from_dist shift family clamps to [-1, 1]") {
    NullDistribution dist;
    dist.tail = Tail::TwoTailed;
    dist.values.assign(100, 0.3);
    const auto [lo, hi] = ci_from_dist(0.9, std::nan(""), dist, 0.05, CiFamily::Shift);
    CHECK(lo == Approx(0.6));
    CHECK(hi == Approx(1.0));
}

TEST_CASE("ci_from_dist ratio family") {
    NullDistribution dist;
    dist.tail = Tail::TwoTailed;
    dist.values.assign(100, 3.0);  // max(F, 1/F) units
    const auto [lo, hi] = ci_from_dist(4.0, std::nan(""), dist, 0.05, CiFamily::Ratio);
    CHECK(lo == Approx(4.0 / 3.0));
    CHECK(hi == Approx(12.0));
    dist.tail = Tail::Right;
    const auto [l2, h2] = ci_from_dist(4.0, std::nan(""), dist, 0.05, CiFamily::Ratio);
    CHECK(l2 == Approx(4.0 / 3.0));
    CHECK(std::isinf(h2));
}

TEST_CASE("corrected max distribution never narrows the CI") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        rng::CounterRng gen(seed, 7);
        std::vector<std::vector<double>> rows(200, std::vector<double>(5));
        for (auto& row : rows) {
            for (auto& v : row) v = 6.0 * gen.next_open01() - 3.0;
        }
        const auto joint = max_reduce(rows, Tail::TwoTailed);
        for (std::size_t v = 0; v < 5; ++v) {
            NullDistribution single;
            single.tail = Tail::TwoTailed;
            for (const auto& row : rows) single.values.push_back(row[v]);
            const auto [ul, uh] = ci_from_dist(0.4, 1.0, single, 0.05, CiFamily::Scaled);
            const auto [cl, ch] = ci_from_dist(0.4, 1.0, joint, 0.05, CiFamily::Scaled);
            CHECK(ch - cl >= uh - ul - 1e-12);
            // max dominance implies corrected p >= uncorrected p
            const double obs = 6.0 * gen.next_open01() - 3.0;
            CHECK(pvalue(obs, joint) >= pvalue(obs, single) - 1e-15);
        }
    }
}

TEST_CASE("bonferroni adjustment") {
    CHECK(adjust_bonferroni(std::vector<double>{0.01, 0.04}, 2) ==
          std::vector<double>{0.02, 0.08});
    CHECK(adjust_bonferroni(std::vector<double>{0.7}, 2) == std::vector<double>{1.0});
    const std::vector<double> p{0.2, 0.5, 0.9};
    CHECK(adjust_bonferroni(p, 1) == p);
}

TEST_CASE("holm adjustment") {
    CHECK(adjust_holm(std::vector<double>{0.01, 0.04}) == std::vector<double>{0.02, 0.04});
    CHECK(adjust_holm(std::vector<double>{0.04, 0.01}) == std::vector<double>{0.04, 0.02});
    const auto all_equal = adjust_holm(std::vector<double>{0.03, 0.03, 0.03});
    for (double v : all_equal) CHECK(v == Approx(0.09));
}

TEST_CASE("holm never exceeds bonferroni") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        rng::CounterRng gen(seed, 3);
        const std::size_t m = 1 + gen.bounded(12);
        std::vector<double> p(m);
        for (auto& v : p) v = gen.next_open01();
        const auto holm = adjust_holm(p);
        const auto bonf = adjust_bonferroni(p, m);
        for (std::size_t i = 0; i < m; ++i) {
            CHECK(holm[i] <= bonf[i] + 1e-15);
            CHECK(holm[i] >= p[i] - 1e-15);
        }
    }
}
