#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "permstat/kernels.hpp"
#include "permstat/rng.hpp"

using namespace permstat;
using namespace permstat::kernels;
using doctest::Approx;

namespace {

std::vector<double> random_vec(std::uint64_t seed, std::size_t n, double shift = 0.0) {
    rng::CounterRng gen(seed, 0);
    std::vector<double> out(n);
    for (auto& v : out) v = 4.0 * gen.next_open01() - 2.0 + shift;
    return out;
}

}  // namespace

TEST_CASE("summary") {
    auto s = summary(std::vector<double>{1, 2, 3});
    CHECK(s.n == 3);
    CHECK(s.mean == Approx(2.0));
    CHECK(s.sd == Approx(1.0));
    s = summary(std::vector<double>{5});
    CHECK(s.n == 1);
    CHECK(s.mean == Approx(5.0));
    CHECK(s.sd == 0.0);
    s = summary(std::vector<double>{2, 2, 2, 2});
    CHECK(s.mean == Approx(2.0));
    CHECK(s.sd == 0.0);
}

TEST_CASE("one-sample t") {
    const auto sv = t_one_sample(std::vector<double>{1, 2, 3}, 0.0);
    CHECK(sv.statistic == Approx(3.464102).epsilon(1e-6));
    CHECK(sv.df == 2.0);
    CHECK(sv.estimate == Approx(2.0));
    CHECK_THROWS_AS(t_one_sample(std::vector<double>{5, 5, 5}, 5.0), Error);
}

TEST_CASE("two-sample t, pooled") {
    const auto sv = t_two_sample(std::vector<double>{1, 2}, std::vector<double>{3, 4},
                                 VarAssumption::Equal);
    CHECK(sv.statistic == Approx(-2.828427).epsilon(1e-6));
    CHECK(sv.df == 2.0);
    CHECK(sv.estimate == Approx(-2.0));

    const std::vector<double> same{1.5, 2.5, 3.5};
    const auto zero = t_two_sample(same, same, VarAssumption::Equal);
    CHECK(zero.statistic == 0.0);
}

TEST_CASE("two-sample t, Welch") {
    const auto sv = t_two_sample(std::vector<double>{1, 2, 3, 4},
                                 std::vector<double>{2, 4, 6, 8, 10}, VarAssumption::Unequal);
    CHECK(sv.statistic == Approx(-2.251436323159).epsilon(1e-10));
    CHECK(sv.df == Approx(5.520787746171).epsilon(1e-10));
}

TEST_CASE("Welch equals Student when sizes and variances match") {
    const auto x = random_vec(1, 16);
    auto y = random_vec(2, 16);
    // Force sy = sx exactly by affine-matching moments.
    const auto sx = summary(x), sy0 = summary(y);
    for (auto& v : y) v = (v - sy0.mean) * (sx.sd / sy0.sd) + sy0.mean;
    const auto student = t_two_sample(x, y, VarAssumption::Equal);
    const auto welch = t_two_sample(x, y, VarAssumption::Unequal);
    CHECK(student.statistic == Approx(welch.statistic).epsilon(1e-12));
}

TEST_CASE("two-sample F") {
    const auto sv = f_two_sample(std::vector<double>{0, 2, 4}, std::vector<double>{0, 1, 2});
    CHECK(sv.statistic == Approx(4.0));
    CHECK(sv.df == 2.0);
    CHECK(sv.df2 == 2.0);
    const std::vector<double> same{1, 5, 9};
    CHECK(f_two_sample(same, same).statistic == Approx(1.0));
    CHECK_THROWS_AS(f_two_sample(same, std::vector<double>{3, 3, 3}), Error);
}

TEST_CASE("z test") {
    const auto sv = z_one_sample(std::vector<double>{1, 2, 3}, 0.0, 1.0);
    CHECK(sv.statistic == Approx(3.464102).epsilon(1e-6));
    CHECK(z_one_sample(std::vector<double>{1, 2, 3}, 2.0, 1.0).statistic == Approx(0.0));
    CHECK_THROWS_AS(z_one_sample(std::vector<double>{1, 2}, 0.0, 0.0), Error);
}

TEST_CASE("rank transform") {
    CHECK(rank_transform(std::vector<double>{10, 20, 30}) == std::vector<double>{1, 2, 3});
    CHECK(rank_transform(std::vector<double>{5, 5, 7}) == std::vector<double>{1.5, 1.5, 3});
    CHECK(rank_transform(std::vector<double>{4}) == std::vector<double>{1});
    const auto ranks = rank_transform(random_vec(9, 40));
    CHECK(std::accumulate(ranks.begin(), ranks.end(), 0.0) == Approx(40.0 * 41.0 / 2.0));
}

TEST_CASE("rankit scores") {
    const auto s4 = rankit_scores(4);
    CHECK(s4[0] == Approx(-1.150349380376).epsilon(1e-9));
    CHECK(s4[1] == Approx(-0.318639363964).epsilon(1e-9));
    CHECK(s4[2] == Approx(0.318639363964).epsilon(1e-9));
    CHECK(s4[3] == Approx(1.150349380376).epsilon(1e-9));
    const auto s2 = rankit_scores(2);
    CHECK(s2[0] == Approx(-0.674489750196).epsilon(1e-9));
    CHECK(s2[1] == Approx(0.674489750196).epsilon(1e-9));
    for (std::size_t n : {3u, 7u, 20u, 101u}) {
        const auto s = rankit_scores(n);
        CHECK(std::fabs(std::accumulate(s.begin(), s.end(), 0.0)) < 1e-12 * n);
    }
}

TEST_CASE("correlation kinds") {
    const std::vector<double> x{1, 2, 3};
    CHECK(correlation(x, std::vector<double>{2, 4, 6}, CorrelationKind::Pearson).statistic ==
          Approx(1.0));
    CHECK(correlation(x, std::vector<double>{1, 8, 27}, CorrelationKind::Spearman).statistic ==
          Approx(1.0));
    for (auto kind :
         {CorrelationKind::Pearson, CorrelationKind::Spearman, CorrelationKind::Rankit}) {
        CHECK(correlation(x, std::vector<double>{3, 2, 1}, kind).statistic == Approx(-1.0));
    }
    const std::vector<double> x5{1, 2, 4, 5, 7}, y5{2, 1, 5, 4, 8};
    CHECK(correlation(x5, y5, CorrelationKind::Pearson).statistic ==
          Approx(0.917662935482).epsilon(1e-10));
    CHECK(correlation(x5, y5, CorrelationKind::Spearman).statistic ==
          Approx(0.8).epsilon(1e-10));
    CHECK(correlation(x5, y5, CorrelationKind::Pearson).df == 3.0);
    CHECK_THROWS_AS(correlation(x, std::vector<double>{1, 1, 1}, CorrelationKind::Pearson),
                    Error);
}

TEST_CASE("spearman equals pearson on midranks") {
    const auto x = random_vec(21, 25);
    const auto y = random_vec(22, 25);
    const double direct = correlation(x, y, CorrelationKind::Spearman).statistic;
    const double via_ranks =
        correlation(rank_transform(x), rank_transform(y), CorrelationKind::Pearson).statistic;
    CHECK(direct == Approx(via_ranks).epsilon(1e-12));
}

TEST_CASE("one-way anova") {
    const std::vector<std::vector<double>> groups{{1, 2, 3}, {4, 5, 6}, {7, 8, 9}};
    const auto sv = anova1_f(groups);
    CHECK(sv.statistic == Approx(27.0).epsilon(1e-12));
    CHECK(sv.df == 2.0);
    CHECK(sv.df2 == 6.0);
    const std::vector<std::vector<double>> identical{{1, 2, 3}, {1, 2, 3}, {1, 2, 3}};
    CHECK(anova1_f(identical).statistic == Approx(0.0));
    const std::vector<std::vector<double>> constant{{2, 2}, {2, 2}};
    CHECK_THROWS_AS(anova1_f(constant), Error);
}

TEST_CASE("anova F equals t squared for two groups") {
    const auto x = random_vec(31, 12);
    const auto y = random_vec(32, 12, 0.7);
    const auto f = anova1_f({x, y}).statistic;
    const auto t = t_two_sample(x, y, VarAssumption::Equal).statistic;
    CHECK(f == Approx(t * t).epsilon(1e-10));
}

TEST_CASE("two-way anova against an independent decomposition") {
    // Frozen from a reference sum-of-squares decomposition (2x2, r=3).
    const std::vector<double> flat{
        -0.801931425253, -1.324358995628, -0.248361622095, 0.920445238066,
        1.636046532490,  0.609706399322,  0.947352679464,  0.715219644656,
        2.248745770735,  4.434783042959,  3.072768775845,  1.566671335969};
    std::vector<std::vector<std::vector<double>>> cells(2,
        std::vector<std::vector<double>>(2));
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            for (int k = 0; k < 3; ++k) cells[i][j].push_back(flat[(i * 2 + j) * 3 + k]);
        }
    }
    const auto sv = anova2_f(cells);
    CHECK(sv.factor_a.statistic == Approx(14.983339273496).epsilon(1e-9));
    CHECK(sv.factor_b.statistic == Approx(11.544866665321).epsilon(1e-9));
    CHECK(sv.interaction.statistic == Approx(0.014393756106).epsilon(1e-6));
    CHECK(sv.factor_a.df == 1.0);
    CHECK(sv.factor_a.df2 == 8.0);

    // Location invariance.
    for (auto& row : cells) {
        for (auto& cell : row) {
            for (auto& v : cell) v += 17.25;
        }
    }
    const auto shifted = anova2_f(cells);
    CHECK(shifted.factor_a.statistic == Approx(sv.factor_a.statistic).epsilon(1e-9));
    CHECK(shifted.factor_b.statistic == Approx(sv.factor_b.statistic).epsilon(1e-9));
    CHECK(shifted.interaction.statistic == Approx(sv.interaction.statistic).margin(1e-6));
}

TEST_CASE("two-way anova identical cells give zero F") {
    const std::vector<std::vector<std::vector<double>>> cells{
        {{1, 2}, {1, 2}},
        {{1, 2}, {1, 2}},
    };
    const auto sv = anova2_f(cells);
    CHECK(sv.factor_a.statistic == Approx(0.0).margin(1e-12));
    CHECK(sv.factor_b.statistic == Approx(0.0).margin(1e-12));
    CHECK(sv.interaction.statistic == Approx(0.0).margin(1e-12));
}

TEST_CASE("two-way anova rejects ragged designs") {
    const std::vector<std::vector<std::vector<double>>> ragged{
        {{1, 2}, {1, 2, 3}},
        {{1, 2}, {1, 2}},
    };
    CHECK_THROWS_AS(anova2_f(ragged), Error);
}

TEST_CASE("scale and shift equivariance properties") {
    // 1000 generated cases across statistics.
    int cases = 0;
    for (std::uint64_t seed = 0; seed < 125; ++seed) {
        rng::CounterRng gen(seed, 42);
        const double a = 0.25 + 3.0 * gen.next_open01();
        const double b = 10.0 * gen.next_open01() - 5.0;
        auto x = random_vec(seed * 2 + 1, 10);
        auto y = random_vec(seed * 2 + 2, 10, 0.4);
        auto xs = x, ys = y;
        for (auto& v : xs) v = a * v + b;
        for (auto& v : ys) v = a * v + b;

        const double t0 = t_two_sample(x, y, VarAssumption::Equal).statistic;
        const double t1 = t_two_sample(xs, ys, VarAssumption::Equal).statistic;
        CHECK(t0 == Approx(t1).epsilon(1e-9));
        ++cases;

        const double f0 = f_two_sample(x, y).statistic;
        const double f1 = f_two_sample(xs, ys).statistic;
        CHECK(f0 == Approx(f1).epsilon(1e-9));
        ++cases;

        // z is invariant when mu and sigma transform with the data.
        const double z2 = z_one_sample(x, 0.5, 2.0).statistic;
        const double z3 = z_one_sample(xs, a * 0.5 + b, a * 2.0).statistic;
        CHECK(z2 == Approx(z3).epsilon(1e-9));
        ++cases;

        for (auto kind :
             {CorrelationKind::Pearson, CorrelationKind::Spearman, CorrelationKind::Rankit}) {
            const double r0 = correlation(x, y, kind).statistic;
            const double r1 = correlation(xs, ys, kind).statistic;
            CHECK(r0 == Approx(r1).epsilon(1e-9));
            CHECK(std::fabs(r0) <= 1.0 + 1e-12);
            ++cases;
        }

        // Antisymmetry.
        CHECK(t_two_sample(x, y, VarAssumption::Equal).statistic ==
              Approx(-t_two_sample(y, x, VarAssumption::Equal).statistic).epsilon(1e-12));
        CHECK(f_two_sample(x, y).statistic ==
              Approx(1.0 / f_two_sample(y, x).statistic).epsilon(1e-12));
        CHECK(correlation(x, y, CorrelationKind::Pearson).statistic ==
              Approx(correlation(y, x, CorrelationKind::Pearson).statistic).epsilon(1e-12));
        cases += 3;
    }
    CHECK(cases >= 1000);
}
