#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "permstat/effectsize.hpp"
#include "permstat/reference.hpp"
#include "permstat/rng.hpp"

using namespace permstat;
using doctest::Approx;

namespace {

// Affine-adjusts a vector to hit an exact mean and sd.
std::vector<double> with_moments(std::vector<double> v, double mean, double sd) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    const double s = std::sqrt(ss / static_cast<double>(v.size() - 1));
    for (double& x : v) x = (x - m) / s * sd + mean;
    return v;
}

DataMatrix column_matrix(const std::vector<double>& v) {
    return DataMatrix(v.size(), 1, std::vector<double>(v));
}

}  // namespace

TEST_CASE("bias factor") {
    CHECK(bias_factor(60) == 1.0 - 3.0 / 231.0);
    CHECK(bias_factor(60) == Approx(0.987013).epsilon(1e-6));
    CHECK(bias_factor(12) == Approx(1.0 - 3.0 / 39.0).epsilon(1e-12));
    CHECK(bias_factor(12) == Approx(0.923077).epsilon(1e-6));
    CHECK(bias_factor(1000000) == Approx(1.0 - 7.5e-7).epsilon(1e-9));
    CHECK_THROWS_AS(bias_factor(2), Error);
    // Strictly increasing, always below 1.
    double prev = 0.0;
    for (std::size_t n = 3; n < 200; ++n) {
        const double f = bias_factor(n);
        CHECK(f < 1.0);
        CHECK(f > prev);
        prev = f;
    }
}

TEST_CASE("cliffs d") {
    CHECK(cliffs_d(std::vector<double>{3, 4}, std::vector<double>{1, 2}) == Approx(1.0));
    CHECK(cliffs_d(std::vector<double>{1, 2}, std::vector<double>{1, 2}) == Approx(0.0));
    CHECK(cliffs_d(std::vector<double>{1, 3}, std::vector<double>{2, 2}) == Approx(0.0));
    // Bounded and antisymmetric over random samples.
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        rng::CounterRng gen(seed, 0);
        std::vector<double> x(5 + gen.bounded(10)), y(5 + gen.bounded(10));
        for (auto& v : x) v = gen.next_open01();
        for (auto& v : y) v = gen.next_open01();
        const double d = cliffs_d(x, y);
        CHECK(d >= -1.0);
        CHECK(d <= 1.0);
        CHECK(d == Approx(-cliffs_d(y, x)).epsilon(1e-12));
    }
}

TEST_CASE("effect points") {
    // Paper example reconstructed from reported summaries.
    const auto base_x = reference::sample_normal(30, 1, 1, 0).column(0);
    const auto base_y = reference::sample_normal(30, 1, 1, 1).column(0);
    const auto x = with_moments(base_x, -0.06, 0.91);
    const auto y = with_moments(base_y, -1.09, 0.86);
    const double d = effect_point(x, y, EffectKind::Cohen, false, VarAssumption::Equal);
    CHECK(d == Approx(1.163).epsilon(0.002));
    CHECK(d * bias_factor(60) == Approx(1.14).epsilon(0.01));

    CHECK(effect_point(std::vector<double>{3, 4}, std::vector<double>{1, 2}, EffectKind::Cliff,
                       false, VarAssumption::Equal) == Approx(1.0));
    const std::vector<double> same{1.0, 2.0, 3.0};
    CHECK(effect_point(same, same, EffectKind::MeanDiff, false, VarAssumption::Equal) ==
          Approx(0.0));
    CHECK(effect_point(same, same, EffectKind::Cohen, false, VarAssumption::Equal) ==
          Approx(0.0));
    CHECK_THROWS_AS(
        effect_point(same, same, EffectKind::Cohen, true, VarAssumption::Equal), Error);

    // Glass: denominator from the control sample only.
    const std::vector<double> t{4, 6}, c{1, 3};
    CHECK(effect_point(t, c, EffectKind::Glass, false, VarAssumption::Equal,
                       ControlSample::Y) == Approx(3.0 / std::sqrt(2.0)));
    CHECK(effect_point(t, c, EffectKind::Glass, false, VarAssumption::Equal,
                       ControlSample::X) == Approx(-3.0 / std::sqrt(2.0)));

    // Unpooled Cohen.
    const std::vector<double> a{0, 2, 4}, b{0, 4, 8};
    const double mx = 2, my = 4, vx = 4, vy = 16;
    CHECK(effect_point(a, b, EffectKind::Cohen, false, VarAssumption::Unequal) ==
          Approx((mx - my) / std::sqrt((vx + vy) / 2.0)));
    CHECK(effect_point(a, b, EffectKind::MedianDiff, false, VarAssumption::Equal) ==
          Approx(-2.0));
}

TEST_CASE("affine invariance of standardized kinds") {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        rng::CounterRng gen(seed, 5);
        const double a = 0.3 + 4.0 * gen.next_open01();
        const double b = 8.0 * gen.next_open01() - 4.0;
        std::vector<double> x(12), y(10);
        for (auto& v : x) v = gen.next_open01() * 3.0;
        for (auto& v : y) v = gen.next_open01() * 3.0 - 0.5;
        std::vector<double> xs = x, ys = y;
        for (auto& v : xs) v = a * v + b;
        for (auto& v : ys) v = a * v + b;
        for (auto kind : {EffectKind::Cohen, EffectKind::Glass, EffectKind::Cliff}) {
            const double e0 = effect_point(x, y, kind, false, VarAssumption::Equal);
            const double e1 = effect_point(xs, ys, kind, false, VarAssumption::Equal);
            CHECK(e0 == Approx(e1).epsilon(1e-9));
        }
        CHECK(effect_point(xs, ys, EffectKind::MeanDiff, false, VarAssumption::Equal) ==
              Approx(a * effect_point(x, y, EffectKind::MeanDiff, false, VarAssumption::Equal))
                  .epsilon(1e-9));
        CHECK(effect_point(xs, ys, EffectKind::MedianDiff, false, VarAssumption::Equal) ==
              Approx(a *
                     effect_point(x, y, EffectKind::MedianDiff, false, VarAssumption::Equal))
                  .epsilon(1e-9));
    }
}

TEST_CASE("constant data gives a degenerate zero-width CI for MeanDiff") {
    const DataMatrix x(4, 1, {5, 5, 5, 5});
    const DataMatrix y(4, 1, {3, 3, 3, 3});
    BootConfig cfg;
    cfg.n_boot = 500;
    cfg.n_threads = 1;
    const auto res = booteffectsize(x, &y, EffectKind::MeanDiff, cfg);
    CHECK(res.variables[0].effect == Approx(2.0));
    CHECK(res.variables[0].ci_lower == Approx(2.0));
    CHECK(res.variables[0].ci_upper == Approx(2.0));
    CHECK(res.variables[0].correction_factor == 1.0);
    CHECK(res.kind == "mean_diff");

    // Cohen on constant data: degenerate, reported per variable.
    const auto bad = booteffectsize(x, &y, EffectKind::Cohen, cfg);
    REQUIRE(bad.variables[0].error.has_value());
}

TEST_CASE("bootstrap determinism") {
    const auto x = reference::sample_normal(25, 3, 7, 0);
    const auto y = reference::sample_normal(25, 3, 7, 1);
    BootConfig cfg;
    cfg.n_boot = 800;
    cfg.seed = 99;
    cfg.n_threads = 1;
    const auto a = booteffectsize(x, &y, EffectKind::Cohen, cfg);
    cfg.n_threads = 4;
    const auto b = booteffectsize(x, &y, EffectKind::Cohen, cfg);
    for (std::size_t v = 0; v < 3; ++v) {
        CHECK(a.variables[v].effect == b.variables[v].effect);
        CHECK(a.variables[v].ci_lower == b.variables[v].ci_lower);
        CHECK(a.variables[v].ci_upper == b.variables[v].ci_upper);
    }
}

TEST_CASE("hedges relabeling and CI correction") {
    const auto x = reference::sample_normal(20, 2, 11, 0);
    auto y = reference::sample_normal(20, 2, 11, 1);
    for (std::size_t i = 0; i < 20; ++i) y.at(i, 0) -= 1.0;
    BootConfig cfg;
    cfg.n_boot = 2000;
    cfg.seed = 5;
    cfg.n_threads = 1;
    const auto g = booteffectsize(x, &y, EffectKind::Cohen, cfg);
    CHECK(g.kind == "hedges_g");
    cfg.bias_correct = false;
    const auto d = booteffectsize(x, &y, EffectKind::Cohen, cfg);
    CHECK(d.kind == "cohens_d");
    const double factor = bias_factor(40);
    for (std::size_t v = 0; v < 2; ++v) {
        CHECK(g.variables[v].effect == Approx(factor * d.variables[v].effect).epsilon(1e-12));
        CHECK(g.variables[v].ci_lower ==
              Approx(factor * d.variables[v].ci_lower).epsilon(1e-12));
        CHECK(g.variables[v].ci_upper ==
              Approx(factor * d.variables[v].ci_upper).epsilon(1e-12));
        CHECK(g.variables[v].correction_factor == Approx(factor));
        CHECK(d.variables[v].correction_factor == 1.0);
        CHECK(std::fabs(g.variables[v].effect) < std::fabs(d.variables[v].effect));
    }
    // CI brackets the estimate for a well-behaved effect.
    CHECK(g.variables[0].ci_lower <= g.variables[0].effect);
    CHECK(g.variables[0].effect <= g.variables[0].ci_upper);
}

TEST_CASE("paired bias correction uses the pair count") {
    const auto x = reference::sample_normal(14, 1, 13, 0);
    auto y = reference::sample_normal(14, 1, 13, 1);
    for (std::size_t i = 0; i < 14; ++i) y.at(i, 0) -= 0.8;
    BootConfig cfg;
    cfg.n_boot = 500;
    cfg.seed = 2;
    cfg.paired = true;
    cfg.n_threads = 1;
    const auto res = booteffectsize(x, &y, EffectKind::Cohen, cfg);
    CHECK(res.variables[0].correction_factor == Approx(bias_factor(14)));
}

TEST_CASE("CI width shrinks with sample size") {
    // Median CI width at n=100 < median at n=20 over 200 simulated datasets.
    std::vector<double> widths20, widths100;
    BootConfig cfg;
    cfg.n_boot = 400;
    cfg.n_threads = 1;
    for (std::uint64_t s = 0; s < 200; ++s) {
        cfg.seed = s;
        for (const std::size_t n : {std::size_t{20}, std::size_t{100}}) {
            auto x = reference::sample_normal(n, 1, 1000 + s, 0);
            auto y = reference::sample_normal(n, 1, 1000 + s, 1);
            const auto res = booteffectsize(x, &y, EffectKind::Cohen, cfg);
            const double width = res.variables[0].ci_upper - res.variables[0].ci_lower;
            (n == 20 ? widths20 : widths100).push_back(width);
        }
    }
    std::sort(widths20.begin(), widths20.end());
    std::sort(widths100.begin(), widths100.end());
    CHECK(widths100[100] < widths20[100]);
}

TEST_CASE("boot config validation") {
    BootConfig cfg;
    cfg.n_boot = 50;
    CHECK_THROWS_AS(validate_boot_config(cfg), Error);
    cfg.n_boot = 1000;
    cfg.alpha = 0.0;
    CHECK_THROWS_AS(validate_boot_config(cfg), Error);
}
