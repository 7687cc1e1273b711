#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "permstat/reference.hpp"
#include "permstat/rng.hpp"

using namespace permstat;
using namespace permstat::reference;
using doctest::Approx;

TEST_CASE("normal distribution functions") {
    CHECK(norm_cdf(0.0) == Approx(0.5));
    CHECK(norm_inv(0.975) == Approx(1.959963984540).epsilon(1e-9));
    CHECK(norm_inv(0.5) == 0.0);
    CHECK(norm_inv(0.025) == Approx(-1.959963984540).epsilon(1e-9));
    // Antisymmetry is exact by construction.
    for (double p : {0.01, 0.2, 0.37, 0.49}) {
        CHECK(norm_inv(p) == -norm_inv(1.0 - p));
    }
    CHECK_THROWS_AS(norm_inv(0.0), Error);
    CHECK_THROWS_AS(norm_inv(1.0), Error);
}

TEST_CASE("norm_inv round trip") {
    // Lower tail carries full precision; the upper tail is limited by the
    // spacing of doubles near 1, so the strict bound applies up to z ~ 5.
    for (double z = -8.0; z <= 5.0; z += 0.125) {
        CHECK(norm_inv(norm_cdf(z)) == Approx(z).margin(1e-9));
    }
    for (double z = 5.125; z <= 8.0; z += 0.125) {
        const double back = norm_inv(norm_cdf(z));
        CHECK(norm_cdf(back) == Approx(norm_cdf(z)).epsilon(1e-12));
    }
}

TEST_CASE("t distribution closed forms") {
    CHECK(t_cdf(0.0, 5.0) == Approx(0.5));
    CHECK(t_cdf(1.0, 1.0) == Approx(0.75).epsilon(1e-12));   // Cauchy
    CHECK(t_cdf(-1.0, 1.0) == Approx(0.25).epsilon(1e-12));
    for (double t : {0.3, 1.7, 2.9}) {
        for (double df : {1.0, 4.0, 58.0, 240.0}) {
            CHECK(t_cdf(t, df) + t_cdf(-t, df) == Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("t and F against frozen high-precision references") {
    CHECK(t_cdf(2.5, 58.0) == Approx(0.99236538518879).epsilon(1e-11));
    CHECK(t_cdf(-1.3, 7.24) == Approx(0.11672823360490).epsilon(1e-11));
    CHECK(f_cdf(2.2, 19.0, 29.0) == Approx(0.97294441709308).epsilon(1e-11));
    CHECK(f_cdf(0.5, 3.0, 5.0) == Approx(0.30154736269508).epsilon(1e-11));
    CHECK(t_cdf(1e-3, 1e6) == Approx(0.5003989421141755).epsilon(1e-12));
    CHECK(t_cdf(40.0, 1e6) == Approx(1.0).epsilon(1e-12));
    // F(x, d1, d2) relates to the t distribution: F-cdf of t^2 with (1, df)
    // equals 2 t_cdf(|t|, df) - 1.
    for (double t : {0.5, 1.25, 2.8}) {
        for (double df : {3.0, 17.0, 90.0}) {
            CHECK(f_cdf(t * t, 1.0, df) == Approx(2.0 * t_cdf(t, df) - 1.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("exact one-sample oracle reproduces the hand-enumerated case") {
    CHECK(exact_test_one_sample_t(std::vector<double>{1, 2, 3}, 0.0, Tail::TwoTailed) ==
          Approx(0.25));
    CHECK(exact_test_two_sample_t(std::vector<double>{1, 2}, std::vector<double>{3, 4},
                                  Tail::TwoTailed) == Approx(1.0 / 3.0));
    const std::vector<double> same{1, 2, 3};
    CHECK(exact_test_two_sample_t(same, same, Tail::TwoTailed) == Approx(1.0));
}

TEST_CASE("exact oracle rejects oversized problems") {
    std::vector<double> big(21, 0.0);
    CHECK_THROWS_AS(exact_test_one_sample_t(big, 0.0, Tail::TwoTailed), Error);
    std::vector<double> x(11), y(11);
    CHECK_THROWS_AS(exact_test_correlation(x, y, Tail::TwoTailed), Error);
}

TEST_CASE("sample_normal is deterministic with near-standard moments") {
    const auto a = sample_normal(200, 10, 42, 0);
    const auto b = sample_normal(200, 10, 42, 0);
    CHECK(std::memcmp(a.data(), b.data(), 200 * 10 * sizeof(double)) == 0);
    double mean = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < 200; ++i) {
        for (std::size_t v = 0; v < 10; ++v) mean += a.at(i, v);
    }
    mean /= 2000.0;
    for (std::size_t i = 0; i < 200; ++i) {
        for (std::size_t v = 0; v < 10; ++v) {
            ss += (a.at(i, v) - mean) * (a.at(i, v) - mean);
        }
    }
    const double sd = std::sqrt(ss / 1999.0);
    CHECK(mean == Approx(0.0).margin(0.1));
    CHECK(sd == Approx(1.0).margin(0.05));
}

TEST_CASE("fwer_sim single variable holds the nominal level") {
    const auto report = fwer_sim(1, 12, 400, 0.05, CorrectionMethod::Max, 0.0, 0, 7, 999, 0);
    CHECK(report.n_sims == 400);
    CHECK(!report.empirical_power.has_value());
    CHECK(report.mc_stderr ==
          Approx(std::sqrt(report.empirical_fwer * (1 - report.empirical_fwer) / 400.0)));
    CHECK(report.empirical_fwer == Approx(0.05).margin(0.035));  // ~3 sigma
}

TEST_CASE("fwer_sim uncorrected inflation for 5 variables") {
    // 1 - 0.95^5 ~ 0.226
    const auto report = fwer_sim(5, 12, 400, 0.05, CorrectionMethod::None, 0.0, 0, 11, 999, 0);
    CHECK(report.empirical_fwer == Approx(0.226).margin(0.07));
    const auto maxr = fwer_sim(5, 12, 400, 0.05, CorrectionMethod::Max, 0.0, 0, 11, 999, 0);
    CHECK(maxr.empirical_fwer < report.empirical_fwer);
    CHECK(maxr.empirical_fwer <= 0.05 + 3.0 * maxr.mc_stderr);
}

TEST_CASE("fwer_sim power under a shift, max vs bonferroni") {
    const auto maxr = fwer_sim(5, 20, 300, 0.05, CorrectionMethod::Max, 1.0, 2, 13, 999, 0);
    REQUIRE(maxr.empirical_power.has_value());
    const auto bonf =
        fwer_sim(5, 20, 300, 0.05, CorrectionMethod::Bonferroni, 1.0, 2, 13, 999, 0);
    REQUIRE(bonf.empirical_power.has_value());
    CHECK(*maxr.empirical_power >= *bonf.empirical_power - 3.0 * maxr.mc_stderr);
    CHECK(*maxr.empirical_power > 0.3);  // sanity: the effect is detectable
    CHECK_THROWS_AS(fwer_sim(5, 20, 50, 0.05, CorrectionMethod::Max, 0.0, 0, 1, 999, 0), Error);
}
