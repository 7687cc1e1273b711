#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "permstat/resample.hpp"
#include "permstat/rng.hpp"

using namespace permstat;
using resample::ResamplePlan;

TEST_CASE("count_exact basics") {
    CHECK(resample::count_exact_signflip(10) == 1024);
    CHECK(resample::count_exact_partition(2, 2) == 6);
    CHECK(resample::count_exact_partition(3, 3) == 20);
    CHECK(resample::count_exact_partition(30, 30) == 118264581564861424ull);
    CHECK(resample::count_exact_rowperm(5) == 120);
    CHECK(resample::count_exact_labelperm({3, 3, 3}) == 1680);
    CHECK(resample::count_exact_signflip(70) == resample::kHugeCount);
    CHECK(resample::count_exact_rowperm(30) == resample::kHugeCount);
}

TEST_CASE("signflip exact mode enumerates every pattern once") {
    bool exact = false;
    const auto flips = resample::gen_signflips(3, 8, 7, 20000, &exact);
    CHECK(exact);
    CHECK(flips.size() == 8);
    std::set<std::vector<double>> distinct(flips.begin(), flips.end());
    CHECK(distinct.size() == 8);
    // Draw 0 is the identity (all +1).
    CHECK(flips[0] == std::vector<double>{1.0, 1.0, 1.0});
}

TEST_CASE("signflip Monte Carlo determinism") {
    const auto a = resample::gen_signflips(30, 5000, 1, 16);  // force MC
    const auto b = resample::gen_signflips(30, 5000, 1, 16);
    CHECK(a == b);
    const auto c = resample::gen_signflips(30, 5000, 2, 16);
    CHECK(a != c);
}

TEST_CASE("signflip draws are order-independent") {
    const auto plan = ResamplePlan::signflips(12, 1000, 99, 16);
    std::vector<double> forward(12), redo(12);
    plan.draw_signs(777, forward.data());
    plan.draw_signs(3, redo.data());    // unrelated draw in between
    plan.draw_signs(777, redo.data());  // re-derive
    CHECK(forward == redo);
}

TEST_CASE("partition exact mode enumerates distinct splits") {
    bool exact = false;
    const auto parts = resample::gen_partitions(2, 2, 100, 3, 20000, &exact);
    CHECK(exact);
    CHECK(parts.size() == 6);
    std::set<std::set<std::uint32_t>> groups;
    for (const auto& p : parts) {
        CHECK(p.size() == 4);
        groups.insert({p[0], p[1]});
    }
    CHECK(groups.size() == 6);
    // Identity split first.
    CHECK(parts[0] == std::vector<std::uint32_t>{0, 1, 2, 3});

    const auto p33 = resample::gen_partitions(3, 3, 100, 3, 20000, &exact);
    CHECK(p33.size() == 20);
}

TEST_CASE("partition Monte Carlo draws are valid permutations") {
    const auto parts = resample::gen_partitions(30, 30, 200, 7, 16);
    CHECK(parts.size() == 200);
    for (const auto& p : parts) {
        std::vector<std::uint32_t> sorted(p.begin(), p.end());
        std::sort(sorted.begin(), sorted.end());
        for (std::uint32_t i = 0; i < 60; ++i) CHECK(sorted[i] == i);
    }
}

TEST_CASE("partition Monte Carlo sampling is uniform over rearrangements") {
    // nx = ny = 2: six splits, 60000 draws, tolerance 0.01 ~ 6.6 sigma.
    const auto plan = ResamplePlan::partitions(2, 2, 60000, 11, 1);  // threshold 1 forces MC
    CHECK(!plan.exact());
    std::map<std::set<std::uint32_t>, int> counts;
    std::vector<std::uint32_t> perm(4);
    for (std::uint64_t i = 0; i < plan.n_draws(); ++i) {
        plan.draw_permutation(i, perm.data());
        counts[{perm[0], perm[1]}] += 1;
    }
    CHECK(counts.size() == 6);
    for (const auto& [key, count] : counts) {
        const double freq = static_cast<double>(count) / 60000.0;
        CHECK(std::fabs(freq - 1.0 / 6.0) < 0.01);
    }
}

TEST_CASE("rowperm exact covers n! and never repeats") {
    const auto plan = ResamplePlan::rowperms(4, 100, 5, 20000);
    CHECK(plan.exact());
    CHECK(plan.n_draws() == 24);
    std::set<std::vector<std::uint32_t>> seen;
    std::vector<std::uint32_t> perm(4);
    for (std::uint64_t i = 0; i < 24; ++i) {
        plan.draw_permutation(i, perm.data());
        seen.insert(std::vector<std::uint32_t>(perm.begin(), perm.end()));
    }
    CHECK(seen.size() == 24);
    plan.draw_permutation(0, perm.data());
    CHECK(perm == std::vector<std::uint32_t>{0, 1, 2, 3});
}

TEST_CASE("labelperm exact covers the multiset space") {
    const auto plan = ResamplePlan::labelperms({2, 2}, 100, 5, 20000);
    CHECK(plan.exact());
    CHECK(plan.n_draws() == 6);
    std::set<std::set<std::uint32_t>> first_group;
    std::vector<std::uint32_t> perm(4);
    for (std::uint64_t i = 0; i < 6; ++i) {
        plan.draw_permutation(i, perm.data());
        first_group.insert({perm[0], perm[1]});
    }
    CHECK(first_group.size() == 6);
    plan.draw_permutation(0, perm.data());
    CHECK(perm == std::vector<std::uint32_t>{0, 1, 2, 3});

    const auto plan333 = ResamplePlan::labelperms({3, 3, 3}, 100, 5, 20000);
    CHECK(plan333.n_draws() == 1680);
    std::set<std::vector<std::uint32_t>> seen;
    std::vector<std::uint32_t> p9(9);
    for (std::uint64_t i = 0; i < 1680; ++i) {
        plan333.draw_permutation(i, p9.data());
        seen.insert(std::vector<std::uint32_t>(p9.begin(), p9.end()));
    }
    CHECK(seen.size() == 1680);
}

TEST_CASE("bootstrap draws stay in range and are deterministic") {
    const auto a = resample::gen_bootstrap(5, 0, true, 1000, 3);
    CHECK(a.size() == 1000);
    for (const auto& draw : a) {
        CHECK(draw.idx_x.size() == 5);
        for (auto idx : draw.idx_x) CHECK(idx < 5);
    }
    const auto b = resample::gen_bootstrap(5, 0, true, 1000, 3);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].idx_x == b[i].idx_x);

    const auto ind = resample::gen_bootstrap(4, 6, false, 500, 9);
    for (const auto& draw : ind) {
        CHECK(draw.idx_x.size() == 4);
        CHECK(draw.idx_y.size() == 6);
        for (auto idx : draw.idx_x) CHECK(idx < 4);
        for (auto idx : draw.idx_y) CHECK(idx < 6);
    }
}

TEST_CASE("dimension guards") {
    CHECK_THROWS_AS(ResamplePlan::signflips(1, 100, 0, 100), Error);
    CHECK_THROWS_AS(ResamplePlan::partitions(1, 5, 100, 0, 100), Error);
    CHECK_THROWS_AS(ResamplePlan::bootstrap(1, 0, true, 100, 0), Error);
}

TEST_CASE("counter rng bounded draws are unbiased enough and deterministic") {
    rng::CounterRng gen(123, 0);
    std::vector<std::uint64_t> counts(7, 0);
    for (int i = 0; i < 70000; ++i) counts[gen.bounded(7)] += 1;
    for (auto c : counts) {
        CHECK(std::fabs(static_cast<double>(c) / 70000.0 - 1.0 / 7.0) < 0.01);
    }
    rng::CounterRng g1(55, 9), g2(55, 9);
    for (int i = 0; i < 100; ++i) CHECK(g1.next_u64() == g2.next_u64());
    rng::CounterRng g3(1, 1);
    for (int i = 0; i < 10000; ++i) {
        const double u = g3.next_open01();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
}
