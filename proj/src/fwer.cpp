#include <atomic>
#include <cmath>

#include "permstat/parallel.hpp"
#include "permstat/permtests.hpp"
#include "permstat/reference.hpp"
#include "permstat/rng.hpp"

namespace permstat::reference {

DataMatrix sample_normal(std::size_t n_obs, std::size_t n_vars, std::uint64_t seed,
                         std::uint64_t stream) {
    DataMatrix out(n_obs, n_vars);
    rng::CounterRng gen(seed, stream);
    for (std::size_t i = 0; i < n_obs; ++i) {
        for (std::size_t v = 0; v < n_vars; ++v) {
            out.at(i, v) = special::norm_inv(gen.next_open01());
        }
    }
    return out;
}

FwerReport fwer_sim(std::size_t n_vars, std::size_t n_obs, std::uint64_t n_sims, double alpha,
                    CorrectionMethod correction, double effect_shift, std::size_t n_shifted,
                    std::uint64_t seed, std::uint64_t n_perm, unsigned n_threads) {
    if (n_sims < 100) {
        throw Error(ErrorCode::BadArgument, "fwer_sim requires n_sims >= 100");
    }
    if (n_shifted > n_vars) {
        throw Error(ErrorCode::BadArgument, "n_shifted cannot exceed n_vars");
    }
    const bool with_effect = effect_shift != 0.0 && n_shifted > 0;

    std::atomic<std::uint64_t> fwer_hits{0};
    std::atomic<std::uint64_t> power_hits{0};
    parallel::parallel_for(n_sims, parallel::resolve_threads(n_threads),
                           [&](std::uint64_t begin, std::uint64_t end) {
        std::uint64_t local_fwer = 0;
        std::uint64_t local_power = 0;
        for (std::uint64_t s = begin; s < end; ++s) {
            const std::uint64_t sim_seed = rng::mix_seed(seed, s);
            // Distinct derived seeds keep the data stream and the inner
            // test's permutation stream independent.
            DataMatrix x = sample_normal(n_obs, n_vars, rng::mix_seed(sim_seed, 0), 0);
            DataMatrix y = sample_normal(n_obs, n_vars, rng::mix_seed(sim_seed, 0), 1);
            if (with_effect) {
                for (std::size_t i = 0; i < n_obs; ++i) {
                    for (std::size_t v = 0; v < n_shifted; ++v) {
                        y.at(i, v) -= effect_shift;
                    }
                }
            }
            TestConfig cfg;
            cfg.n_perm = n_perm;
            cfg.seed = rng::mix_seed(sim_seed, 1);
            cfg.correction = correction;
            cfg.alpha = alpha;
            cfg.n_threads = 1;
            const PermutationResult res = permuttest2(x, y, cfg);
            bool any_null_hit = false;
            for (std::size_t v = 0; v < n_vars; ++v) {
                const bool hit = res.variables[v].p < alpha;
                if (v < n_shifted && with_effect) {
                    if (hit) ++local_power;
                } else if (hit) {
                    any_null_hit = true;
                }
            }
            if (any_null_hit) ++local_fwer;
        }
        fwer_hits += local_fwer;
        power_hits += local_power;
    });

    FwerReport report;
    report.n_sims = n_sims;
    report.n_vars = n_vars;
    report.n_obs = n_obs;
    report.alpha = alpha;
    report.correction = correction;
    report.effect_shift = effect_shift;
    report.n_shifted = with_effect ? n_shifted : 0;
    report.empirical_fwer =
        static_cast<double>(fwer_hits.load()) / static_cast<double>(n_sims);
    if (with_effect) {
        report.empirical_power = static_cast<double>(power_hits.load()) /
                                 static_cast<double>(n_sims * n_shifted);
    }
    const double f = report.empirical_fwer;
    report.mc_stderr = std::sqrt(f * (1.0 - f) / static_cast<double>(n_sims));
    return report;
}

}  // namespace permstat::reference
