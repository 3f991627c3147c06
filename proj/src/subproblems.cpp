#include "bb/subproblems.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "bb/rng.hpp"

namespace bb {

SubproblemBuildResult construct_subproblems(const std::vector<int>& candidates,
                                            const MarginalUtilities& s, int num_subproblems,
                                            double beta, SamplingMode mode, std::uint64_t seed,
                                            double row_fraction, int num_rows) {
    if (candidates.empty()) throw std::invalid_argument("candidate set must be nonempty");
    if (num_subproblems < 1) throw std::invalid_argument("need at least one subproblem");
    if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must be in (0,1]");
    const auto u = candidates.size();
    const auto take = static_cast<std::size_t>(
        std::ceil(beta * static_cast<double>(u)));

    SubproblemBuildResult out;
    std::vector<double> pi(u, 1.0);
    if (mode == SamplingMode::ScreeningSample) {
        double smax = 0.0;
        for (int j : candidates) smax = std::max(smax, s.s[j]);
        if (smax == 0.0) {
            out.all_zero_utilities = true;  // uniform fallback
        } else {
            for (std::size_t i = 0; i < u; ++i) pi[i] = std::exp(s.s[candidates[i]] / smax + 1.0);
        }
    }

    out.specs.resize(static_cast<std::size_t>(num_subproblems));
    for (int m = 0; m < num_subproblems; ++m) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(m)));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        auto& spec = out.specs[static_cast<std::size_t>(m)];
        spec.id = m;
        if (take == u) {
            spec.features = candidates;
        } else {
            std::vector<std::pair<double, int>> keys(u);
            for (std::size_t i = 0; i < u; ++i) {
                double v = unif(rng);
                while (v <= 0.0) v = unif(rng);
                keys[i] = {-std::log(v) / pi[i], candidates[i]};
            }
            std::nth_element(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(take),
                             keys.end());
            spec.features.reserve(take);
            for (std::size_t i = 0; i < take; ++i) spec.features.push_back(keys[i].second);
            std::sort(spec.features.begin(), spec.features.end());
        }
        if (row_fraction < 1.0 && num_rows > 0) {
            const auto keep = static_cast<std::size_t>(
                std::ceil(row_fraction * static_cast<double>(num_rows)));
            std::vector<int> rows(static_cast<std::size_t>(num_rows));
            std::iota(rows.begin(), rows.end(), 0);
            std::shuffle(rows.begin(), rows.end(), rng);
            rows.resize(keep);
            std::sort(rows.begin(), rows.end());
            spec.rows = std::move(rows);
        }
    }
    return out;
}

}  // namespace bb
