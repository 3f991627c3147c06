#pragma once

#include <cstdint>
#include <vector>

#include "bb/screening.hpp"

namespace bb {

enum class SamplingMode { ScreeningSample, RandomSample };

struct SubproblemSpec {
    int id = 0;
    std::vector<int> features;  // ascending, size ceil(beta*|U|)
    std::vector<int> rows;      // empty means all rows
};

/// Weighted feature sampling for subproblem construction.
///
/// ScreeningSample normalizes utilities over U, weights pi_j = exp(s_j + 1)
/// and draws ceil(beta*|U|) features without replacement, inclusion at each
/// draw proportional to pi over the remainder (realized with exponential
/// race keys, key_j = -log(u_j)/pi_j, keeping the smallest keys).
/// RandomSample uses pi_j = 1. If every utility is zero in ScreeningSample
/// mode the sampler falls back to uniform weights and reports it.
struct SubproblemBuildResult {
    std::vector<SubproblemSpec> specs;
    bool all_zero_utilities = false;
};

SubproblemBuildResult construct_subproblems(const std::vector<int>& candidates,
                                            const MarginalUtilities& s, int num_subproblems,
                                            double beta, SamplingMode mode, std::uint64_t seed,
                                            double row_fraction = 1.0, int num_rows = 0);

}  // namespace bb
