#include "bb/backbone.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include "bb/errors.hpp"
#include "bb/rng.hpp"
#include "bb/screening.hpp"

namespace bb {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int h_bound_for(int m, int k_max, int b_max) {
    const double ratio = static_cast<double>(m) * k_max / std::max(b_max, 1);
    const int h = static_cast<int>(std::ceil(std::log2(std::max(ratio, 1e-300)) + 1.0));
    return std::max(h, 1);
}

}  // namespace

BackboneResult run_backbone(const Dataset& d, const BackboneConfig& cfg,
                            const SubproblemFitter& fit_subproblem,
                            const RelevantExtractor& extract_relevant,
                            const FinalFitter& fit_final) {
    if (cfg.num_subproblems < 1 || cfg.backbone_max < 1 || cfg.k_max < 1)
        throw std::invalid_argument("backbone config requires M, B_max, k_max >= 1");

    BackboneResult out;
    out.h_bound = h_bound_for(cfg.num_subproblems, cfg.k_max, cfg.backbone_max);

    auto t0 = std::chrono::steady_clock::now();
    auto [screened, utilities] = screen(d, cfg.alpha, cfg.screen_loss);
    out.screened = screened;
    out.utilities = utilities;
    out.screen_seconds = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    std::vector<int> candidates = screened;
    std::set<int> backbone;
    int consecutive_no_add = 0;
    bool done = false;
    for (int t = 0; !done && t < out.h_bound; ++t) {
        const int m_t = static_cast<int>(
            std::ceil(static_cast<double>(cfg.num_subproblems) / std::pow(2.0, t)));
        const auto built = construct_subproblems(
            candidates, utilities, m_t, cfg.beta, cfg.sampling_mode,
            derive_seed(cfg.seed, 0xA11, static_cast<std::uint64_t>(t)), cfg.row_fraction,
            static_cast<int>(d.n()));

        // fits are independent given the derived seeds; the union below is
        // applied in (t, m) order so results do not depend on scheduling
        std::vector<std::vector<int>> extracts(built.specs.size());
        for (std::size_t m = 0; m < built.specs.size(); ++m) {
            const auto& spec = built.specs[m];
            Dataset sub = d.select_features(spec.features);
            if (!spec.rows.empty()) sub = sub.select_rows(spec.rows);
            const std::any model = fit_subproblem(
                sub, derive_seed(cfg.seed, static_cast<std::uint64_t>(t),
                                 static_cast<std::uint64_t>(m)));
            std::vector<int> local = extract_relevant(model);
            if (static_cast<int>(local.size()) > cfg.k_max)
                throw ContractViolation("subproblem extracted more than k_max features");
            std::vector<int>& global = extracts[m];
            global.reserve(local.size());
            for (int j : local) {
                if (j < 0 || j >= static_cast<int>(spec.features.size()))
                    throw ContractViolation("extracted index outside the subproblem");
                global.push_back(spec.features[static_cast<std::size_t>(j)]);
            }
            std::sort(global.begin(), global.end());
        }

        std::set<int> unioned;
        bool stopped_in_iteration = false;
        for (std::size_t m = 0; m < built.specs.size(); ++m) {
            const std::size_t before = unioned.size();
            unioned.insert(extracts[m].begin(), extracts[m].end());
            out.per_subproblem.push_back(
                {t, static_cast<int>(m), built.specs[m].features, extracts[m]});
            if (cfg.early_stop && !unioned.empty()) {
                consecutive_no_add = unioned.size() == before ? consecutive_no_add + 1 : 0;
                if (consecutive_no_add >= 2) {
                    stopped_in_iteration = true;
                    break;
                }
            }
        }
        out.iterations_used = t + 1;
        backbone = unioned;

        if (backbone.empty()) {
            out.empty_backbone_fallback = true;
            // top screened features by utility; the screened set is itself the
            // top ceil(alpha p), so this is a subset of it
            const std::vector<int> fallback = top_by_utility(
                utilities.s,
                std::min<int>(cfg.backbone_max, static_cast<int>(screened.size())));
            backbone.insert(fallback.begin(), fallback.end());
            done = true;
        } else if (stopped_in_iteration) {
            out.early_stopped = true;
            done = true;
        } else if (static_cast<int>(backbone.size()) <= cfg.backbone_max) {
            done = true;
        } else {
            std::vector<int> next(backbone.begin(), backbone.end());
            if (next == candidates) {
                out.stalled = true;  // nothing shrank; avoid looping forever
                done = true;
            } else {
                candidates = std::move(next);
            }
        }
    }
    // the iteration budget ran out with the union still above B_max
    if (!done) out.stalled = true;
    out.backbone.assign(backbone.begin(), backbone.end());
    out.subproblem_seconds = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    const Dataset reduced = d.select_features(out.backbone);
    out.final_model = fit_final(reduced, derive_seed(cfg.seed, 0xF1A1));
    out.final_seconds = seconds_since(t0);
    return out;
}

HyperparameterAdvice recommend_hyperparameters(long n, long p, int k_guess, double beta,
                                               double p_sub_estimate, double phi,
                                               bool use_empirical_rule) {
    if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must be in (0,1]");
    if (!(p_sub_estimate >= 0.0 && p_sub_estimate < 1.0))
        throw std::invalid_argument("p_sub_estimate must be in [0,1)");
    if (!(phi < 1.0)) throw std::invalid_argument("phi must be < 1");
    HyperparameterAdvice advice;
    advice.alpha = std::min(
        1.0, std::pow(static_cast<double>(n), 1.0 - phi) / static_cast<double>(p));
    const double target = std::log(advice.alpha * static_cast<double>(p) * k_guess);
    double m;
    if (use_empirical_rule) {
        const double denom = beta >= 1.0 ? std::numeric_limits<double>::infinity()
                                         : std::log(1.0 / (1.0 - beta));
        m = 5.0 + target / (5.0 * denom);
    } else {
        const double survive = 1.0 - beta + beta * p_sub_estimate;
        if (survive <= 0.0) {
            m = 1.0;  // every subproblem recovers the feature with certainty
        } else {
            m = target / std::log(1.0 / survive);
        }
    }
    advice.num_subproblems = std::max(1, static_cast<int>(std::ceil(m)));
    return advice;
}

BackboneDiagnostics backbone_diagnostics(const BackboneResult& result,
                                         const std::vector<int>& truth) {
    BackboneDiagnostics out;
    const std::set<int> tru(truth.begin(), truth.end());
    std::set<int> cumulative;
    for (const auto& rec : result.per_subproblem) {
        std::size_t hits = 0;
        for (int j : rec.extracted)
            if (tru.count(j)) ++hits;
        cumulative.insert(rec.extracted.begin(), rec.extracted.end());
        std::size_t cum_hits = 0;
        for (int j : cumulative)
            if (tru.count(j)) ++cum_hits;
        if (tru.empty()) {
            out.per_subproblem.push_back(1.0);
            out.cumulative.push_back(1.0);
        } else {
            out.per_subproblem.push_back(static_cast<double>(hits) /
                                         static_cast<double>(tru.size()));
            out.cumulative.push_back(static_cast<double>(cum_hits) /
                                     static_cast<double>(tru.size()));
        }
    }
    return out;
}

}  // namespace bb
