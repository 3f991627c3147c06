#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bb/dataset.hpp"

namespace bb {

enum class LossKind { Squared, Logistic };

struct MarginalUtilities {
    Eigen::VectorXd s;  // length p, non-negative
    LossKind loss_kind = LossKind::Squared;
    int newton_failures = 0;  // univariate logistic solves that hit the cap
};

/// Per-feature marginal utility from a univariate fit with intercept.
/// Squared loss on standardized data reduces to |cor(X_j, y)|; logistic
/// returns |w_j| from a Newton solve of the marginal likelihood. A solve
/// that fails to converge (perfect separation) is capped at a large value.
MarginalUtilities marginal_utilities(const Dataset& d, LossKind loss);

/// Keeps the ceil(alpha*p) features with the largest utilities, ties broken
/// by smaller index. Returned indices are ascending.
std::pair<std::vector<int>, MarginalUtilities> screen(const Dataset& d, double alpha,
                                                      LossKind loss = LossKind::Squared);

/// Top-m selection from precomputed utilities (same tie rule as screen).
std::vector<int> top_by_utility(const Eigen::VectorXd& s, int m);

/// Default screening fraction: ceil(alpha*p) ~ 10n, capped at p.
double default_alpha(Eigen::Index n, Eigen::Index p);

}  // namespace bb
