#include "bb/sparse_linear.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <set>

#include "bb/errors.hpp"
#include "bb/rng.hpp"

namespace bb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double point_loss(double y, double t, LossKind loss) {
    if (loss == LossKind::Squared) {
        const double r = y - t;
        return 0.5 * r * r;
    }
    const double m = y * t;
    return m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
}

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

std::vector<int> nonzero_support(const Eigen::VectorXd& w) {
    std::vector<int> s;
    for (Eigen::Index j = 0; j < w.size(); ++j)
        if (w[j] != 0.0) s.push_back(static_cast<int>(j));
    return s;
}

/// min_w sum_i log(1+exp(-y_i (b + x_i.w))) + ||w||^2/(2 gamma), damped Newton.
/// Intercept b is unpenalized. Returns the optimal (w, b).
void logistic_ridge_newton(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double gamma,
                           Eigen::VectorXd& w, double& b, double grad_tol = 1e-8,
                           int max_iters = 100) {
    const auto n = X.rows();
    const auto p = X.cols();
    if (w.size() != p) w = Eigen::VectorXd::Zero(p);
    auto objective = [&](const Eigen::VectorXd& wv, double bv) {
        const Eigen::VectorXd t = X * wv + Eigen::VectorXd::Constant(n, bv);
        double obj = wv.squaredNorm() / (2.0 * gamma);
        for (Eigen::Index i = 0; i < n; ++i) obj += point_loss(y[i], t[i], LossKind::Logistic);
        return obj;
    };
    double obj = objective(w, b);
    for (int it = 0; it < max_iters; ++it) {
        const Eigen::VectorXd t = X * w + Eigen::VectorXd::Constant(n, b);
        Eigen::VectorXd r(n), v(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double pi = sigmoid(t[i]);
            r[i] = pi - (y[i] > 0 ? 1.0 : 0.0);
            v[i] = std::max(pi * (1.0 - pi), 1e-12);
        }
        Eigen::VectorXd grad_w = X.transpose() * r + w / gamma;
        const double grad_b = r.sum();
        if (std::sqrt(grad_w.squaredNorm() + grad_b * grad_b) < grad_tol) return;
        // Newton system over (w, b)
        Eigen::MatrixXd H(p + 1, p + 1);
        H.topLeftCorner(p, p) = X.transpose() * v.asDiagonal() * X;
        H.topLeftCorner(p, p).diagonal().array() += 1.0 / gamma;
        const Eigen::VectorXd Xv = X.transpose() * v;
        H.topRightCorner(p, 1) = Xv;
        H.bottomLeftCorner(1, p) = Xv.transpose();
        H(p, p) = v.sum();
        Eigen::VectorXd g(p + 1);
        g.head(p) = grad_w;
        g[p] = grad_b;
        const Eigen::VectorXd step = H.ldlt().solve(g);
        double alpha = 1.0;
        for (int half = 0; half < 50; ++half) {
            const Eigen::VectorXd wc = w - alpha * step.head(p);
            const double bc = b - alpha * step[p];
            const double cand = objective(wc, bc);
            if (cand <= obj) {
                w = wc;
                b = bc;
                obj = cand;
                break;
            }
            alpha /= 2.0;
        }
    }
}

}  // namespace

double eval_sparse_objective(const Dataset& d, const Eigen::VectorXd& w, double gamma,
                             LossKind loss) {
    const Eigen::VectorXd t = d.X * w;
    double obj = gamma > 0.0 ? w.squaredNorm() / (2.0 * gamma) : 0.0;
    for (Eigen::Index i = 0; i < d.n(); ++i) obj += point_loss(d.y[i], t[i], loss);
    return obj;
}

RegressorSolution fit_on_support(const Dataset& d, const std::vector<int>& support, double gamma,
                                 LossKind loss) {
    RegressorSolution sol;
    sol.loss_kind = loss;
    sol.gamma = gamma;
    sol.w = Eigen::VectorXd::Zero(d.p());
    if (!support.empty()) {
        Eigen::MatrixXd Xs(d.n(), static_cast<Eigen::Index>(support.size()));
        for (std::size_t j = 0; j < support.size(); ++j) Xs.col(static_cast<Eigen::Index>(j)) = d.X.col(support[j]);
        if (loss == LossKind::Squared) {
            Eigen::MatrixXd G = Xs.transpose() * Xs;
            G.diagonal().array() += 1.0 / gamma;
            const Eigen::VectorXd ws = G.ldlt().solve(Xs.transpose() * d.y);
            for (std::size_t j = 0; j < support.size(); ++j) sol.w[support[j]] = ws[static_cast<Eigen::Index>(j)];
        } else {
            Eigen::VectorXd ws = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(support.size()));
            double b = 0.0;
            logistic_ridge_newton(Xs, d.y, gamma, ws, b);
            for (std::size_t j = 0; j < support.size(); ++j) sol.w[support[j]] = ws[static_cast<Eigen::Index>(j)];
            sol.intercept = b;
        }
    }
    sol.support = nonzero_support(sol.w);
    if (loss == LossKind::Logistic && sol.intercept != 0.0) {
        // objective with the unpenalized intercept folded in
        const Eigen::VectorXd t =
            d.X * sol.w + Eigen::VectorXd::Constant(d.n(), sol.intercept);
        double obj = sol.w.squaredNorm() / (2.0 * gamma);
        for (Eigen::Index i = 0; i < d.n(); ++i)
            obj += point_loss(d.y[i], t[i], LossKind::Logistic);
        sol.objective = obj;
    } else {
        sol.objective = eval_sparse_objective(d, sol.w, gamma, loss);
    }
    return sol;
}

// ---------------------------------------------------------------------------
// Elastic net
// ---------------------------------------------------------------------------

double elastic_net_lambda_max(const Dataset& d, double mu, LossKind loss) {
    const double n = static_cast<double>(d.n());
    const double mu_eff = std::max(mu, 1e-3);
    if (loss == LossKind::Squared)
        return (d.X.transpose() * d.y).cwiseAbs().maxCoeff() / (n * mu_eff);
    const double pos = std::count_if(d.y.data(), d.y.data() + d.n(),
                                     [](double v) { return v > 0; }) / n;
    Eigen::VectorXd r(d.n());
    for (Eigen::Index i = 0; i < d.n(); ++i) r[i] = (d.y[i] > 0 ? 1.0 : 0.0) - pos;
    return (d.X.transpose() * r).cwiseAbs().maxCoeff() / (n * mu_eff);
}

namespace {

double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

/// Penalized weighted least squares by cyclic coordinate descent:
/// (1/2n) sum_i v_i (r_i - x_i.w)^2 + lambda [mu |w|_1 + (1-mu)/2 |w|_2^2],
/// with optional unpenalized intercept. Operates in place on w (and b).
bool coordinate_descent(const Eigen::MatrixXd& X, const Eigen::VectorXd& z,
                        const Eigen::VectorXd& v, double lambda, double mu, bool use_intercept,
                        Eigen::VectorXd& w, double& b, int max_iters, double tol) {
    const auto n = X.rows();
    const auto p = X.cols();
    const double nn = static_cast<double>(n);
    Eigen::VectorXd denom(p);
    for (Eigen::Index j = 0; j < p; ++j)
        denom[j] = (X.col(j).array().square() * v.array()).sum() / nn + lambda * (1.0 - mu);
    Eigen::VectorXd resid = z - X * w;
    if (use_intercept) resid.array() -= b;
    const double vsum = v.sum() / nn;
    for (int it = 0; it < max_iters; ++it) {
        double max_delta = 0.0;
        if (use_intercept && vsum > 0) {
            const double nb = b + (v.array() * resid.array()).sum() / nn / vsum;
            resid.array() -= nb - b;
            max_delta = std::max(max_delta, std::abs(nb - b));
            b = nb;
        }
        for (Eigen::Index j = 0; j < p; ++j) {
            if (denom[j] <= 0) continue;
            const double rho =
                (v.array() * X.col(j).array() * resid.array()).sum() / nn +
                (denom[j] - lambda * (1.0 - mu)) * w[j];
            const double nw = soft_threshold(rho, lambda * mu) / denom[j];
            if (nw != w[j]) {
                resid -= X.col(j) * (nw - w[j]);
                max_delta = std::max(max_delta, std::abs(nw - w[j]));
                w[j] = nw;
            }
        }
        if (max_delta < tol) return true;
    }
    return false;
}

}  // namespace

RegressorSolution fit_elastic_net(const Dataset& d, const ElasticNetConfig& cfg) {
    RegressorSolution sol;
    sol.loss_kind = cfg.loss;
    sol.gamma = 0.0;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d.p());
    double b = 0.0;
    if (cfg.loss == LossKind::Squared) {
        const Eigen::VectorXd ones = Eigen::VectorXd::Ones(d.n());
        sol.converged = coordinate_descent(d.X, d.y, ones, cfg.lambda, cfg.mu, false, w, b,
                                           cfg.max_iters, cfg.tol);
    } else {
        // iteratively reweighted quadratic approximation around the current point
        sol.converged = false;
        for (int outer = 0; outer < 50; ++outer) {
            const Eigen::VectorXd t = d.X * w + Eigen::VectorXd::Constant(d.n(), b);
            Eigen::VectorXd v(d.n()), z(d.n());
            for (Eigen::Index i = 0; i < d.n(); ++i) {
                const double pi = sigmoid(t[i]);
                const double vi = std::max(pi * (1.0 - pi), 1e-6);
                v[i] = vi;
                z[i] = t[i] + ((d.y[i] > 0 ? 1.0 : 0.0) - pi) / vi;
            }
            const Eigen::VectorXd w_prev = w;
            const double b_prev = b;
            coordinate_descent(d.X, z, v, cfg.lambda, cfg.mu, true, w, b, cfg.max_iters,
                               cfg.tol);
            const double delta = std::max((w - w_prev).cwiseAbs().maxCoeff(),
                                          std::abs(b - b_prev));
            if (delta < cfg.tol * 10) {
                sol.converged = true;
                break;
            }
        }
    }
    for (Eigen::Index j = 0; j < d.p(); ++j)
        if (std::abs(w[j]) <= cfg.coef_threshold) w[j] = 0.0;
    sol.w = w;
    sol.intercept = b;
    sol.support = nonzero_support(w);
    // report the penalized elastic-net objective
    const Eigen::VectorXd t = d.X * w + Eigen::VectorXd::Constant(d.n(), b);
    double obj = 0.0;
    for (Eigen::Index i = 0; i < d.n(); ++i) obj += point_loss(d.y[i], t[i], cfg.loss);
    obj /= static_cast<double>(d.n());
    obj += cfg.lambda * (cfg.mu * w.lpNorm<1>() + 0.5 * (1.0 - cfg.mu) * w.squaredNorm());
    sol.objective = obj;
    return sol;
}

double prediction_loss(const Dataset& d, const std::vector<int>& rows, const Eigen::VectorXd& w,
                       LossKind loss) {
    double total = 0.0;
    for (int i : rows) {
        const double t = d.X.row(i) * w;
        total += point_loss(d.y[i], t, loss);
    }
    return total / std::max<std::size_t>(rows.size(), 1);
}

std::pair<ElasticNetConfig, RegressorSolution> elastic_net_cv(
    const Dataset& d, const SplitIndices& split, const std::vector<double>& mus, int k_max,
    int grid_len, LossKind loss, ElasticNetCvStats* stats) {
    if (mus.empty() || grid_len < 2) throw InvalidGrid("need mus and grid_len >= 2");
    const Dataset train = d.select_rows(split.train);

    ElasticNetCvStats local;
    ElasticNetCvStats* st = stats ? stats : &local;
    double best_val = kInf;
    ElasticNetConfig best_cfg;
    bool found = false;

    for (double mu : mus) {
        const double lmax = elastic_net_lambda_max(train, mu, loss);
        // bisection for the largest lambda giving >= k_max nonzeros
        double lo = lmax * 1e-6, hi = lmax;
        auto nnz_at = [&](double lambda) {
            ElasticNetConfig c;
            c.lambda = lambda;
            c.mu = mu;
            c.loss = loss;
            ++st->bisection_fits;
            return static_cast<int>(fit_elastic_net(train, c).support.size());
        };
        double lmin = lo;
        if (nnz_at(lo) >= k_max) {
            for (int it = 0; it < 20; ++it) {
                const double mid = std::sqrt(lo * hi);
                if (nnz_at(mid) >= k_max)
                    lo = mid;
                else
                    hi = mid;
            }
            lmin = lo;
        }
        const double ratio = std::pow(lmin / lmax, 1.0 / (grid_len - 1));
        ElasticNetConfig c;
        c.mu = mu;
        c.loss = loss;
        for (int g = 0; g < grid_len; ++g) {
            c.lambda = lmax * std::pow(ratio, g);
            ++st->grid_fits;
            RegressorSolution fit = fit_elastic_net(train, c);
            const double val = prediction_loss(d, split.validation, fit.w, loss);
            if (val < best_val) {
                best_val = val;
                best_cfg = c;
                found = true;
            }
        }
    }
    if (!found) best_cfg.loss = loss;
    RegressorSolution refit = fit_elastic_net(d, best_cfg);
    return {best_cfg, std::move(refit)};
}

// ---------------------------------------------------------------------------
// Boolean relaxation: capped-simplex projection + subgradient ascent
// ---------------------------------------------------------------------------

Eigen::VectorXd project_capped_simplex(const Eigen::VectorXd& v, int k) {
    const auto p = v.size();
    Eigen::VectorXd z = v.cwiseMax(0.0).cwiseMin(1.0);
    const double kk = static_cast<double>(std::min<Eigen::Index>(k, p));
    if (z.sum() <= kk + 1e-15) return z;
    // find tau with sum clamp(v - tau, 0, 1) = k; monotone, bisection
    double lo = 0.0, hi = v.maxCoeff();
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double s = (v.array() - mid).cwiseMax(0.0).cwiseMin(1.0).sum();
        if (s > kk)
            lo = mid;
        else
            hi = mid;
    }
    const double tau = 0.5 * (lo + hi);
    return (v.array() - tau).cwiseMax(0.0).cwiseMin(1.0);
}

namespace {

/// Conjugate gradient for (I + gamma * X diag(z) X^T) alpha = y, warm started.
void solve_dual_cg(const Eigen::MatrixXd& X, const Eigen::VectorXd& z, double gamma,
                   const Eigen::VectorXd& y, Eigen::VectorXd& alpha, double tol = 1e-9) {
    const auto n = X.rows();
    auto apply = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
        return v + gamma * (X * (z.asDiagonal() * (X.transpose() * v)));
    };
    if (alpha.size() != n) alpha = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd r = y - apply(alpha);
    Eigen::VectorXd p = r;
    double rs = r.squaredNorm();
    const double target = tol * tol * y.squaredNorm();
    for (Eigen::Index it = 0; it < 2 * n && rs > target; ++it) {
        const Eigen::VectorXd Ap = apply(p);
        const double denom = p.dot(Ap);
        if (denom <= 0) break;
        const double a = rs / denom;
        alpha += a * p;
        r -= a * Ap;
        const double rs_new = r.squaredNorm();
        p = r + (rs_new / rs) * p;
        rs = rs_new;
    }
}

std::vector<int> top_k_indices(const Eigen::VectorXd& v, int k) {
    std::vector<int> idx(static_cast<std::size_t>(v.size()));
    std::iota(idx.begin(), idx.end(), 0);
    k = std::min<int>(k, static_cast<int>(v.size()));
    auto better = [&v](int a, int b) { return v[a] > v[b] || (v[a] == v[b] && a < b); };
    std::nth_element(idx.begin(), idx.begin() + k, idx.end(), better);
    idx.resize(static_cast<std::size_t>(k));
    std::sort(idx.begin(), idx.end());
    return idx;
}

}  // namespace

RegressorSolution fit_relaxation_subgradient(const Dataset& d, const SubgradientConfig& cfg,
                                             Eigen::VectorXd* z_out) {
    return fit_relaxation_subgradient_from(d, cfg, nullptr, z_out);
}

RegressorSolution fit_relaxation_subgradient_from(const Dataset& d,
                                                  const SubgradientConfig& cfg,
                                                  const Eigen::VectorXd* z0,
                                                  Eigen::VectorXd* z_out) {
    const auto p = d.p();
    const int k = std::min<int>(cfg.k, static_cast<int>(p));
    Eigen::VectorXd z;
    if (z0 && z0->size() == p)
        z = project_capped_simplex(*z0, k);
    else
        z = Eigen::VectorXd::Constant(p, std::min(1.0, static_cast<double>(k) /
                                                            static_cast<double>(p)));
    Eigen::VectorXd alpha;         // dual vector, warm started across iterations
    Eigen::VectorXd wz;            // logistic inner weights, warm started
    double bz = 0.0;
    double step0 = 0.0;
    for (int t = 1; t <= cfg.max_iters; ++t) {
        Eigen::VectorXd g(p);
        if (cfg.loss == LossKind::Squared) {
            solve_dual_cg(d.X, z, cfg.gamma, d.y, alpha);
            const Eigen::VectorXd corr = d.X.transpose() * alpha;
            g = (cfg.gamma / 2.0) * corr.array().square();
        } else {
            // weighted logistic ridge on sqrt(z)-scaled features
            const Eigen::VectorXd sz = z.array().sqrt();
            const Eigen::MatrixXd Xz = d.X * sz.asDiagonal();
            if (wz.size() != p) wz = Eigen::VectorXd::Zero(p);
            logistic_ridge_newton(Xz, d.y, cfg.gamma, wz, bz, 1e-7, 30);
            const Eigen::VectorXd tvec = Xz * wz + Eigen::VectorXd::Constant(d.n(), bz);
            if (alpha.size() != d.n()) alpha.resize(d.n());
            for (Eigen::Index i = 0; i < d.n(); ++i)
                alpha[i] = d.y[i] * sigmoid(-d.y[i] * tvec[i]);
            const Eigen::VectorXd corr = d.X.transpose() * alpha;
            g = (cfg.gamma / 2.0) * corr.array().square();
        }
        if (t == 1) {
            const double gnorm = g.cwiseAbs().maxCoeff();
            step0 = cfg.step_scale / std::max(gnorm, 1e-12);
        }
        const double step = step0 / std::sqrt(static_cast<double>(t));
        const Eigen::VectorXd z_next = project_capped_simplex(z + step * g, k);
        const double delta = (z_next - z).cwiseAbs().maxCoeff();
        z = z_next;
        if (delta < cfg.tol) break;
    }
    if (z_out) *z_out = z;
    RegressorSolution sol = fit_on_support(d, top_k_indices(z, k), cfg.gamma, cfg.loss);
    sol.certified = false;
    sol.gap = 0.0;
    return sol;
}

// ---------------------------------------------------------------------------
// Outer approximation + branch and bound
// ---------------------------------------------------------------------------

namespace {

struct Cut {
    double base;        // c(S) - g . z_S
    Eigen::VectorXd g;  // supergradient, all entries <= 0
};

/// Evaluates the exact inner cost and a valid cut at support S.
Cut make_cut(const Dataset& d, const std::vector<int>& support, double gamma, LossKind loss,
             double* value_out, RegressorSolution* sol_out) {
    RegressorSolution sol = fit_on_support(d, support, gamma, loss);
    Eigen::VectorXd alpha(d.n());
    if (loss == LossKind::Squared) {
        alpha = d.y - d.X * sol.w;
    } else {
        const Eigen::VectorXd t =
            d.X * sol.w + Eigen::VectorXd::Constant(d.n(), sol.intercept);
        for (Eigen::Index i = 0; i < d.n(); ++i)
            alpha[i] = d.y[i] * sigmoid(-d.y[i] * t[i]);
    }
    Cut cut;
    const Eigen::VectorXd corr = d.X.transpose() * alpha;
    cut.g = -(gamma / 2.0) * corr.array().square();
    double gz = 0.0;
    for (int j : support) gz += cut.g[j];
    cut.base = sol.objective - gz;
    if (value_out) *value_out = sol.objective;
    if (sol_out) *sol_out = std::move(sol);
    return cut;
}

struct Node {
    double lb;
    int pos;                    // next position in the static feature order
    std::vector<int> in;        // chosen features (original indices)
    int cuts_seen;              // cut count when lb was computed
    bool operator<(const Node& o) const { return lb > o.lb; }  // min-heap
};

}  // namespace

RegressorSolution fit_exact_cutting_planes(const Dataset& d, const CuttingPlaneConfig& cfg,
                                           const std::optional<std::vector<int>>& warm_start) {
    const auto t_start = std::chrono::steady_clock::now();
    const int p = static_cast<int>(d.p());
    const int k = std::min(cfg.k, p);

    if (k >= p) {
        std::vector<int> all(static_cast<std::size_t>(p));
        std::iota(all.begin(), all.end(), 0);
        RegressorSolution sol = fit_on_support(d, all, cfg.gamma, cfg.loss);
        sol.certified = true;
        sol.gap = 0.0;
        return sol;
    }

    // warm start: caller-provided support, else the subgradient heuristic
    std::vector<int> warm;
    if (warm_start.has_value()) {
        warm = *warm_start;
        if (static_cast<int>(warm.size()) > k) warm.resize(static_cast<std::size_t>(k));
    } else {
        SubgradientConfig sg;
        sg.k = k;
        sg.gamma = cfg.gamma;
        sg.loss = cfg.loss;
        warm = fit_relaxation_subgradient(d, sg).support;
    }

    std::vector<Cut> cuts;
    std::set<std::vector<int>> evaluated;
    RegressorSolution incumbent;
    double ub = kInf;

    auto consider = [&](std::vector<int> support) {
        std::sort(support.begin(), support.end());
        if (!evaluated.insert(support).second) return;
        double value = 0.0;
        RegressorSolution sol;
        cuts.push_back(make_cut(d, support, cfg.gamma, cfg.loss, &value, &sol));
        if (value < ub) {
            ub = value;
            incumbent = std::move(sol);
        }
    };

    consider(warm);
    // second seed cut: top-k by marginal correlation
    {
        const Eigen::VectorXd corr = (d.X.transpose() * d.y).cwiseAbs();
        consider(top_k_indices(corr, k));
    }

    // static branching order: descending root-cut magnitude
    std::vector<int> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), 0);
    {
        const Eigen::VectorXd& g0 = cuts.front().g;
        std::stable_sort(order.begin(), order.end(),
                         [&g0](int a, int b) { return g0[a] < g0[b]; });
    }

    // suffix_min[r][pos*(k+1)+b] = sum of the b smallest cut coefficients in
    // the order suffix starting at pos (all coefficients are <= 0)
    std::vector<std::vector<double>> suffix_min;
    auto build_table = [&](const Cut& cut) {
        std::vector<double> tab(static_cast<std::size_t>((p + 1) * (k + 1)), 0.0);
        for (int pos = p - 1; pos >= 0; --pos) {
            const double gj = cut.g[order[static_cast<std::size_t>(pos)]];
            for (int b = 1; b <= k; ++b) {
                const double skip = tab[static_cast<std::size_t>((pos + 1) * (k + 1) + b)];
                const double take = gj + tab[static_cast<std::size_t>((pos + 1) * (k + 1) + b - 1)];
                tab[static_cast<std::size_t>(pos * (k + 1) + b)] = std::min(skip, take);
            }
        }
        suffix_min.push_back(std::move(tab));
    };
    for (const Cut& c : cuts) build_table(c);

    auto node_bound = [&](const std::vector<int>& in, int pos) {
        const int budget = k - static_cast<int>(in.size());
        double best = -kInf;
        for (std::size_t r = 0; r < cuts.size(); ++r) {
            double v = cuts[r].base;
            for (int j : in) v += cuts[r].g[j];
            v += suffix_min[r][static_cast<std::size_t>(pos * (k + 1) + budget)];
            best = std::max(best, v);
        }
        return best;
    };

    auto rel_gap = [&](double lb) {
        return (ub - lb) / std::max(std::abs(ub), 1e-12);
    };

    std::priority_queue<Node> open;
    open.push({node_bound({}, 0), 0, {}, static_cast<int>(cuts.size())});
    long nodes = 0;
    double lb_final = open.top().lb;
    bool hit_limit = false;

    while (!open.empty()) {
        Node node = open.top();
        open.pop();
        lb_final = node.lb;
        if (rel_gap(node.lb) <= cfg.gap_tol) break;
        if (node.cuts_seen < static_cast<int>(cuts.size())) {
            // refresh a stale bound with the cuts added since it was queued
            node.lb = std::max(node.lb, node_bound(node.in, node.pos));
            node.cuts_seen = static_cast<int>(cuts.size());
            if (rel_gap(node.lb) > cfg.gap_tol && node.lb > lb_final) {
                open.push(std::move(node));
                continue;
            }
            if (rel_gap(node.lb) <= cfg.gap_tol) { lb_final = node.lb; break; }
        }
        ++nodes;
        if (nodes >= cfg.node_limit) { hit_limit = true; break; }
        if ((nodes & 0xff) == 0) {
            const double elapsed =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
                    .count();
            if (elapsed > cfg.time_limit_sec) { hit_limit = true; break; }
        }
        if (static_cast<int>(node.in.size()) == k || node.pos == p) {
            const std::size_t before = cuts.size();
            consider(node.in);
            for (std::size_t r = before; r < cuts.size(); ++r) build_table(cuts[r]);
            continue;
        }
        const int feat = order[static_cast<std::size_t>(node.pos)];
        // include branch
        {
            Node child;
            child.in = node.in;
            child.in.push_back(feat);
            child.pos = node.pos + 1;
            child.lb = node_bound(child.in, child.pos);
            child.cuts_seen = static_cast<int>(cuts.size());
            if (rel_gap(child.lb) > cfg.gap_tol) open.push(std::move(child));
        }
        // exclude branch
        {
            Node child;
            child.in = node.in;
            child.pos = node.pos + 1;
            if (p - child.pos >= 1 || !child.in.empty()) {
                child.lb = node_bound(child.in, child.pos);
                child.cuts_seen = static_cast<int>(cuts.size());
                if (rel_gap(child.lb) > cfg.gap_tol) open.push(std::move(child));
            }
        }
    }
    if (open.empty()) lb_final = ub;  // tree exhausted: proven optimal
    lb_final = std::min(lb_final, ub);

    incumbent.certified = true;
    incumbent.gap = std::max(0.0, rel_gap(lb_final));
    incumbent.converged = !hit_limit;
    return incumbent;
}

std::vector<int> randomized_rounding(const Eigen::VectorXd& z_relaxed, int rounds, int k_max,
                                     std::uint64_t seed) {
    std::set<int> unioned;
    Rng rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int r = 0; r < rounds; ++r) {
        std::vector<int> drawn;
        for (Eigen::Index j = 0; j < z_relaxed.size(); ++j)
            if (unif(rng) < z_relaxed[j]) drawn.push_back(static_cast<int>(j));
        if (static_cast<int>(drawn.size()) > k_max) {
            // keep the k_max features with the largest indicator values
            std::stable_sort(drawn.begin(), drawn.end(), [&](int a, int b) {
                return z_relaxed[a] > z_relaxed[b];
            });
            drawn.resize(static_cast<std::size_t>(k_max));
        }
        unioned.insert(drawn.begin(), drawn.end());
    }
    return {unioned.begin(), unioned.end()};
}

IncrementalKResult cv_incremental_k(const Dataset& d, const SplitIndices& split, int k0,
                                    int k_step, SparseSolver solver, double gamma,
                                    LossKind loss, double rel_tol, int k_cap) {
    if (k0 < 1 || k_step < 1) throw InvalidGrid("need k0 >= 1 and k_step >= 1");
    if (k0 >= static_cast<int>(split.train.size()))
        throw InvalidGrid("k0 must be smaller than the training sample count");
    const Dataset train = d.select_rows(split.train);
    if (k_cap <= 0) k_cap = static_cast<int>(std::min<Eigen::Index>(d.p(), d.n() - 1));
    k_cap = std::max(k_cap, k0);

    struct Fit {
        int k;
        RegressorSolution sol;
        Eigen::VectorXd z;
        double val;
    };
    std::vector<Fit> fits;
    auto fit_at = [&](int k, const Fit* prev) {
        Fit f;
        f.k = k;
        if (solver == SparseSolver::Subgradient) {
            SubgradientConfig cfg;
            cfg.k = k;
            cfg.gamma = gamma;
            cfg.loss = loss;
            const Eigen::VectorXd* z0 = prev && prev->z.size() ? &prev->z : nullptr;
            f.sol = fit_relaxation_subgradient_from(train, cfg, z0, &f.z);
        } else {
            CuttingPlaneConfig cfg;
            cfg.k = k;
            cfg.gamma = gamma;
            cfg.loss = loss;
            std::optional<std::vector<int>> warm;
            if (prev) warm = prev->sol.support;
            f.sol = fit_exact_cutting_planes(train, cfg, warm);
        }
        f.val = prediction_loss(d, split.validation, f.sol.w, loss);
        return f;
    };

    auto ensure = [&](std::size_t i) {
        while (fits.size() <= i) {
            const int k = k0 + static_cast<int>(fits.size()) * k_step;
            if (k > k_cap) return false;
            const Fit* prev = fits.empty() ? nullptr : &fits.back();
            fits.push_back(fit_at(k, prev));
        }
        return true;
    };

    ensure(0);
    std::size_t chosen = 0;
    for (std::size_t i = 0;; ++i) {
        if (!ensure(i + 2)) {
            // grid exhausted: pick the best validation loss seen
            chosen = 0;
            for (std::size_t j = 1; j < fits.size(); ++j)
                if (fits[j].val < fits[chosen].val) chosen = j;
            break;
        }
        const double base = fits[i].val;
        const double denom = std::max(std::abs(base), 1e-12);
        const double imp1 = (base - fits[i + 1].val) / denom;
        const double imp2 = (base - fits[i + 2].val) / denom;
        if (imp1 < rel_tol && imp2 < rel_tol) {
            chosen = i;
            break;
        }
    }

    IncrementalKResult out;
    out.k_star = fits[chosen].k;
    // refit on the full data, warm-started from the selected training fit
    if (solver == SparseSolver::Subgradient) {
        SubgradientConfig cfg;
        cfg.k = out.k_star;
        cfg.gamma = gamma;
        cfg.loss = loss;
        out.solution = fit_relaxation_subgradient_from(d, cfg, &fits[chosen].z, nullptr);
    } else {
        CuttingPlaneConfig cfg;
        cfg.k = out.k_star;
        cfg.gamma = gamma;
        cfg.loss = loss;
        out.solution = fit_exact_cutting_planes(d, cfg, fits[chosen].sol.support);
    }
    return out;
}

std::vector<double> gamma_grid(const Dataset& d, int k, int l) {
    if (l < 2) throw InvalidGrid("gamma grid needs l >= 2");
    const double n = static_cast<double>(d.n());
    const double p = static_cast<double>(d.p());
    const double max_row = d.X.rowwise().squaredNorm().maxCoeff();
    const double g0 = p / (static_cast<double>(k) * n * max_row);
    const double g1 = 1.0 / std::sqrt(n);
    std::vector<double> grid(static_cast<std::size_t>(l));
    const double ratio = std::pow(g1 / g0, 1.0 / (l - 1));
    for (int i = 0; i < l; ++i) grid[static_cast<std::size_t>(i)] = g0 * std::pow(ratio, i);
    grid.front() = g0;
    grid.back() = g1;
    return grid;
}

RegressorSolution brute_force_best_subset(const Dataset& d, int k, double gamma,
                                          LossKind loss) {
    const int p = static_cast<int>(d.p());
    k = std::min(k, p);
    double combos = 1.0;
    for (int i = 0; i < k; ++i) combos *= static_cast<double>(p - i) / (i + 1);
    if (combos > 1e6) throw TooLarge("C(p,k) exceeds the enumeration guard");

    RegressorSolution best;
    best.objective = kInf;
    std::vector<int> comb(static_cast<std::size_t>(k));
    std::iota(comb.begin(), comb.end(), 0);
    for (;;) {
        RegressorSolution sol = fit_on_support(d, comb, gamma, loss);
        if (sol.objective < best.objective) best = std::move(sol);
        // next combination, lexicographic
        int i = k - 1;
        while (i >= 0 && comb[static_cast<std::size_t>(i)] == p - k + i) --i;
        if (i < 0) break;
        ++comb[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j)
            comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
    }
    best.certified = true;
    best.gap = 0.0;
    return best;
}

}  // namespace bb
