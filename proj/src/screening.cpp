#include "bb/screening.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bb {

namespace {

constexpr double kUtilityCap = 1e6;
constexpr int kNewtonMaxIters = 100;
constexpr double kNewtonTol = 1e-10;

double abs_correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const double n = static_cast<double>(x.size());
    const double mx = x.mean(), my = y.mean();
    const Eigen::ArrayXd cx = x.array() - mx, cy = y.array() - my;
    const double sx = std::sqrt(cx.square().sum() / n);
    const double sy = std::sqrt(cy.square().sum() / n);
    if (sx == 0.0 || sy == 0.0) return 0.0;
    return std::abs((cx * cy).sum() / n / (sx * sy));
}

double logistic_nll(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double w0, double w) {
    double nll = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double m = y[i] * (w0 + w * x[i]);
        // stable log(1 + exp(-m))
        nll += m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
    }
    return nll / static_cast<double>(x.size());
}

/// Univariate logistic MLE with intercept: 2x2 damped Newton.
/// Returns false if the gradient tolerance was not reached.
bool logistic_marginal_fit(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double* w_out) {
    const double n = static_cast<double>(x.size());
    double w0 = 0.0, w = 0.0;
    double nll = logistic_nll(x, y, w0, w);
    for (int it = 0; it < kNewtonMaxIters; ++it) {
        double g0 = 0.0, g1 = 0.0, h00 = 0.0, h01 = 0.0, h11 = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            const double t = w0 + w * x[i];
            const double p = 1.0 / (1.0 + std::exp(-t));
            const double r = p - (y[i] > 0 ? 1.0 : 0.0);
            const double v = p * (1.0 - p);
            g0 += r;
            g1 += r * x[i];
            h00 += v;
            h01 += v * x[i];
            h11 += v * x[i] * x[i];
        }
        g0 /= n; g1 /= n; h00 /= n; h01 /= n; h11 /= n;
        if (std::sqrt(g0 * g0 + g1 * g1) < kNewtonTol) {
            *w_out = w;
            return true;
        }
        const double det = h00 * h11 - h01 * h01;
        double d0, d1;
        if (det > 1e-14) {
            d0 = (h11 * g0 - h01 * g1) / det;
            d1 = (h00 * g1 - h01 * g0) / det;
        } else {
            d0 = g0;
            d1 = g1;
        }
        double step = 1.0;
        for (int half = 0; half < 40; ++half) {
            const double cand = logistic_nll(x, y, w0 - step * d0, w - step * d1);
            if (cand <= nll) {
                w0 -= step * d0;
                w -= step * d1;
                nll = cand;
                break;
            }
            step /= 2.0;
        }
    }
    *w_out = w;
    return false;
}

}  // namespace

MarginalUtilities marginal_utilities(const Dataset& d, LossKind loss) {
    MarginalUtilities out;
    out.loss_kind = loss;
    out.s.resize(d.p());
    for (Eigen::Index j = 0; j < d.p(); ++j) {
        if (loss == LossKind::Squared) {
            out.s[j] = abs_correlation(d.X.col(j), d.y);
        } else {
            double w = 0.0;
            if (!logistic_marginal_fit(d.X.col(j), d.y, &w)) {
                out.s[j] = kUtilityCap;
                ++out.newton_failures;
            } else {
                out.s[j] = std::min(std::abs(w), kUtilityCap);
            }
        }
    }
    return out;
}

std::vector<int> top_by_utility(const Eigen::VectorXd& s, int m) {
    const int p = static_cast<int>(s.size());
    m = std::clamp(m, 0, p);
    std::vector<int> idx(static_cast<std::size_t>(p));
    std::iota(idx.begin(), idx.end(), 0);
    auto better = [&s](int a, int b) { return s[a] > s[b] || (s[a] == s[b] && a < b); };
    std::nth_element(idx.begin(), idx.begin() + m, idx.end(), better);
    idx.resize(static_cast<std::size_t>(m));
    std::sort(idx.begin(), idx.end());
    return idx;
}

std::pair<std::vector<int>, MarginalUtilities> screen(const Dataset& d, double alpha,
                                                      LossKind loss) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in (0,1]");
    MarginalUtilities s = marginal_utilities(d, loss);
    const int keep = static_cast<int>(std::ceil(alpha * static_cast<double>(d.p())));
    return {top_by_utility(s.s, keep), std::move(s)};
}

double default_alpha(Eigen::Index n, Eigen::Index p) {
    const double target = 10.0 * static_cast<double>(n);
    return std::min(1.0, target / static_cast<double>(p));
}

}  // namespace bb
