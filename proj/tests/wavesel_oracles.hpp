#pragma once

#include "test_util.hpp"

#include <limits>
#include <numeric>
#include <set>

namespace spectral_sift::testing {

inline double nipals_r2(const Matrix& x, const Vector& y, const std::vector<int>& cols, int max_lv) {
    Matrix xs(x.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) xs.col(static_cast<Eigen::Index>(j)) = x.col(cols[j]);
    const int a = std::min({static_cast<int>(cols.size()), max_lv, static_cast<int>(x.rows()) - 1});
    const Vector fit = nipals_fitted(xs, y, a);
    return 1.0 - (y - fit).squaredNorm() / (y.array() - y.mean()).square().sum();
}

/// Exhaustive greedy forward selection: at each step try every remaining
/// usable band and keep the first one with the highest R^2.
inline std::vector<int> greedy_oracle(const Matrix& x, const Vector& y, std::vector<int> selected, int target,
                                      const std::set<int>& excluded, int max_lv) {
    while (static_cast<int>(selected.size()) < target) {
        double best = -std::numeric_limits<double>::infinity();
        int arg = -1;
        for (int b = 0; b < x.cols(); ++b) {
            if (excluded.contains(b) || std::find(selected.begin(), selected.end(), b) != selected.end()) continue;
            auto trial = selected;
            trial.push_back(b);
            const double r2 = nipals_r2(x, y, trial, max_lv);
            if (r2 > best) {
                best = r2;
                arg = b;
            }
        }
        selected.push_back(arg);
    }
    return selected;
}

/// Top-m usable columns by |Pearson r| with y, ties to the lower index.
inline std::vector<int> correlation_oracle(const Matrix& x, const Vector& y, int m, const std::set<int>& excluded) {
    std::vector<std::pair<double, int>> scored;
    for (int b = 0; b < x.cols(); ++b) {
        if (excluded.contains(b)) continue;
        const Vector xc = x.col(b).array() - x.col(b).mean();
        const Vector yc = y.array() - y.mean();
        scored.emplace_back(-std::abs(xc.dot(yc)) / (xc.norm() * yc.norm()), b);
    }
    std::sort(scored.begin(), scored.end());
    std::vector<int> out;
    for (int i = 0; i < m; ++i) out.push_back(scored[static_cast<std::size_t>(i)].second);
    return out;
}

struct CovprocOracleRound {
    std::vector<int> order;     // working-column indices by |w| descending
    std::vector<double> alpha;  // per prefix length
    int best_len = 0;
    Vector score;               // chosen t
    Matrix deflated;            // X after the round
};

/// Rounds of the covariance procedure on an already standardized X and
/// centered y, with alpha recomputed from scratch for every prefix.
inline std::vector<CovprocOracleRound> covproc_oracle(Matrix x, const Vector& y, int rounds) {
    std::vector<CovprocOracleRound> out;
    for (int r = 0; r < rounds; ++r) {
        CovprocOracleRound round;
        Vector w(x.cols());
        for (Eigen::Index j = 0; j < x.cols(); ++j) w(j) = y.dot(x.col(j));
        round.order.resize(static_cast<std::size_t>(x.cols()));
        std::iota(round.order.begin(), round.order.end(), 0);
        std::stable_sort(round.order.begin(), round.order.end(),
                         [&](int a, int b) { return std::abs(w(a)) > std::abs(w(b)); });
        double best = -1.0;
        for (std::size_t len = 1; len <= round.order.size(); ++len) {
            Vector t = Vector::Zero(x.rows());
            for (std::size_t i = 0; i < len; ++i) t += w(round.order[i]) * x.col(round.order[i]);
            const double tt = t.dot(t);
            const double alpha = tt > 0.0 ? std::abs(y.dot(t)) / tt : std::numeric_limits<double>::quiet_NaN();
            round.alpha.push_back(alpha);
            if (std::isfinite(alpha) && alpha > best) {
                best = alpha;
                round.best_len = static_cast<int>(len);
            }
        }
        if (round.best_len == 0) break;
        Vector t = Vector::Zero(x.rows());
        for (int i = 0; i < round.best_len; ++i)
            t += w(round.order[static_cast<std::size_t>(i)]) * x.col(round.order[static_cast<std::size_t>(i)]);
        const RowVector p = (t.transpose() * x) / t.squaredNorm();
        x -= t * p;
        round.score = t;
        round.deflated = x;
        out.push_back(std::move(round));
    }
    return out;
}

} // namespace spectral_sift::testing
