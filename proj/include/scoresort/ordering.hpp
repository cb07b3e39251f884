#ifndef SCORESORT_ORDERING_HPP
#define SCORESORT_ORDERING_HPP

#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "scoresort/common.hpp"
#include "scoresort/dataset.hpp"
#include "scoresort/graph.hpp"
#include "scoresort/kernels.hpp"
#include "scoresort/scm.hpp"
#include "scoresort/score_matching.hpp"

namespace scoresort {

struct OrderingConfig {
    enum class Estimator { Stein, Analytic };

    Estimator estimator = Estimator::Stein;
    const ScmSpec* analytic_spec = nullptr;   // required for Analytic
    double ridge = 0.01;
    std::optional<double> fixed_bandwidth;    // empty: median heuristic, recomputed each round
    bool refit_each_round = true;
};

// Per-round diagnostics, in removal order (last leaf first).
struct RoundInfo {
    int leaf = -1;
    double bandwidth = 0.0;
    Vector variances;  // leaf statistic per remaining column
};

namespace detail {

inline int argmin_lowest_index(const Vector& v) {
    int best = 0;
    for (int j = 1; j < v.size(); ++j)
        if (v[j] < v[best]) best = j;
    return best;
}

inline Matrix select_columns(const Matrix& x, const std::vector<int>& cols) {
    Matrix out(x.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = x.col(cols[j]);
    return out;
}

// Common leaf-removal loop: `statistic` maps the active sub-dataset to one
// value per active column; the argmin column is removed each round.
template <typename StatisticFn>
TopOrder iterative_leaf_removal(const Dataset& data, const OrderingConfig& cfg, StatisticFn&& statistic,
                                std::vector<RoundInfo>* log) {
    const int d = static_cast<int>(data.d());
    if (data.n() < 2 && d > 1) throw ParameterError("ordering requires n >= 2");
    std::vector<int> active(static_cast<std::size_t>(d));
    std::iota(active.begin(), active.end(), 0);

    std::vector<int> reversed;  // leaves, last removed first
    reversed.reserve(static_cast<std::size_t>(d));

    std::optional<Vector> frozen;  // statistic from round 0 when not refitting
    int round = 0;
    while (active.size() > 1) {
        Vector stat;
        double bandwidth = 0.0;
        try {
            if (cfg.refit_each_round || !frozen) {
                stat = statistic(active, bandwidth);
                if (!cfg.refit_each_round) frozen = stat;
            } else {
                stat = *frozen;
            }
        } catch (const std::exception& e) {
            throw NumericalError("ordering round " + std::to_string(round) + ": " + e.what());
        }
        const int lam = argmin_lowest_index(stat);
        if (log) log->push_back({active[static_cast<std::size_t>(lam)], bandwidth, stat});
        reversed.push_back(active[static_cast<std::size_t>(lam)]);
        active.erase(active.begin() + lam);
        if (frozen && !cfg.refit_each_round) {
            Vector next(frozen->size() - 1);
            for (int j = 0, k = 0; j < frozen->size(); ++j)
                if (j != lam) next[k++] = (*frozen)[j];
            frozen = next;
        }
        ++round;
    }
    reversed.push_back(active.front());

    TopOrder order;
    order.perm.assign(reversed.rbegin(), reversed.rend());
    return order;
}

struct SteinStatistic {
    const Dataset& data;
    const OrderingConfig& cfg;
    bool use_hessian;

    Vector operator()(const std::vector<int>& active, double& bandwidth_out) const {
        const Matrix sub = select_columns(data.values, active);
        KernelConfig kc;
        kc.bandwidth = cfg.fixed_bandwidth ? *cfg.fixed_bandwidth : median_heuristic(sub);
        kc.ridge = cfg.ridge;
        bandwidth_out = kc.bandwidth;
        const ScoreEstimate est = estimate_score(sub, kc, use_hessian);
        return column_variances(use_hessian ? *est.JDiag : est.G);
    }
};

struct AnalyticStatistic {
    const Dataset& data;
    const ScmSpec& spec;

    Vector operator()(const std::vector<int>& active, double& bandwidth_out) const {
        bandwidth_out = 0.0;
        // Valid only while removed nodes were leaves of the working graph; the
        // ancestral-set check inside analytic_score_subset enforces this.
        return column_variances(analytic_score_subset(spec, data, active));
    }
};

}  // namespace detail

// ScoreSort: repeatedly estimate the score of the remaining variables, take
// the column of minimal variance as the current leaf, and drop it.
inline TopOrder score_sort(const Dataset& data, const OrderingConfig& cfg, std::vector<RoundInfo>* log = nullptr) {
    if (cfg.estimator == OrderingConfig::Estimator::Analytic) {
        if (!cfg.analytic_spec) throw ParameterError("score_sort: Analytic estimator needs an ScmSpec");
        return detail::iterative_leaf_removal(data, cfg, detail::AnalyticStatistic{data, *cfg.analytic_spec}, log);
    }
    return detail::iterative_leaf_removal(data, cfg, detail::SteinStatistic{data, cfg, false}, log);
}

// SCORE's rule: same loop, leaf statistic = per-column variance of the
// estimated log-likelihood Hessian diagonal.
inline TopOrder score_order(const Dataset& data, const OrderingConfig& cfg, std::vector<RoundInfo>* log = nullptr) {
    if (cfg.estimator == OrderingConfig::Estimator::Analytic)
        throw ParameterError("score_order supports only the Stein estimator");
    return detail::iterative_leaf_removal(data, cfg, detail::SteinStatistic{data, cfg, true}, log);
}

// Ascending marginal sample variance; ties broken by lower column index.
inline TopOrder var_sort(const Dataset& data) {
    if (data.n() < 2) throw ParameterError("var_sort requires n >= 2");
    const Vector vars = column_variances(data.values);
    TopOrder order;
    order.perm.resize(static_cast<std::size_t>(data.d()));
    std::iota(order.perm.begin(), order.perm.end(), 0);
    std::stable_sort(order.perm.begin(), order.perm.end(),
                     [&](int a, int b) { return vars[a] < vars[b]; });
    return order;
}

namespace detail {

// In-sample kernel ridge fit of y on predictors; returns the fitted values.
// An empty predictor set predicts the sample mean.
inline Vector krr_fit(const Matrix& predictors, const Vector& y, const KernelConfig& cfg) {
    if (predictors.cols() == 0) return Vector::Constant(y.size(), y.mean());
    const Matrix gram = rbf_gram(predictors, cfg);
    return gram * ridge_solve(gram, cfg.ridge, y);
}

}  // namespace detail

// R^2-sortability baseline: regress each column on the rest (kernel ridge,
// in-sample), sort by ascending R^2 = 1 - Var[residual] / Var[X_i], clamped
// to [0, 1]; ties broken by lower column index.
inline TopOrder r2_sort(const Dataset& data, const KernelConfig& kernel) {
    const int d = static_cast<int>(data.d());
    if (d == 1) return TopOrder{{0}};
    if (data.n() < 3) throw ParameterError("r2_sort requires n >= 3");
    Vector r2(d);
    for (int i = 0; i < d; ++i) {
        std::vector<int> rest;
        for (int j = 0; j < d; ++j)
            if (j != i) rest.push_back(j);
        const Matrix predictors = detail::select_columns(data.values, rest);
        KernelConfig kc = kernel;
        if (!(kc.bandwidth > 0.0)) kc.bandwidth = median_heuristic(predictors);
        const Vector y = data.values.col(i);
        const Vector fitted = detail::krr_fit(predictors, y, kc);
        const double var_y = sample_variance(y);
        double value = var_y > 0.0 ? 1.0 - sample_variance(y - fitted) / var_y : 0.0;
        r2[i] = std::clamp(value, 0.0, 1.0);
    }
    TopOrder order;
    order.perm.resize(static_cast<std::size_t>(d));
    std::iota(order.perm.begin(), order.perm.end(), 0);
    std::stable_sort(order.perm.begin(), order.perm.end(), [&](int a, int b) { return r2[a] < r2[b]; });
    return order;
}

inline TopOrder random_order(int d, Rng& rng) {
    if (d < 1) throw ParameterError("random_order requires d >= 1");
    TopOrder order;
    order.perm.resize(static_cast<std::size_t>(d));
    std::iota(order.perm.begin(), order.perm.end(), 0);
    std::shuffle(order.perm.begin(), order.perm.end(), rng);
    return order;
}

// Keep candidate edge i -> j iff dropping column i from the kernel ridge
// regression of X_j on j's order-predecessors raises the in-sample MSE by at
// least `threshold`, relative to the full fit (negative changes count as 0,
// so threshold 0 keeps every candidate edge). This is a simple stand-in for
// a full pruning stack; results derived from it are flagged as such.
inline Dag prune_edges(const Dataset& data, const TopOrder& order, double threshold,
                       const KernelConfig& kernel = KernelConfig{0.0, 0.01}) {
    validate(order);
    if (order.size() != static_cast<int>(data.d()))
        throw ParameterError("prune_edges: order / dataset dimension mismatch");
    Dag g;
    g.d = order.size();

    auto mse_of = [&](const std::vector<int>& cols, const Vector& y, const KernelConfig& kc) {
        const Vector fitted = detail::krr_fit(detail::select_columns(data.values, cols), y, kc);
        return (y - fitted).squaredNorm() / static_cast<double>(y.size());
    };

    for (int k = 1; k < g.d; ++k) {
        const int j = order.perm[static_cast<std::size_t>(k)];
        std::vector<int> candidates(order.perm.begin(), order.perm.begin() + k);
        const Vector y = data.values.col(j);

        KernelConfig kc = kernel;
        if (!(kc.bandwidth > 0.0))
            kc.bandwidth = median_heuristic(detail::select_columns(data.values, candidates));

        const double mse_full = mse_of(candidates, y, kc);
        const double denom = std::max(mse_full, 1e-12 * std::max(sample_variance(y), 1.0));
        for (int i : candidates) {
            std::vector<int> without;
            for (int c : candidates)
                if (c != i) without.push_back(c);
            const double gain = std::max(0.0, (mse_of(without, y, kc) - mse_full) / denom);
            if (gain >= threshold) g.edges.emplace(i, j);
        }
    }
    return g;
}

}  // namespace scoresort

#endif  // SCORESORT_ORDERING_HPP
