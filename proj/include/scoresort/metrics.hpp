#ifndef SCORESORT_METRICS_HPP
#define SCORESORT_METRICS_HPP

#include <cmath>

#include "scoresort/common.hpp"
#include "scoresort/graph.hpp"
#include "scoresort/scm.hpp"

namespace scoresort {

// Order-against-graph agreement. nu = 1 - fnr_pi is the fraction of true
// edges admitted by the order.
struct OrderEval {
    double fnr_pi = 0.0;
    double nu = 1.0;
    int edges_total = 0;
    int edges_reversed = 0;
};

inline OrderEval fnr_pi(const TopOrder& order, const Dag& truth) {
    validate(order);
    validate(truth);
    if (order.size() != truth.d) throw ParameterError("fnr_pi: order / graph dimension mismatch");
    if (truth.edges.empty()) throw ParameterError("fnr_pi is undefined for an edgeless graph");
    const std::vector<int> pos = order.positions();
    OrderEval ev;
    ev.edges_total = static_cast<int>(truth.edges.size());
    for (const auto& [i, j] : truth.edges)
        if (pos[static_cast<std::size_t>(j)] < pos[static_cast<std::size_t>(i)]) ++ev.edges_reversed;
    ev.fnr_pi = static_cast<double>(ev.edges_reversed) / static_cast<double>(ev.edges_total);
    ev.nu = 1.0 - ev.fnr_pi;
    return ev;
}

// Structural Hamming distance: per unordered pair, one unit for a missing,
// extra, or reversed edge (a reversal counts once).
inline int shd(const Dag& pred, const Dag& truth) {
    validate(pred);
    validate(truth);
    if (pred.d != truth.d) throw ParameterError("shd: graphs differ in node count");
    int dist = 0;
    for (int i = 0; i < truth.d; ++i) {
        for (int j = i + 1; j < truth.d; ++j) {
            const bool t_fwd = truth.has_edge(i, j), t_bwd = truth.has_edge(j, i);
            const bool p_fwd = pred.has_edge(i, j), p_bwd = pred.has_edge(j, i);
            if (t_fwd == p_fwd && t_bwd == p_bwd) continue;
            ++dist;
        }
    }
    return dist;
}

// Monte Carlo evaluation of the bivariate identifiability condition for
// X := U_X, Y := f(U_X) + U_Y with Gaussian noises:
//   identifiable  <=>  Var[f'(U_X)] > 1 - Var[dlogp(U_X)] / Var[dlogp(U_Y)]
//                                      - 2 C / Var[dlogp(U_Y)],
// C = Cov[dlogp(U_X), f'(U_X) dlogp(U_Y)]. All moments are estimated from
// the same draws; mc_se is a batch-means standard error of lhs - rhs so
// near-tie verdicts can be flagged.
struct IdentifiabilityReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double c_term = 0.0;
    bool identifiable = false;
    Eigen::Index mc_n = 0;
    double mc_se = 0.0;
};

inline IdentifiabilityReport bivariate_identifiability(const Mechanism& f, double sigma_x, double sigma_y,
                                                       Eigen::Index mc_n, Rng& rng) {
    if (mc_n < 100) throw ParameterError("bivariate_identifiability: mc_n < 100 is too noisy to report");
    if (!(sigma_x > 0.0) || !(sigma_y > 0.0)) throw ParameterError("noise stds must be positive");

    std::normal_distribution<double> gx(0.0, sigma_x), gy(0.0, sigma_y);
    Vector ux(mc_n), uy(mc_n);
    for (Eigen::Index i = 0; i < mc_n; ++i) ux[i] = gx(rng);
    for (Eigen::Index i = 0; i < mc_n; ++i) uy[i] = gy(rng);

    const Vector fprime = eval_mechanism_grad(f, ux, 0);
    const Vector slx = -ux / (sigma_x * sigma_x);  // dlogp(U_X)
    const Vector sly = -uy / (sigma_y * sigma_y);

    auto report_on = [&](Eigen::Index lo, Eigen::Index len) {
        IdentifiabilityReport r;
        const auto fp = fprime.segment(lo, len);
        const auto ax = slx.segment(lo, len);
        const auto ay = sly.segment(lo, len);
        const Vector prod = fp.cwiseProduct(ay);
        const double var_slx = sample_variance(ax);
        const double var_sly = sample_variance(ay);
        r.lhs = sample_variance(fp);
        r.c_term = ((ax.array() - ax.mean()) * (prod.array() - prod.mean())).sum() /
                   static_cast<double>(len - 1);
        r.rhs = 1.0 - var_slx / var_sly - 2.0 * r.c_term / var_sly;
        r.identifiable = r.lhs > r.rhs;
        r.mc_n = len;
        return r;
    };

    IdentifiabilityReport full = report_on(0, mc_n);

    const int batches = 10;
    const Eigen::Index blen = mc_n / batches;
    if (blen >= 10) {
        double mean = 0.0, sq = 0.0;
        for (int b = 0; b < batches; ++b) {
            const IdentifiabilityReport rb = report_on(b * blen, blen);
            const double margin = rb.lhs - rb.rhs;
            mean += margin;
            sq += margin * margin;
        }
        mean /= batches;
        const double var = std::max(0.0, sq / batches - mean * mean);
        full.mc_se = std::sqrt(var / batches);
    }
    return full;
}

}  // namespace scoresort

#endif  // SCORESORT_METRICS_HPP
