#ifndef SCORESORT_SCORE_MATCHING_HPP
#define SCORESORT_SCORE_MATCHING_HPP

#include <optional>

#include "scoresort/common.hpp"
#include "scoresort/dataset.hpp"
#include "scoresort/kernels.hpp"

namespace scoresort {

// Stein estimates of the score at the sample points: G(k, i) approximates
// d log p(x^(k)) / d x_i; JDiag, when present, the second derivative.
struct ScoreEstimate {
    Matrix G;
    std::optional<Matrix> JDiag;
    KernelConfig config;
};

namespace detail {

inline Matrix stein_gradient_impl(const Eigen::Ref<const Matrix>& x, const Matrix& gram,
                                  const RidgeFactor& factor, const KernelConfig& cfg) {
    return -factor.solve(grad_sum(x, gram, cfg));
}

inline Matrix stein_hessian_impl(const Eigen::Ref<const Matrix>& x, const Matrix& gram,
                                 const RidgeFactor& factor, const Eigen::Ref<const Matrix>& g_hat,
                                 const KernelConfig& cfg) {
    return -g_hat.cwiseProduct(g_hat) + factor.solve(grad2_diag_sum(x, gram, cfg));
}

}  // namespace detail

// Ridge-regression closed form G = -(K + eta I)^{-1} <grad, K>.
inline Matrix stein_gradient(const Eigen::Ref<const Matrix>& data, const KernelConfig& cfg) {
    if (data.rows() < 2) throw ParameterError("stein_gradient requires n >= 2");
    validate(cfg);
    const Matrix gram = rbf_gram(data, cfg);
    const RidgeFactor factor(gram, cfg.ridge);
    return detail::stein_gradient_impl(data, gram, factor, cfg);
}

inline Matrix stein_gradient(const Dataset& ds, const KernelConfig& cfg) {
    return stein_gradient(ds.values, cfg);
}

// J = -diag(G G^T) per sample (entrywise G^2) + (K + eta I)^{-1} <grad2_diag, K>.
inline Matrix stein_hessian_diag(const Eigen::Ref<const Matrix>& data, const Eigen::Ref<const Matrix>& g_hat,
                                 const KernelConfig& cfg) {
    if (g_hat.rows() != data.rows() || g_hat.cols() != data.cols())
        throw ParameterError("stein_hessian_diag: G dimensions must match the data");
    validate(cfg);
    const Matrix gram = rbf_gram(data, cfg);
    const RidgeFactor factor(gram, cfg.ridge);
    return detail::stein_hessian_impl(data, gram, factor, g_hat, cfg);
}

inline Matrix stein_hessian_diag(const Dataset& ds, const Eigen::Ref<const Matrix>& g_hat,
                                 const KernelConfig& cfg) {
    return stein_hessian_diag(ds.values, g_hat, cfg);
}

// Gradient and (optionally) Hessian diagonal sharing one Gram factorization.
inline ScoreEstimate estimate_score(const Eigen::Ref<const Matrix>& data, const KernelConfig& cfg,
                                    bool with_hessian = false) {
    if (data.rows() < 2) throw ParameterError("estimate_score requires n >= 2");
    validate(cfg);
    ScoreEstimate est;
    est.config = cfg;
    const Matrix gram = rbf_gram(data, cfg);
    const RidgeFactor factor(gram, cfg.ridge);
    est.G = detail::stein_gradient_impl(data, gram, factor, cfg);
    if (with_hessian) est.JDiag = detail::stein_hessian_impl(data, gram, factor, est.G, cfg);
    return est;
}

inline ScoreEstimate estimate_score(const Dataset& ds, const KernelConfig& cfg, bool with_hessian = false) {
    return estimate_score(ds.values, cfg, with_hessian);
}

}  // namespace scoresort

#endif  // SCORESORT_SCORE_MATCHING_HPP
