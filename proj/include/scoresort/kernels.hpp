#ifndef SCORESORT_KERNELS_HPP
#define SCORESORT_KERNELS_HPP

#include <cmath>

#include <Eigen/Cholesky>

#include "scoresort/common.hpp"

namespace scoresort {

// RBF kernel kappa(a, b) = exp(-|a - b|^2 / (2 s^2)) with scale s, plus the
// ridge parameter used by the Stein solves.
struct KernelConfig {
    double bandwidth = 1.0;
    double ridge = 0.01;
};

inline void validate(const KernelConfig& cfg) {
    if (!(cfg.bandwidth > 0.0)) throw ParameterError("kernel bandwidth must be positive");
    if (cfg.ridge < 0.0) throw ParameterError("ridge must be non-negative");
}

namespace detail {

// Squared pairwise distances via the expanded-norm identity, with tiny
// negatives from cancellation clamped to zero. Mirrored from the upper
// triangle so the result is exactly symmetric with an exactly zero diagonal.
inline Matrix squared_distances(const Eigen::Ref<const Matrix>& x) {
    const Vector sq = x.rowwise().squaredNorm();
    Matrix d2 = (-2.0 * x * x.transpose()).rowwise() + sq.transpose();
    d2.colwise() += sq;
    d2 = d2.cwiseMax(0.0);
    d2.diagonal().setZero();
    return d2.selfadjointView<Eigen::Upper>();
}

}  // namespace detail

// Median pairwise Euclidean distance over at most 1000 evenly spaced rows;
// falls back to 1.0 when all subsampled rows coincide.
inline double median_heuristic(const Eigen::Ref<const Matrix>& data) {
    const Eigen::Index n = data.rows();
    if (n < 2) throw ParameterError("median_heuristic requires at least two rows");
    const Eigen::Index cap = 1000;
    Matrix sub;
    if (n <= cap) {
        sub = data;
    } else {
        sub.resize(cap, data.cols());
        for (Eigen::Index k = 0; k < cap; ++k)
            sub.row(k) = data.row((k * n) / cap);
    }
    const Matrix d2 = detail::squared_distances(sub);
    std::vector<double> dists;
    dists.reserve(static_cast<std::size_t>(sub.rows() * (sub.rows() - 1) / 2));
    for (Eigen::Index i = 0; i < sub.rows(); ++i)
        for (Eigen::Index j = i + 1; j < sub.rows(); ++j) dists.push_back(std::sqrt(d2(i, j)));
    const double med = median_inplace(dists);
    return med > 0.0 ? med : 1.0;
}

// Symmetric Gram matrix K_ij = kappa(x_i, x_j); unit diagonal.
inline Matrix rbf_gram(const Eigen::Ref<const Matrix>& data, const KernelConfig& cfg) {
    validate(cfg);
    const double s2 = cfg.bandwidth * cfg.bandwidth;
    return (detail::squared_distances(data) / (-2.0 * s2)).array().exp();
}

// <grad, K>_ij = sum_k d kappa(x_i, x_k) / d x_j^(k)
//             = sum_k kappa(x_i, x_k) (x_j^(i) - x_j^(k)) / s^2.
inline Matrix grad_sum(const Eigen::Ref<const Matrix>& data, const Matrix& gram, const KernelConfig& cfg) {
    const double s2 = cfg.bandwidth * cfg.bandwidth;
    const Vector row_sums = gram.rowwise().sum();
    return (row_sums.asDiagonal() * data - gram * data) / s2;
}

inline Matrix grad_sum(const Eigen::Ref<const Matrix>& data, const KernelConfig& cfg) {
    return grad_sum(data, rbf_gram(data, cfg), cfg);
}

// <grad2_diag, K>_ij = sum_k d^2 kappa(x_i, x_k) / d (x_j^(k))^2
//                   = sum_k kappa(x_i, x_k) ((x_j^(i) - x_j^(k))^2 / s^4 - 1 / s^2).
inline Matrix grad2_diag_sum(const Eigen::Ref<const Matrix>& data, const Matrix& gram, const KernelConfig& cfg) {
    const double s2 = cfg.bandwidth * cfg.bandwidth;
    const Vector row_sums = gram.rowwise().sum();
    const Matrix xsq = data.array().square();
    Matrix num = row_sums.asDiagonal() * xsq - 2.0 * data.cwiseProduct(gram * data) + gram * xsq;
    num /= s2 * s2;
    num.colwise() -= row_sums / s2;
    return num;
}

inline Matrix grad2_diag_sum(const Eigen::Ref<const Matrix>& data, const KernelConfig& cfg) {
    return grad2_diag_sum(data, rbf_gram(data, cfg), cfg);
}

// Cholesky factorization of K + eta I, reusable across several right-hand
// sides (the Stein gradient and Hessian solves share one).
class RidgeFactor {
  public:
    RidgeFactor(const Matrix& k, double eta) {
        if (k.rows() != k.cols()) throw ParameterError("ridge_solve: K must be square");
        if (eta < 0.0) throw ParameterError("ridge_solve: eta must be non-negative");
        Matrix reg = k;
        reg.diagonal().array() += eta;
        llt_.compute(reg);
        if (llt_.info() != Eigen::Success)
            throw NumericalError("ridge_solve: factorization failed; increase eta");
    }

    Matrix solve(const Eigen::Ref<const Matrix>& b) const { return llt_.solve(b); }

  private:
    Eigen::LLT<Matrix> llt_;
};

// Solve (K + eta I) X = B for SPD-plus-ridge K. The residual is held below
// 1e-8 * |B|_max, with one refinement pass before giving up.
inline Matrix ridge_solve(const Matrix& k, double eta, const Eigen::Ref<const Matrix>& b) {
    const RidgeFactor factor(k, eta);
    Matrix x = factor.solve(b);
    const double b_scale = b.cwiseAbs().maxCoeff();
    if (b_scale == 0.0) return x;
    Matrix reg = k;
    reg.diagonal().array() += eta;
    double resid = (reg * x - b).cwiseAbs().maxCoeff();
    if (!(resid < 1e-8 * b_scale)) {
        x += factor.solve(b - reg * x);
        resid = (reg * x - b).cwiseAbs().maxCoeff();
    }
    if (!(resid < 1e-8 * b_scale))
        throw NumericalError("ridge_solve: residual " + std::to_string(resid) +
                             " exceeds tolerance; increase eta");
    return x;
}

}  // namespace scoresort

#endif  // SCORESORT_KERNELS_HPP
