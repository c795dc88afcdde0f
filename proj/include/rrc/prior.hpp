#pragma once

#include <cmath>

#include "rrc/types.hpp"

namespace rrc {

// Spectral scaled-Student prior on p x q matrices,
//
//   pi(M) proportional to det(tau^2 I_p + M M^T)^{-(p+q+2)/2},
//
// evaluated without the normalization constant; only differences of
// log-densities are ever consumed. The density depends on M through its
// singular values alone, so it shrinks most of them toward zero.
//
// Cost scales with min(p,q)^3: when q < p the p x p determinant and the
// gradient are rewritten through the q x q Gram matrix via
//   logdet(tau^2 I_p + M M^T) = 2 (p-q) log tau + logdet(tau^2 I_q + M^T M)
//   (tau^2 I_p + M M^T)^{-1} M = M (tau^2 I_q + M^T M)^{-1}.

template <class Scalar>
struct PriorEvaluation {
  Scalar log_density;
  DenseMatrix<Scalar> gradient;
};

namespace detail {

template <class Scalar>
Scalar logdet_from_llt(const Eigen::LLT<DenseMatrix<Scalar>>& llt) {
  return Scalar(2) *
         llt.matrixLLT().diagonal().array().log().sum();
}

template <class Scalar>
void check_prior_args(const DenseMatrix<Scalar>& coeffs, Scalar tau) {
  if (!(tau > Scalar(0)) || !std::isfinite(tau))
    throw invalid_input("prior scale tau must be positive and finite");
  require_finite(coeffs, "coefficient matrix");
  if (coeffs.rows() < 1 || coeffs.cols() < 1)
    throw invalid_input("coefficient matrix must be at least 1 x 1");
}

// Factorization of the smaller of the two Gram forms.
template <class Scalar>
Eigen::LLT<DenseMatrix<Scalar>> prior_gram_llt(const DenseMatrix<Scalar>& m,
                                               Scalar tau, bool dual) {
  const Index d = dual ? m.cols() : m.rows();
  DenseMatrix<Scalar> gram =
      tau * tau * DenseMatrix<Scalar>::Identity(d, d);
  if (dual)
    gram.noalias() += m.transpose() * m;
  else
    gram.noalias() += m * m.transpose();
  Eigen::LLT<DenseMatrix<Scalar>> llt(gram);
  if (llt.info() != Eigen::Success)
    throw numeric_error("Cholesky factorization of the prior Gram matrix "
                        "failed (tau = " + std::to_string(double(tau)) + ")");
  return llt;
}

}  // namespace detail

template <class Derived>
PriorEvaluation<typename Derived::Scalar> evaluate_prior(
    const Eigen::MatrixBase<Derived>& coeffs, typename Derived::Scalar tau) {
  using Scalar = typename Derived::Scalar;
  const DenseMatrix<Scalar> m = coeffs;
  detail::check_prior_args(m, tau);

  const Index p = m.rows(), q = m.cols();
  const bool dual = q < p;
  const auto llt = detail::prior_gram_llt(m, tau, dual);

  Scalar logdet = detail::logdet_from_llt<Scalar>(llt);
  if (dual) logdet += Scalar(2) * Scalar(p - q) * std::log(tau);

  const Scalar coeff = Scalar(p + q + 2);
  PriorEvaluation<Scalar> out;
  out.log_density = -coeff / Scalar(2) * logdet;
  if (dual)
    out.gradient = -coeff * llt.solve(m.transpose()).transpose();
  else
    out.gradient = -coeff * llt.solve(m);
  return out;
}

template <class Derived>
typename Derived::Scalar log_prior(const Eigen::MatrixBase<Derived>& coeffs,
                                   typename Derived::Scalar tau) {
  using Scalar = typename Derived::Scalar;
  const DenseMatrix<Scalar> m = coeffs;
  detail::check_prior_args(m, tau);
  const Index p = m.rows(), q = m.cols();
  const bool dual = q < p;
  const auto llt = detail::prior_gram_llt(m, tau, dual);
  Scalar logdet = detail::logdet_from_llt<Scalar>(llt);
  if (dual) logdet += Scalar(2) * Scalar(p - q) * std::log(tau);
  return -Scalar(p + q + 2) / Scalar(2) * logdet;
}

template <class Derived>
DenseMatrix<typename Derived::Scalar> log_prior_gradient(
    const Eigen::MatrixBase<Derived>& coeffs, typename Derived::Scalar tau) {
  return evaluate_prior(coeffs, tau).gradient;
}

// Theory-driven default scale. Full regime:
//   tau^2 = (p+q) / (2 q^2 p n ||X||_F^2),
// missing regime:
//   tau^2 = (p+q) / (2 q p m ||X||_F^2).
inline double default_tau(Regime regime, Index n, Index p, Index q, Index m,
                          double norm_x_sq) {
  if (n < 1 || p < 1 || q < 1 || m < 1)
    throw invalid_input("default_tau: all counts must be >= 1");
  if (!(norm_x_sq > 0))
    throw invalid_input("default_tau: ||X||_F^2 must be positive");
  const double pq = static_cast<double>(p + q);
  double tau_sq = 0;
  switch (regime) {
    case Regime::Full:
      tau_sq = pq / (2.0 * double(q) * double(q) * double(p) * double(n) *
                     norm_x_sq);
      break;
    case Regime::Missing:
      tau_sq = pq / (2.0 * double(q) * double(p) * double(m) * norm_x_sq);
      break;
    default:
      throw invalid_input("default_tau: regime must be Full or Missing");
  }
  return std::sqrt(tau_sq);
}

}  // namespace rrc
