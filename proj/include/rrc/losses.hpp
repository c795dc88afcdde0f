#pragma once

#include <cmath>

#include "rrc/types.hpp"

namespace rrc {

enum class Loss { Hinge, Logistic };

inline const char* loss_name(Loss loss) {
  return loss == Loss::Hinge ? "hinge" : "logistic";
}

namespace detail {

// log(1 + exp(-u)) without overflow on either side.
template <class Scalar>
Scalar log1p_exp_neg(Scalar u) {
  if (u >= Scalar(0)) return std::log1p(std::exp(-u));
  return -u + std::log1p(std::exp(u));
}

template <class Scalar>
Scalar sigmoid(Scalar z) {
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-z));
  const Scalar e = std::exp(z);
  return e / (Scalar(1) + e);
}

template <class DerivedM, class DerivedX>
DenseMatrix<typename DerivedM::Scalar> margins(
    const Eigen::MatrixBase<DerivedM>& coeffs,
    const Eigen::MatrixBase<DerivedX>& design, const ResponseMatrix& response) {
  check_compatible(coeffs, design, response);
  if (response.mask.empty()) throw invalid_input("observation mask is empty");
  return design * coeffs;
}

}  // namespace detail

// Masked risks, margin form. `scores` is the n x q matrix XM; every risk is
// a mean over the observed entries, so the fully observed and missing cases
// share one code path.

template <class Scalar>
Scalar zero_one_risk_from_scores(const DenseMatrix<Scalar>& scores,
                                 const ResponseMatrix& response) {
  const auto& flags = response.mask.flags();
  Index miss = 0;
  for (Index i = 0; i < scores.rows(); ++i)
    for (Index k = 0; k < scores.cols(); ++k)
      if (flags(i, k) && Scalar(response.labels(i, k)) * scores(i, k) <
                             Scalar(0))
        ++miss;
  return Scalar(miss) / Scalar(response.mask.count());
}

template <class Scalar>
Scalar hinge_risk_from_scores(const DenseMatrix<Scalar>& scores,
                              const ResponseMatrix& response) {
  const auto& flags = response.mask.flags();
  Scalar sum = 0;
  for (Index i = 0; i < scores.rows(); ++i)
    for (Index k = 0; k < scores.cols(); ++k)
      if (flags(i, k)) {
        const Scalar margin = Scalar(response.labels(i, k)) * scores(i, k);
        if (margin < Scalar(1)) sum += Scalar(1) - margin;
      }
  return sum / Scalar(response.mask.count());
}

template <class Scalar>
Scalar logistic_risk_from_scores(const DenseMatrix<Scalar>& scores,
                                 const ResponseMatrix& response) {
  const auto& flags = response.mask.flags();
  Scalar sum = 0;
  for (Index i = 0; i < scores.rows(); ++i)
    for (Index k = 0; k < scores.cols(); ++k)
      if (flags(i, k))
        sum += detail::log1p_exp_neg(Scalar(response.labels(i, k)) *
                                     scores(i, k));
  return sum / Scalar(response.mask.count());
}

template <class Scalar>
Scalar loss_risk_from_scores(const DenseMatrix<Scalar>& scores,
                             const ResponseMatrix& response, Loss loss) {
  return loss == Loss::Hinge ? hinge_risk_from_scores(scores, response)
                             : logistic_risk_from_scores(scores, response);
}

// Entry weights W such that the loss (sub)gradient is -(1/m) X^T W.
// Hinge uses the strict active set y (XM) < 1, contributing 0 at the kink.
template <class Scalar>
DenseMatrix<Scalar> loss_weights_from_scores(const DenseMatrix<Scalar>& scores,
                                             const ResponseMatrix& response,
                                             Loss loss) {
  const auto& flags = response.mask.flags();
  DenseMatrix<Scalar> weights =
      DenseMatrix<Scalar>::Zero(scores.rows(), scores.cols());
  for (Index i = 0; i < scores.rows(); ++i)
    for (Index k = 0; k < scores.cols(); ++k) {
      if (!flags(i, k)) continue;
      const Scalar y = Scalar(response.labels(i, k));
      if (loss == Loss::Hinge) {
        if (y * scores(i, k) < Scalar(1)) weights(i, k) = y;
      } else {
        weights(i, k) = y * detail::sigmoid(-y * scores(i, k));
      }
    }
  return weights;
}

template <class Scalar, class DerivedX>
DenseMatrix<Scalar> loss_gradient_from_scores(
    const DenseMatrix<Scalar>& scores, const Eigen::MatrixBase<DerivedX>& design,
    const ResponseMatrix& response, Loss loss) {
  const DenseMatrix<Scalar> weights =
      loss_weights_from_scores(scores, response, loss);
  return (design.transpose() * weights) *
         (Scalar(-1) / Scalar(response.mask.count()));
}

// Public operations on (M, X, Y).

template <class DerivedM, class DerivedX>
typename DerivedM::Scalar zero_one_risk(
    const Eigen::MatrixBase<DerivedM>& coeffs,
    const Eigen::MatrixBase<DerivedX>& design, const ResponseMatrix& response) {
  return zero_one_risk_from_scores(detail::margins(coeffs, design, response),
                                   response);
}

template <class DerivedM, class DerivedX>
typename DerivedM::Scalar hinge_risk(const Eigen::MatrixBase<DerivedM>& coeffs,
                                     const Eigen::MatrixBase<DerivedX>& design,
                                     const ResponseMatrix& response) {
  return hinge_risk_from_scores(detail::margins(coeffs, design, response),
                                response);
}

template <class DerivedM, class DerivedX>
typename DerivedM::Scalar logistic_risk(
    const Eigen::MatrixBase<DerivedM>& coeffs,
    const Eigen::MatrixBase<DerivedX>& design, const ResponseMatrix& response) {
  return logistic_risk_from_scores(detail::margins(coeffs, design, response),
                                   response);
}

template <class DerivedM, class DerivedX>
DenseMatrix<typename DerivedM::Scalar> hinge_subgradient(
    const Eigen::MatrixBase<DerivedM>& coeffs,
    const Eigen::MatrixBase<DerivedX>& design, const ResponseMatrix& response) {
  return loss_gradient_from_scores(detail::margins(coeffs, design, response),
                                   design, response, Loss::Hinge);
}

template <class DerivedM, class DerivedX>
DenseMatrix<typename DerivedM::Scalar> logistic_gradient(
    const Eigen::MatrixBase<DerivedM>& coeffs,
    const Eigen::MatrixBase<DerivedX>& design, const ResponseMatrix& response) {
  return loss_gradient_from_scores(detail::margins(coeffs, design, response),
                                   design, response, Loss::Logistic);
}

// Entrywise sign of XM with sign(0) = +1.
template <class DerivedM, class DerivedX>
LabelMatrix predict(const Eigen::MatrixBase<DerivedM>& coeffs,
                    const Eigen::MatrixBase<DerivedX>& design) {
  if (coeffs.rows() != design.cols())
    throw dimension_error("coefficient rows do not match design columns");
  using Scalar = typename DerivedM::Scalar;
  const DenseMatrix<Scalar> scores = design * coeffs;
  LabelMatrix out(scores.rows(), scores.cols());
  for (Index i = 0; i < scores.rows(); ++i)
    for (Index k = 0; k < scores.cols(); ++k)
      out(i, k) = scores(i, k) >= Scalar(0) ? std::int8_t(1) : std::int8_t(-1);
  return out;
}

}  // namespace rrc
