#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rrc {

using Index = Eigen::Index;

template <class Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Matrixd = DenseMatrix<double>;

// Binary labels are stored as signed 8-bit {-1,+1}; entries under
// unobserved positions carry no meaning.
using LabelMatrix = Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic>;
using BoolArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

using IndexPair = std::pair<Index, Index>;

// Regimes for the theory-driven defaults of the temperature and prior scale.
enum class Regime { Full, Missing, SlowRate };

class dimension_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class invalid_input : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a chain's state norm crosses the divergence guard.
class divergence_error : public std::runtime_error {
 public:
  divergence_error(long step, double step_size, double norm)
      : std::runtime_error("chain diverged at step " + std::to_string(step) +
                           " (step size " + std::to_string(step_size) +
                           ", state norm " + std::to_string(norm) + ")"),
        step_(step),
        step_size_(step_size),
        norm_(norm) {}

  long step() const { return step_; }
  double step_size() const { return step_size_; }
  double state_norm() const { return norm_; }

 private:
  long step_;
  double step_size_;
  double norm_;
};

// Set of observed (unit, response) index pairs, stored densely as a boolean
// grid with a cached cardinality. The sorted pair list is the canonical
// representation for serialization.
class ObservationMask {
 public:
  ObservationMask() = default;

  explicit ObservationMask(BoolArray observed)
      : observed_(std::move(observed)), count_(observed_.count()) {}

  static ObservationMask full(Index rows, Index cols) {
    check_dims(rows, cols);
    return ObservationMask(BoolArray::Constant(rows, cols, true));
  }

  static ObservationMask none(Index rows, Index cols) {
    check_dims(rows, cols);
    return ObservationMask(BoolArray::Constant(rows, cols, false));
  }

  static ObservationMask from_pairs(Index rows, Index cols,
                                    const std::vector<IndexPair>& observed) {
    check_dims(rows, cols);
    BoolArray flags = BoolArray::Constant(rows, cols, false);
    for (const auto& [i, k] : observed) {
      if (i < 0 || i >= rows || k < 0 || k >= cols)
        throw invalid_input("observation index (" + std::to_string(i) + "," +
                            std::to_string(k) + ") out of range");
      if (flags(i, k))
        throw invalid_input("duplicate observation index (" +
                            std::to_string(i) + "," + std::to_string(k) + ")");
      flags(i, k) = true;
    }
    return ObservationMask(std::move(flags));
  }

  Index rows() const { return observed_.rows(); }
  Index cols() const { return observed_.cols(); }
  Index count() const { return count_; }
  bool empty() const { return count_ == 0; }
  bool is_full() const { return count_ == observed_.size(); }

  bool observed(Index i, Index k) const { return observed_(i, k); }
  const BoolArray& flags() const { return observed_; }

  // Row-major sorted index pairs.
  std::vector<IndexPair> pairs() const {
    std::vector<IndexPair> out;
    out.reserve(static_cast<std::size_t>(count_));
    for (Index i = 0; i < observed_.rows(); ++i)
      for (Index k = 0; k < observed_.cols(); ++k)
        if (observed_(i, k)) out.emplace_back(i, k);
    return out;
  }

  ObservationMask complement() const { return ObservationMask(!observed_); }

 private:
  static void check_dims(Index rows, Index cols) {
    if (rows < 1 || cols < 1)
      throw invalid_input("mask dimensions must be positive");
  }

  BoolArray observed_;
  Index count_ = 0;
};

// Binary response matrix with its observation mask.
struct ResponseMatrix {
  LabelMatrix labels;
  ObservationMask mask;

  ResponseMatrix() = default;
  ResponseMatrix(LabelMatrix values, ObservationMask observed)
      : labels(std::move(values)), mask(std::move(observed)) {
    validate();
  }

  Index rows() const { return labels.rows(); }
  Index cols() const { return labels.cols(); }

  void validate() const {
    if (mask.rows() != labels.rows() || mask.cols() != labels.cols())
      throw dimension_error("observation mask dimensions do not match labels");
    for (Index i = 0; i < labels.rows(); ++i)
      for (Index k = 0; k < labels.cols(); ++k)
        if (mask.observed(i, k) && labels(i, k) != 1 && labels(i, k) != -1)
          throw invalid_input("observed response at (" + std::to_string(i) +
                              "," + std::to_string(k) +
                              ") is not -1 or +1");
  }
};

inline ResponseMatrix make_full_response(LabelMatrix labels) {
  ObservationMask mask = ObservationMask::full(labels.rows(), labels.cols());
  return ResponseMatrix(std::move(labels), std::move(mask));
}

template <class Derived>
void require_finite(const Eigen::MatrixBase<Derived>& values,
                    const char* what) {
  if (!values.allFinite())
    throw invalid_input(std::string(what) + " contains non-finite entries");
}

// Shared shape contract of (M, X, Y) triples: X is n x p, M is p x q,
// Y is n x q with a mask of the same shape.
template <class DerivedM, class DerivedX>
void check_compatible(const Eigen::MatrixBase<DerivedM>& coeffs,
                      const Eigen::MatrixBase<DerivedX>& design,
                      const ResponseMatrix& response) {
  if (design.rows() < 1 || design.cols() < 1)
    throw dimension_error("design matrix must be at least 1 x 1");
  if (coeffs.rows() != design.cols())
    throw dimension_error("coefficient rows (" +
                          std::to_string(coeffs.rows()) +
                          ") do not match design columns (" +
                          std::to_string(design.cols()) + ")");
  if (response.rows() != design.rows() || response.cols() != coeffs.cols())
    throw dimension_error("response dimensions (" +
                          std::to_string(response.rows()) + " x " +
                          std::to_string(response.cols()) +
                          ") do not match design rows / coefficient columns");
}

}  // namespace rrc
