#pragma once

#include <Eigen/Dense>

#include <cstdint>

#include "bmf/error.hpp"

namespace bmf {

/// Dense row-major real matrix. Holds factor parameters and probabilities.
template <typename Scalar>
using RealMatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RealMatrix = RealMatrixT<double>;

/// Dense row-major {0,1} matrix.
using BinaryMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Per-entry observation mask; 1 = observed, 0 = missing.
using Mask = BinaryMatrix;

/// Binary observations with an aligned observation mask.
///
/// Missing entries store 0 in `values()` and are never read by any
/// computation. Immutable after construction.
class ObservedMatrix {
public:
  ObservedMatrix() = default;

  /// Fully observed matrix.
  explicit ObservedMatrix(BinaryMatrix values);

  /// Values at missing cells are zeroed.
  ObservedMatrix(BinaryMatrix values, Mask mask);

  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index cols() const { return values_.cols(); }

  const BinaryMatrix& values() const { return values_; }
  const Mask& mask() const { return mask_; }

  bool observed(Eigen::Index r, Eigen::Index c) const { return mask_(r, c) != 0; }
  std::uint8_t operator()(Eigen::Index r, Eigen::Index c) const { return values_(r, c); }

  Eigen::Index observed_count() const { return observed_count_; }

private:
  BinaryMatrix values_;
  Mask mask_;
  Eigen::Index observed_count_ = 0;
};

/// Full mask of the given shape.
inline Mask full_mask(Eigen::Index rows, Eigen::Index cols) {
  return Mask::Ones(rows, cols);
}

/// Fraction of observed cells on which `a` and `b` disagree.
double hamming_fraction(const BinaryMatrix& a, const BinaryMatrix& b, const Mask& mask);

/// Fraction of observed entries equal to 1.
double density(const ObservedMatrix& x);

/// Boolean OR-AND product: out(n,m) = OR_l u(n,l) AND z(m,l).
BinaryMatrix boolean_product(const BinaryMatrix& u, const BinaryMatrix& z);

}  // namespace bmf
