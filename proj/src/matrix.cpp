#include "bmf/matrix.hpp"

#include <string>

namespace bmf {

namespace {

void require_binary(const BinaryMatrix& m, const char* name) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (m.data()[i] > 1) {
      throw InvalidArgument(std::string(name) + " must contain only 0 and 1");
    }
  }
}

}  // namespace

ObservedMatrix::ObservedMatrix(BinaryMatrix values)
    : ObservedMatrix(values, full_mask(values.rows(), values.cols())) {}

ObservedMatrix::ObservedMatrix(BinaryMatrix values, Mask mask)
    : values_(std::move(values)), mask_(std::move(mask)) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw DimensionError("observed matrix must have at least one row and one column");
  }
  if (mask_.rows() != values_.rows() || mask_.cols() != values_.cols()) {
    throw DimensionError("mask shape does not match values");
  }
  require_binary(mask_, "mask");
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    if (mask_.data()[i] == 0) {
      values_.data()[i] = 0;
    } else {
      ++observed_count_;
    }
  }
  require_binary(values_, "observed values");
}

double hamming_fraction(const BinaryMatrix& a, const BinaryMatrix& b, const Mask& mask) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != mask.rows() ||
      a.cols() != mask.cols()) {
    throw DimensionError("hamming_fraction: dimension mismatch");
  }
  Eigen::Index observed = 0;
  Eigen::Index differ = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (mask.data()[i] == 0) continue;
    ++observed;
    differ += (a.data()[i] != b.data()[i]);
  }
  if (observed == 0) throw EmptyMaskError("hamming_fraction: no observed entries");
  return static_cast<double>(differ) / static_cast<double>(observed);
}

double density(const ObservedMatrix& x) {
  if (x.observed_count() == 0) throw EmptyMaskError("density: no observed entries");
  // Missing cells store 0, so a plain sum counts observed ones.
  const Eigen::Index ones = x.values().cast<Eigen::Index>().sum();
  return static_cast<double>(ones) / static_cast<double>(x.observed_count());
}

BinaryMatrix boolean_product(const BinaryMatrix& u, const BinaryMatrix& z) {
  if (u.cols() != z.cols()) throw DimensionError("boolean_product: rank mismatch");
  BinaryMatrix out = BinaryMatrix::Zero(u.rows(), z.rows());
  for (Eigen::Index n = 0; n < u.rows(); ++n) {
    for (Eigen::Index m = 0; m < z.rows(); ++m) {
      for (Eigen::Index l = 0; l < u.cols(); ++l) {
        if (u(n, l) && z(m, l)) {
          out(n, m) = 1;
          break;
        }
      }
    }
  }
  return out;
}

}  // namespace bmf
