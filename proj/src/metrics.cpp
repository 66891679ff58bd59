#include "bmf/metrics.hpp"

namespace bmf {

double reconstruction_error(const BinaryMatrix& x_hat, const BinaryMatrix& x_clean) {
  if (x_hat.rows() != x_clean.rows() || x_hat.cols() != x_clean.cols()) {
    throw DimensionError("reconstruction_error: dimension mismatch");
  }
  const auto wrong = (x_hat.array() != x_clean.array()).count();
  return static_cast<double>(wrong) / static_cast<double>(x_hat.size());
}

double completion_accuracy(const BinaryMatrix& x_hat, const BinaryMatrix& reference,
                           const Mask& heldout) {
  if (heldout.rows() != x_hat.rows() || heldout.cols() != x_hat.cols()) {
    throw DimensionError("completion_accuracy: dimension mismatch");
  }
  if ((heldout.array() != 0).count() == 0) {
    throw EmptyMaskError("completion_accuracy: empty held-out set");
  }
  return 1.0 - hamming_fraction(x_hat, reference, heldout);
}

}  // namespace bmf
