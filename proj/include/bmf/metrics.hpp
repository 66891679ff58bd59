#pragma once

#include <optional>

#include "bmf/matrix.hpp"

namespace bmf {

struct EvalReport {
  double reconstruction_error = 0.0;
  std::optional<double> completion_accuracy;
  double estimated_epsilon = 0.0;
  std::optional<double> true_epsilon;
  double objective = 0.0;
};

/// |x_hat - x_clean| summed over all cells, divided by N*M.
double reconstruction_error(const BinaryMatrix& x_hat, const BinaryMatrix& x_clean);

/// Agreement of x_hat with reference on the held-out cells.
double completion_accuracy(const BinaryMatrix& x_hat, const BinaryMatrix& reference,
                           const Mask& heldout);

inline double completion_accuracy(const BinaryMatrix& x_hat, const ObservedMatrix& reference,
                                  const Mask& heldout) {
  return completion_accuracy(x_hat, reference.values(), heldout);
}

}  // namespace bmf
