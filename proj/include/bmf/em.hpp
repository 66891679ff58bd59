#pragma once

#include <cstdint>

#include "bmf/matrix.hpp"
#include "bmf/model.hpp"
#include "bmf/rprop.hpp"

namespace bmf {

/// How the E-step re-estimates the flip probability.
enum class EpsilonEstimator {
  /// Disagreement fraction between the thresholded reconstruction and the data.
  kReconstruction,
  /// Mean |X* - P*| over observed cells.
  kExpected,
};

struct EmConfig {
  int rank = 5;
  BetaPrior prior{0.95, 0.95};
  RpropConfig rprop;
  double eps_tolerance = 1e-3;
  int max_outer_iters = 50;
  std::uint64_t seed = 0;
  double init_std = 0.01;
  EpsilonEstimator estimator = EpsilonEstimator::kReconstruction;

  void validate() const;
};

/// Output of the EM fit.
struct FitResult {
  RealMatrix mu;    // N x L
  RealMatrix zeta;  // M x L
  Factors params;
  double epsilon = 0.0;
  BinaryMatrix reconstruction;
  /// Log-posterior of `params` at the returned epsilon.
  double objective = 0.0;
  int outer_iters = 0;
  int inner_iters = 0;
  /// The epsilon change fell below tolerance before the outer cap.
  bool converged = false;
  /// Some M-step hit max_inner_iters.
  bool inner_capped = false;
  /// The raw estimate reached 1/2 and was clamped.
  bool epsilon_clamped = false;
};

/// A, B ~ Gaussian(0, init_std) from the seed.
Factors initial_factors(Eigen::Index rows, Eigen::Index cols, int rank, double init_std,
                        std::uint64_t seed);

/// Estimated flip probability for `params` against the observed cells of x.
double estimate_epsilon(const ObservedMatrix& x, const Factors& params, const NoiseModel& noise,
                        EpsilonEstimator estimator);

/// Alternates M-steps at fixed epsilon with E-step noise re-estimation.
FitResult fit(const ObservedMatrix& x, const EmConfig& config);

/// Fits on the observed cells and returns the full denoised reconstruction.
BinaryMatrix complete(const ObservedMatrix& x, const EmConfig& config);

}  // namespace bmf
