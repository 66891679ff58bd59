#pragma once

#include <cstdint>

#include "bmf/matrix.hpp"

namespace bmf {

/// Synthetic benchmark configuration.
struct SynthConfig {
  Eigen::Index n = 1000;
  Eigen::Index m = 1000;
  int rank = 5;
  double target_density = 0.5;
  double prior_spread = 0.2;
  double noise = 0.0;
  double observed_fraction = 1.0;
  std::uint64_t seed = 0;
  bool vary_priors = true;

  void validate() const;
};

struct SynthInstance {
  BinaryMatrix u;  // N x L
  BinaryMatrix z;  // M x L
  BinaryMatrix x_clean;
  ObservedMatrix x_noisy;
  Mask flips;
  /// Configured flip probability.
  double true_epsilon = 0.0;
  /// Bernoulli parameter calibrated from the target density.
  double p = 0.0;
};

/// Inverts Pr(X=1) = 1 - (1 - p^2)^L for p.
double density_to_p(double target_density, int rank);

/// Forward map Pr(X=1) = 1 - (1 - p^2)^L.
double p_to_density(double p, int rank);

SynthInstance generate(const SynthConfig& config);

}  // namespace bmf
