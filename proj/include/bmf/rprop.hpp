#pragma once

#include <Eigen/Dense>

#include <cstdint>

#include "bmf/matrix.hpp"
#include "bmf/model.hpp"

namespace bmf {

struct RpropConfig {
  double eta_plus = 1.2;
  double eta_minus = 0.5;
  double step_init = 0.01;
  double step_min = 1e-6;
  double step_max = 1.0;
  double clip_bound = 5.0;
  int max_inner_iters = 2000;
  /// The M-step stops once the full reconstruction has stayed unchanged for
  /// this many consecutive updates. 1 stops at the first unchanged update.
  int stable_iters = 50;

  void validate() const;
};

using SignMatrix = Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Per-parameter step sizes and last applied gradient signs.
struct RpropState {
  RealMatrix step_a;
  RealMatrix step_b;
  SignMatrix sign_a;
  SignMatrix sign_b;

  static RpropState initial(const Factors& params, const RpropConfig& config);
};

/// One iRprop- ascent update followed by clipping to [-clip_bound, clip_bound].
void rprop_step(Factors& params, const RealMatrix& grad_a, const RealMatrix& grad_b,
                RpropState& state, const RpropConfig& config);

struct MStepResult {
  Factors params;
  double objective = 0.0;  // log-posterior at `params`
  int iterations = 0;
  bool capped = false;
};

/// Fits A and B at fixed noise until the reconstruction stops changing.
///
/// Returns the best parameters seen, so the objective never drops below its
/// value at entry.
MStepResult run_m_step(const ObservedMatrix& x, Factors params, const NoiseModel& noise,
                       const BetaPrior& prior, const RpropConfig& config);

}  // namespace bmf
