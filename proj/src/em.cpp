#include "bmf/em.hpp"

#include <cmath>
#include <random>

namespace bmf {

void EmConfig::validate() const {
  if (rank < 1) throw InvalidArgument("rank must be at least 1");
  if (!(eps_tolerance > 0.0)) throw InvalidArgument("eps_tolerance must be positive");
  if (max_outer_iters < 1) throw InvalidArgument("max_outer_iters must be at least 1");
  if (!(init_std >= 0.0)) throw InvalidArgument("init_std must be non-negative");
  bmf::validate(prior);
  rprop.validate();
}

Factors initial_factors(Eigen::Index rows, Eigen::Index cols, int rank, double init_std,
                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, init_std);
  Factors params{RealMatrix(rows, rank), RealMatrix(cols, rank)};
  for (Eigen::Index i = 0; i < params.a.size(); ++i) params.a.data()[i] = gauss(rng);
  for (Eigen::Index i = 0; i < params.b.size(); ++i) params.b.data()[i] = gauss(rng);
  return params;
}

double estimate_epsilon(const ObservedMatrix& x, const Factors& params, const NoiseModel& noise,
                        EpsilonEstimator estimator) {
  if (x.observed_count() == 0) throw EmptyMaskError("no observed entries");
  const RealMatrix p_star = noisy_probability(clean_probability(params), noise);
  if (estimator == EpsilonEstimator::kReconstruction) {
    return hamming_fraction(threshold(p_star), x.values(), x.mask());
  }
  double total = 0.0;
  for (Eigen::Index n = 0; n < x.rows(); ++n) {
    for (Eigen::Index m = 0; m < x.cols(); ++m) {
      if (x.observed(n, m)) total += std::abs(double(x(n, m)) - p_star(n, m));
    }
  }
  return total / static_cast<double>(x.observed_count());
}

FitResult fit(const ObservedMatrix& x, const EmConfig& config) {
  config.validate();
  if (x.observed_count() == 0) throw EmptyMaskError("fit: no observed entries");

  FitResult result;
  result.params = initial_factors(x.rows(), x.cols(), config.rank, config.init_std, config.seed);
  NoiseModel noise{0.0};
  double estimate = 0.0;

  for (int outer = 1; outer <= config.max_outer_iters; ++outer) {
    MStepResult m_step = run_m_step(x, std::move(result.params), noise, config.prior, config.rprop);
    result.params = std::move(m_step.params);
    result.inner_iters += m_step.iterations;
    result.inner_capped = result.inner_capped || m_step.capped;
    result.outer_iters = outer;

    const double raw = estimate_epsilon(x, result.params, noise, config.estimator);
    estimate = NoiseModel::clamp(raw);
    result.epsilon_clamped = raw > NoiseModel::kMax;
    if (std::abs(noise.epsilon - estimate) <= config.eps_tolerance) {
      result.converged = true;
      break;
    }
    noise.epsilon = estimate;
  }

  noise.epsilon = estimate;
  result.reconstruction = reconstruct(result.params, noise);
  if (config.estimator == EpsilonEstimator::kReconstruction) {
    // Recompute from the returned reconstruction so the two agree exactly
    // even when a cell sits on the 1/2 threshold.
    const double raw = hamming_fraction(result.reconstruction, x.values(), x.mask());
    noise.epsilon = NoiseModel::clamp(raw);
    result.epsilon_clamped = raw > NoiseModel::kMax;
  }
  result.epsilon = noise.epsilon;
  result.mu = result.params.mu();
  result.zeta = result.params.zeta();
  result.objective = log_posterior(x, result.params, noise, config.prior);
  return result;
}

BinaryMatrix complete(const ObservedMatrix& x, const EmConfig& config) {
  return fit(x, config).reconstruction;
}

}  // namespace bmf
