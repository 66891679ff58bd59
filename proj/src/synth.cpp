#include "bmf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace bmf {

void SynthConfig::validate() const {
  if (n < 1 || m < 1) throw InvalidArgument("matrix dimensions must be positive");
  if (rank < 1) throw InvalidArgument("rank must be at least 1");
  if (!(target_density > 0.0 && target_density < 1.0)) {
    throw InvalidArgument("target density must lie in (0, 1)");
  }
  if (!(prior_spread >= 0.0)) throw InvalidArgument("prior spread must be non-negative");
  if (!(noise >= 0.0 && noise < 0.5)) throw InvalidArgument("noise must lie in [0, 0.5)");
  if (!(observed_fraction > 0.0 && observed_fraction <= 1.0)) {
    throw InvalidArgument("observed fraction must lie in (0, 1]");
  }
}

double density_to_p(double target_density, int rank) {
  if (!(target_density > 0.0 && target_density < 1.0)) {
    throw InvalidArgument("target density must lie in (0, 1)");
  }
  if (rank < 1) throw InvalidArgument("rank must be at least 1");
  // 1 - (1 - d)^(1/L), evaluated via expm1/log1p to keep precision near 0.
  const double p_squared = -std::expm1(std::log1p(-target_density) / rank);
  return std::sqrt(p_squared);
}

double p_to_density(double p, int rank) {
  return -std::expm1(rank * std::log1p(-p * p));
}

SynthInstance generate(const SynthConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SynthInstance out;
  out.p = density_to_p(config.target_density, config.rank);
  out.true_epsilon = config.noise;

  const int rank = config.rank;
  std::vector<double> omega(rank, out.p);
  std::vector<double> theta(rank, out.p);
  if (config.vary_priors) {
    std::uniform_real_distribution<double> spread(out.p - config.prior_spread,
                                                  out.p + config.prior_spread);
    for (int l = 0; l < rank; ++l) {
      omega[l] = std::clamp(spread(rng), 0.0, 1.0);
      theta[l] = std::clamp(spread(rng), 0.0, 1.0);
    }
  }

  out.u.resize(config.n, rank);
  out.z.resize(config.m, rank);
  for (Eigen::Index n = 0; n < config.n; ++n) {
    for (int l = 0; l < rank; ++l) out.u(n, l) = unit(rng) < omega[l] ? 1 : 0;
  }
  for (Eigen::Index m = 0; m < config.m; ++m) {
    for (int l = 0; l < rank; ++l) out.z(m, l) = unit(rng) < theta[l] ? 1 : 0;
  }
  out.x_clean = boolean_product(out.u, out.z);

  out.flips = Mask::Zero(config.n, config.m);
  BinaryMatrix noisy = out.x_clean;
  for (Eigen::Index i = 0; i < noisy.size(); ++i) {
    if (unit(rng) < config.noise) {
      out.flips.data()[i] = 1;
      noisy.data()[i] = 1 - noisy.data()[i];
    }
  }

  Mask mask = full_mask(config.n, config.m);
  if (config.observed_fraction < 1.0) {
    const Eigen::Index total = mask.size();
    const auto keep = static_cast<Eigen::Index>(std::floor(total * config.observed_fraction));
    std::vector<Eigen::Index> cells(static_cast<std::size_t>(total));
    std::iota(cells.begin(), cells.end(), Eigen::Index{0});
    std::shuffle(cells.begin(), cells.end(), rng);
    mask.setZero();
    for (Eigen::Index k = 0; k < keep; ++k) mask.data()[cells[static_cast<std::size_t>(k)]] = 1;
  }
  out.x_noisy = ObservedMatrix(std::move(noisy), std::move(mask));
  return out;
}

}  // namespace bmf
