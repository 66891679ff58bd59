#pragma once

// Noisy-OR generative model with flip noise and Beta priors, reparameterized
// through the logistic sigmoid so the factors can be optimized unconstrained.
//
//   mu = sigmoid(A)              N x L
//   zeta = sigmoid(B)            M x L
//   P(n,m) = 1 - prod_l (1 - mu(n,l) * zeta(m,l))
//   P*(n,m) = (1 - eps) P + eps (1 - P)
//
// Every sum over cells runs over observed cells only.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <vector>

#include "bmf/error.hpp"
#include "bmf/matrix.hpp"
#include "bmf/parallel.hpp"

namespace bmf {

template <std::floating_point Scalar>
Scalar sigmoid(Scalar a) {
  using std::exp;
  return Scalar(1) / (Scalar(1) + exp(-a));
}

template <std::floating_point Scalar>
Scalar logit(Scalar p) {
  using std::log;
  return log(p / (Scalar(1) - p));
}

/// log(1 + exp(a)) without overflow.
template <std::floating_point Scalar>
Scalar softplus(Scalar a) {
  using std::exp;
  using std::log1p;
  return a > Scalar(0) ? a + log1p(exp(-a)) : log1p(exp(a));
}

template <typename Derived>
auto sigmoid(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  return a.unaryExpr([](Scalar v) { return sigmoid(v); });
}

/// Unconstrained factor parameters; mu = sigmoid(a), zeta = sigmoid(b).
template <typename Scalar>
struct FactorParams {
  RealMatrixT<Scalar> a;  // N x L
  RealMatrixT<Scalar> b;  // M x L

  Eigen::Index rank() const { return a.cols(); }
  RealMatrixT<Scalar> mu() const { return sigmoid(a); }
  RealMatrixT<Scalar> zeta() const { return sigmoid(b); }

  template <typename Other>
  FactorParams<Other> cast() const {
    return {a.template cast<Other>(), b.template cast<Other>()};
  }
};

using Factors = FactorParams<double>;

/// Flip probability. Kept at most 1/2 - delta so that 1 - 2 eps stays positive.
struct NoiseModel {
  static constexpr double kDelta = 1e-6;
  static constexpr double kMax = 0.5 - kDelta;

  double epsilon = 0.0;

  static double clamp(double eps) { return std::clamp(eps, 0.0, kMax); }
};

/// Beta(alpha, beta) prior shared by every entry of mu and zeta.
struct BetaPrior {
  double alpha = 1.0;
  double beta = 1.0;

  bool neutral() const { return alpha == 1.0 && beta == 1.0; }
};

inline void validate(const NoiseModel& noise) {
  if (!(noise.epsilon >= 0.0 && noise.epsilon <= NoiseModel::kMax)) {
    throw InvalidArgument("flip probability must lie in [0, 1/2)");
  }
}

inline void validate(const BetaPrior& prior) {
  if (!(prior.alpha > 0.0 && prior.beta > 0.0)) {
    throw InvalidArgument("Beta prior shapes must be positive");
  }
}

/// Lower/upper clamp applied to P* before taking logs.
inline constexpr double kProbabilityFloor = 1e-12;

namespace detail {

template <typename Scalar>
Scalar clamp_probability(Scalar p) {
  const Scalar lo(kProbabilityFloor);
  const Scalar hi = Scalar(1) - lo;
  return std::min(std::max(p, lo), hi);
}

template <typename Scalar>
void check_shapes(const ObservedMatrix& x, const RealMatrixT<Scalar>& mu,
                  const RealMatrixT<Scalar>& zeta) {
  if (mu.rows() != x.rows() || zeta.rows() != x.cols() || mu.cols() != zeta.cols()) {
    throw DimensionError("factor shapes do not match the observed matrix");
  }
}

}  // namespace detail

/// P(n,m) = 1 - prod_l (1 - mu(n,l) zeta(m,l)).
template <typename Scalar>
RealMatrixT<Scalar> clean_probability(const RealMatrixT<Scalar>& mu,
                                      const RealMatrixT<Scalar>& zeta) {
  if (mu.cols() != zeta.cols()) throw DimensionError("clean_probability: rank mismatch");
  const Eigen::Index rows = mu.rows();
  const Eigen::Index cols = zeta.rows();
  const Eigen::Index rank = mu.cols();
  RealMatrixT<Scalar> p(rows, cols);
  parallel_for(rows, [&](long begin, long end) {
    for (long n = begin; n < end; ++n) {
      for (Eigen::Index m = 0; m < cols; ++m) {
        Scalar q(1);
        for (Eigen::Index l = 0; l < rank; ++l) q *= Scalar(1) - mu(n, l) * zeta(m, l);
        p(n, m) = Scalar(1) - q;
      }
    }
  });
  return p;
}

template <typename Scalar>
RealMatrixT<Scalar> clean_probability(const FactorParams<Scalar>& params) {
  return clean_probability<Scalar>(params.mu(), params.zeta());
}

/// P* = (1 - eps) P + eps (1 - P).
template <typename Derived>
auto noisy_probability(const Eigen::MatrixBase<Derived>& p, const NoiseModel& noise) {
  using Scalar = typename Derived::Scalar;
  const Scalar eps(noise.epsilon);
  return p.unaryExpr([eps](Scalar v) { return (Scalar(1) - eps) * v + eps * (Scalar(1) - v); });
}

/// Bernoulli log-likelihood of the observed cells under `p_star`.
///
/// `p_star` is clamped to [1e-12, 1 - 1e-12] before the logs. A fully masked
/// matrix gives 0.
template <typename Scalar>
Scalar log_likelihood(const ObservedMatrix& x, const RealMatrixT<Scalar>& p_star) {
  using std::log;
  if (p_star.rows() != x.rows() || p_star.cols() != x.cols()) {
    throw DimensionError("log_likelihood: dimension mismatch");
  }
  std::vector<Scalar> row_sums(static_cast<std::size_t>(x.rows()), Scalar(0));
  parallel_for(x.rows(), [&](long begin, long end) {
    for (long n = begin; n < end; ++n) {
      Scalar s(0);
      for (Eigen::Index m = 0; m < x.cols(); ++m) {
        if (!x.observed(n, m)) continue;
        const Scalar p = detail::clamp_probability(p_star(n, m));
        s += x(n, m) ? log(p) : log(Scalar(1) - p);
      }
      row_sums[static_cast<std::size_t>(n)] = s;
    }
  });
  Scalar total(0);
  for (const Scalar& s : row_sums) total += s;
  using std::isfinite;
  if (!isfinite(total)) throw NumericalDomainError("log-likelihood is not finite");
  return total;
}

/// (alpha - 1) sum log(mu) + (beta - 1) sum log(1 - mu), same for zeta.
template <typename Scalar>
Scalar log_prior(const FactorParams<Scalar>& params, const BetaPrior& prior) {
  const Scalar am1 = Scalar(prior.alpha) - Scalar(1);
  const Scalar bm1 = Scalar(prior.beta) - Scalar(1);
  // log sigmoid(a) = -softplus(-a), log(1 - sigmoid(a)) = -softplus(a)
  auto accumulate = [&](const RealMatrixT<Scalar>& raw) {
    Scalar log_p(0);
    Scalar log_q(0);
    for (Eigen::Index i = 0; i < raw.size(); ++i) {
      log_p -= softplus(-raw.data()[i]);
      log_q -= softplus(raw.data()[i]);
    }
    return am1 * log_p + bm1 * log_q;
  };
  return accumulate(params.a) + accumulate(params.b);
}

template <typename Scalar>
Scalar log_posterior(const ObservedMatrix& x, const FactorParams<Scalar>& params,
                     const NoiseModel& noise, const BetaPrior& prior) {
  detail::check_shapes<Scalar>(x, params.a, params.b);
  const RealMatrixT<Scalar> p_star = noisy_probability(clean_probability(params), noise);
  return log_likelihood<Scalar>(x, p_star) + log_prior(params, prior);
}

/// Objective value and its gradient with respect to A and B.
template <typename Scalar>
struct Evaluation {
  Scalar objective;
  RealMatrixT<Scalar> grad_a;
  RealMatrixT<Scalar> grad_b;
};

/// Log-likelihood and its exact gradient, in one pass over the cells.
///
/// With W(n,m) = (1 - 2 eps) (x - P*) / (P* (1 - P*)) * prod_k (1 - mu zeta)
/// on observed cells (0 elsewhere):
///   dLL/dA(n,l) = mu(1 - mu) sum_m W(n,m) zeta(m,l) / (1 - mu(n,l) zeta(m,l))
///   dLL/dB(m,l) = zeta(1 - zeta) sum_n W(n,m) mu(n,l) / (1 - mu(n,l) zeta(m,l))
template <typename Scalar>
Evaluation<Scalar> evaluate_likelihood(const ObservedMatrix& x, const FactorParams<Scalar>& params,
                                       const NoiseModel& noise) {
  using std::log;
  detail::check_shapes<Scalar>(x, params.a, params.b);
  const Eigen::Index rows = x.rows();
  const Eigen::Index cols = x.cols();
  const Eigen::Index rank = params.rank();
  const RealMatrixT<Scalar> mu = params.mu();
  const RealMatrixT<Scalar> zeta = params.zeta();
  const Scalar eps(noise.epsilon);
  const Scalar slope = Scalar(1) - Scalar(2) * eps;

  RealMatrixT<Scalar> weight(rows, cols);
  Evaluation<Scalar> out{Scalar(0), RealMatrixT<Scalar>::Zero(rows, rank),
                         RealMatrixT<Scalar>::Zero(cols, rank)};
  std::vector<Scalar> row_ll(static_cast<std::size_t>(rows), Scalar(0));

  parallel_for(rows, [&](long begin, long end) {
    std::vector<Scalar> factor(static_cast<std::size_t>(rank));
    for (long n = begin; n < end; ++n) {
      Scalar ll(0);
      for (Eigen::Index m = 0; m < cols; ++m) {
        if (!x.observed(n, m)) {
          weight(n, m) = Scalar(0);
          continue;
        }
        Scalar q(1);
        for (Eigen::Index l = 0; l < rank; ++l) {
          factor[l] = Scalar(1) - mu(n, l) * zeta(m, l);
          q *= factor[l];
        }
        const Scalar p_star = detail::clamp_probability(eps + slope * (Scalar(1) - q));
        const Scalar obs(x(n, m));
        ll += x(n, m) ? log(p_star) : log(Scalar(1) - p_star);
        const Scalar w = slope * (obs - p_star) / (p_star * (Scalar(1) - p_star)) * q;
        weight(n, m) = w;
        for (Eigen::Index l = 0; l < rank; ++l) out.grad_a(n, l) += w * zeta(m, l) / factor[l];
      }
      for (Eigen::Index l = 0; l < rank; ++l) {
        out.grad_a(n, l) *= mu(n, l) * (Scalar(1) - mu(n, l));
      }
      row_ll[static_cast<std::size_t>(n)] = ll;
    }
  });

  parallel_for(cols, [&](long begin, long end) {
    for (long m = begin; m < end; ++m) {
      for (Eigen::Index n = 0; n < rows; ++n) {
        const Scalar w = weight(n, m);
        if (w == Scalar(0)) continue;
        for (Eigen::Index l = 0; l < rank; ++l) {
          out.grad_b(m, l) += w * mu(n, l) / (Scalar(1) - mu(n, l) * zeta(m, l));
        }
      }
      for (Eigen::Index l = 0; l < rank; ++l) {
        out.grad_b(m, l) *= zeta(m, l) * (Scalar(1) - zeta(m, l));
      }
    }
  });

  for (const Scalar& s : row_ll) out.objective += s;
  using std::isfinite;
  if (!isfinite(out.objective) || !out.grad_a.allFinite() || !out.grad_b.allFinite()) {
    throw NumericalDomainError("objective or gradient is not finite");
  }
  return out;
}

/// Log-posterior and its gradient: likelihood terms plus the Beta prior terms
///   d/dA (alpha - 1) log mu + (beta - 1) log(1 - mu) = (alpha - 1)(1 - mu) - (beta - 1) mu.
template <typename Scalar>
Evaluation<Scalar> evaluate(const ObservedMatrix& x, const FactorParams<Scalar>& params,
                            const NoiseModel& noise, const BetaPrior& prior) {
  Evaluation<Scalar> out = evaluate_likelihood(x, params, noise);
  const Scalar am1 = Scalar(prior.alpha) - Scalar(1);
  const Scalar bm1 = Scalar(prior.beta) - Scalar(1);
  auto prior_grad = [&](const RealMatrixT<Scalar>& raw, RealMatrixT<Scalar>& grad) {
    for (Eigen::Index i = 0; i < raw.size(); ++i) {
      const Scalar p = sigmoid(raw.data()[i]);
      grad.data()[i] += am1 * (Scalar(1) - p) - bm1 * p;
    }
  };
  prior_grad(params.a, out.grad_a);
  prior_grad(params.b, out.grad_b);
  out.objective += log_prior(params, prior);
  return out;
}

/// Gradient of the noise-free log-likelihood in its direct form
///   dLL/dA(i,l) = sum_j (X/P - 1) mu zeta (1 - mu) / (1 - mu zeta)
/// and symmetrically for B. Used as an independent route at eps = 0.
template <typename Scalar>
std::pair<RealMatrixT<Scalar>, RealMatrixT<Scalar>> likelihood_gradients_noiseless(
    const ObservedMatrix& x, const FactorParams<Scalar>& params) {
  detail::check_shapes<Scalar>(x, params.a, params.b);
  const RealMatrixT<Scalar> mu = params.mu();
  const RealMatrixT<Scalar> zeta = params.zeta();
  const RealMatrixT<Scalar> p = clean_probability<Scalar>(mu, zeta);
  RealMatrixT<Scalar> ga = RealMatrixT<Scalar>::Zero(mu.rows(), mu.cols());
  RealMatrixT<Scalar> gb = RealMatrixT<Scalar>::Zero(zeta.rows(), zeta.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (!x.observed(i, j)) continue;
      const Scalar pc = detail::clamp_probability(p(i, j));
      const Scalar ratio = Scalar(x(i, j)) / pc - Scalar(1);
      for (Eigen::Index l = 0; l < mu.cols(); ++l) {
        const Scalar mz = mu(i, l) * zeta(j, l);
        const Scalar common = ratio * mz / (Scalar(1) - mz);
        ga(i, l) += common * (Scalar(1) - mu(i, l));
        gb(j, l) += common * (Scalar(1) - zeta(j, l));
      }
    }
  }
  return {ga, gb};
}

/// Thresholds P* at 1/2; ties go to 1.
template <typename Derived>
BinaryMatrix threshold(const Eigen::MatrixBase<Derived>& p_star) {
  using Scalar = typename Derived::Scalar;
  return p_star.unaryExpr([](Scalar v) -> std::uint8_t { return v >= Scalar(0.5) ? 1 : 0; });
}

template <typename Scalar>
BinaryMatrix reconstruct(const FactorParams<Scalar>& params, const NoiseModel& noise) {
  return threshold(noisy_probability(clean_probability(params), noise));
}

}  // namespace bmf
