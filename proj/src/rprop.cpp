#include "bmf/rprop.hpp"

#include <algorithm>

namespace bmf {

void RpropConfig::validate() const {
  if (!(eta_minus > 0.0 && eta_minus < 1.0 && eta_plus > 1.0)) {
    throw InvalidArgument("RPROP requires 0 < eta_minus < 1 < eta_plus");
  }
  if (!(step_min > 0.0 && step_min <= step_init && step_init <= step_max)) {
    throw InvalidArgument("RPROP requires 0 < step_min <= step_init <= step_max");
  }
  if (!(clip_bound > 0.0)) throw InvalidArgument("clip bound must be positive");
  if (max_inner_iters < 1) throw InvalidArgument("max_inner_iters must be at least 1");
  if (stable_iters < 1) throw InvalidArgument("stable_iters must be at least 1");
}

RpropState RpropState::initial(const Factors& params, const RpropConfig& config) {
  return {RealMatrix::Constant(params.a.rows(), params.a.cols(), config.step_init),
          RealMatrix::Constant(params.b.rows(), params.b.cols(), config.step_init),
          SignMatrix::Zero(params.a.rows(), params.a.cols()),
          SignMatrix::Zero(params.b.rows(), params.b.cols())};
}

namespace {

std::int8_t sign_of(double g) { return static_cast<std::int8_t>((g > 0.0) - (g < 0.0)); }

void update(RealMatrix& param, const RealMatrix& grad, RealMatrix& step, SignMatrix& prev,
            const RpropConfig& config) {
  if (grad.rows() != param.rows() || grad.cols() != param.cols()) {
    throw DimensionError("rprop_step: gradient shape does not match parameters");
  }
  for (Eigen::Index i = 0; i < param.size(); ++i) {
    std::int8_t s = sign_of(grad.data()[i]);
    const int agreement = s * prev.data()[i];
    double& h = step.data()[i];
    if (agreement > 0) {
      h = std::min(h * config.eta_plus, config.step_max);
    } else if (agreement < 0) {
      h = std::max(h * config.eta_minus, config.step_min);
      s = 0;
    }
    double& p = param.data()[i];
    p = std::clamp(p + s * h, -config.clip_bound, config.clip_bound);
    prev.data()[i] = s;
  }
}

}  // namespace

void rprop_step(Factors& params, const RealMatrix& grad_a, const RealMatrix& grad_b,
                RpropState& state, const RpropConfig& config) {
  update(params.a, grad_a, state.step_a, state.sign_a, config);
  update(params.b, grad_b, state.step_b, state.sign_b, config);
}

MStepResult run_m_step(const ObservedMatrix& x, Factors params, const NoiseModel& noise,
                       const BetaPrior& prior, const RpropConfig& config) {
  config.validate();
  validate(noise);
  validate(prior);

  RpropState state = RpropState::initial(params, config);
  MStepResult best{params, 0.0, 0, true};
  bool have_best = false;
  BinaryMatrix previous = reconstruct(params, noise);
  int unchanged = 0;

  for (int iter = 1; iter <= config.max_inner_iters; ++iter) {
    const Evaluation<double> eval = evaluate(x, params, noise, prior);
    if (!have_best || eval.objective > best.objective) {
      best.params = params;
      best.objective = eval.objective;
      have_best = true;
    }
    rprop_step(params, eval.grad_a, eval.grad_b, state, config);
    best.iterations = iter;

    BinaryMatrix current = reconstruct(params, noise);
    unchanged = (current == previous) ? unchanged + 1 : 0;
    previous = std::move(current);
    if (unchanged >= config.stable_iters) {
      best.capped = false;
      break;
    }
  }

  const double final_objective = log_posterior(x, params, noise, prior);
  if (final_objective >= best.objective) {
    best.params = std::move(params);
    best.objective = final_objective;
  }
  return best;
}

}  // namespace bmf
