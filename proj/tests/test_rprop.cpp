#include <doctest.h>

#include <random>

#include "bmf/em.hpp"
#include "bmf/rprop.hpp"
#include "bmf/synth.hpp"

using bmf::BetaPrior;
using bmf::Factors;
using bmf::NoiseModel;
using bmf::RealMatrix;
using bmf::RpropConfig;
using bmf::RpropState;

TEST_CASE("zero gradient leaves parameters untouched") {
  Factors params{RealMatrix::Constant(3, 2, 0.7), RealMatrix::Constant(4, 2, -1.1)};
  const Factors before = params;
  RpropConfig config;
  RpropState state = RpropState::initial(params, config);
  for (int i = 0; i < 5; ++i) {
    rprop_step(params, RealMatrix::Zero(3, 2), RealMatrix::Zero(4, 2), state, config);
  }
  CHECK(params.a == before.a);
  CHECK(params.b == before.b);
}

TEST_CASE("a step past the bound is clipped to exactly 5") {
  Factors params{RealMatrix::Constant(1, 1, 4.995), RealMatrix::Zero(1, 1)};
  RpropConfig config;
  RpropState state = RpropState::initial(params, config);
  rprop_step(params, RealMatrix::Constant(1, 1, 1.0), RealMatrix::Zero(1, 1), state, config);
  CHECK(params.a(0, 0) == 5.0);
  params.a(0, 0) = -4.995;
  state = RpropState::initial(params, config);
  rprop_step(params, RealMatrix::Constant(1, 1, -1.0), RealMatrix::Zero(1, 1), state, config);
  CHECK(params.a(0, 0) == -5.0);
}

TEST_CASE("step grows on agreeing signs and shrinks on a flip") {
  Factors params{RealMatrix::Zero(1, 1), RealMatrix::Zero(1, 1)};
  RpropConfig config;
  RpropState state = RpropState::initial(params, config);
  const RealMatrix up = RealMatrix::Constant(1, 1, 3.0), down = RealMatrix::Constant(1, 1, -3.0);
  const RealMatrix none = RealMatrix::Zero(1, 1);

  rprop_step(params, up, none, state, config);
  CHECK(state.step_a(0, 0) == doctest::Approx(0.01));
  CHECK(params.a(0, 0) == doctest::Approx(0.01));
  rprop_step(params, up, none, state, config);
  CHECK(state.step_a(0, 0) == doctest::Approx(0.012));
  rprop_step(params, up, none, state, config);
  CHECK(state.step_a(0, 0) == doctest::Approx(0.0144));
  CHECK(params.a(0, 0) == doctest::Approx(0.0364));

  rprop_step(params, down, none, state, config);
  CHECK(state.step_a(0, 0) == doctest::Approx(0.0072));
  CHECK(params.a(0, 0) == doctest::Approx(0.0364));  // no move on the flip
  rprop_step(params, down, none, state, config);
  CHECK(state.step_a(0, 0) == doctest::Approx(0.0072));
  CHECK(params.a(0, 0) == doctest::Approx(0.0292));
}

TEST_CASE("steps stay within [step_min, step_max]") {
  Factors params{RealMatrix::Zero(1, 1), RealMatrix::Zero(1, 1)};
  RpropConfig config;
  config.clip_bound = 1e9;
  RpropState state = RpropState::initial(params, config);
  const RealMatrix none = RealMatrix::Zero(1, 1);
  for (int i = 0; i < 100; ++i) {
    rprop_step(params, RealMatrix::Constant(1, 1, 1.0), none, state, config);
  }
  CHECK(state.step_a(0, 0) == config.step_max);
  for (int i = 0; i < 200; ++i) {
    rprop_step(params, RealMatrix::Constant(1, 1, i % 2 ? 1.0 : -1.0), none, state, config);
  }
  CHECK(state.step_a(0, 0) >= config.step_min);
}

TEST_CASE("config validation") {
  RpropConfig config;
  config.eta_plus = 0.9;
  CHECK_THROWS_AS(config.validate(), bmf::InvalidArgument);
  config = {};
  config.step_min = 0.1;
  CHECK_THROWS_AS(config.validate(), bmf::InvalidArgument);
  config = {};
  config.stable_iters = 0;
  CHECK_THROWS_AS(config.validate(), bmf::InvalidArgument);
}

TEST_CASE("an exactly representable instance converges at once with stable_iters = 1") {
  bmf::BinaryMatrix u(4, 2), z(5, 2);
  u << 1, 0, 0, 1, 1, 1, 0, 0;
  z << 1, 0, 1, 1, 0, 1, 0, 0, 1, 0;
  const bmf::ObservedMatrix x(bmf::boolean_product(u, z));
  Factors params{RealMatrix(u.cast<double>().array() * 10 - 5),
                 RealMatrix(z.cast<double>().array() * 10 - 5)};
  RpropConfig config;
  config.stable_iters = 1;
  const auto result = bmf::run_m_step(x, params, NoiseModel{0.0}, BetaPrior{}, config);
  CHECK(result.iterations == 1);
  CHECK_FALSE(result.capped);
  CHECK(bmf::reconstruct(result.params, NoiseModel{0.0}) == x.values());
}

TEST_CASE("the M-step never returns a worse objective than its starting point") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    bmf::SynthConfig sc;
    sc.n = 20;
    sc.m = 15;
    sc.rank = 3;
    sc.noise = 0.1;
    sc.seed = trial;
    const auto inst = bmf::generate(sc);
    const Factors start = bmf::initial_factors(20, 15, 3, 1.0, rng());
    const NoiseModel noise{0.1};
    const BetaPrior prior{0.95, 0.95};
    RpropConfig config;
    config.max_inner_iters = 30;
    const auto result = bmf::run_m_step(inst.x_noisy, start, noise, prior, config);
    CHECK(result.objective >= bmf::log_posterior(inst.x_noisy, start, noise, prior) - 1e-9);
    CHECK(result.objective == doctest::Approx(bmf::log_posterior(inst.x_noisy, result.params, noise, prior)));
  }
}

TEST_CASE("iteration cap is honoured and reported") {
  bmf::SynthConfig sc;
  sc.n = 30;
  sc.m = 30;
  sc.rank = 3;
  sc.noise = 0.2;
  const auto inst = bmf::generate(sc);
  RpropConfig config;
  config.max_inner_iters = 7;
  const auto result = bmf::run_m_step(inst.x_noisy, bmf::initial_factors(30, 30, 3, 0.01, 1),
                                      NoiseModel{0.2}, BetaPrior{0.95, 0.95}, config);
  CHECK(result.iterations == 7);
  CHECK(result.capped);
}

TEST_CASE("converged M-step reconstructs noiseless 50x50 rank-3 data exactly in >= 8/10 seeds") {
  int exact = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    bmf::SynthConfig sc;
    sc.n = 50;
    sc.m = 50;
    sc.rank = 3;
    sc.seed = seed;
    const auto inst = bmf::generate(sc);
    const auto result = bmf::run_m_step(inst.x_noisy, bmf::initial_factors(50, 50, 3, 0.01, seed),
                                        NoiseModel{0.0}, BetaPrior{1.0, 1.0}, RpropConfig{});
    CHECK_FALSE(result.capped);
    if (bmf::reconstruct(result.params, NoiseModel{0.0}) == inst.x_clean) ++exact;
  }
  CHECK(exact >= 8);
}

TEST_CASE("M-step is deterministic") {
  bmf::SynthConfig sc;
  sc.n = 25;
  sc.m = 20;
  sc.rank = 2;
  sc.noise = 0.1;
  const auto inst = bmf::generate(sc);
  const Factors start = bmf::initial_factors(25, 20, 2, 0.01, 9);
  const auto r1 = bmf::run_m_step(inst.x_noisy, start, NoiseModel{0.1}, BetaPrior{0.95, 0.95}, {});
  const auto r2 = bmf::run_m_step(inst.x_noisy, start, NoiseModel{0.1}, BetaPrior{0.95, 0.95}, {});
  CHECK(r1.params.a == r2.params.a);
  CHECK(r1.params.b == r2.params.b);
  CHECK(r1.objective == r2.objective);
  CHECK(r1.iterations == r2.iterations);
}
