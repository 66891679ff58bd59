// bmf: probabilistic Boolean matrix factorization from the command line.
//
//   bmf factorize --input X --rank L [--out PREFIX] ...
//   bmf complete  --input X --rank L [--heldout-out PATH] ...
//   bmf synth     --n N --m M --rank L --density F --noise F --observed F --seed S --out PREFIX
//   bmf bench     --spec SPEC.json [--output PATH]
//
// Exit codes: 0 converged / ok, 2 usage, 3 iteration cap reached, 4 I/O,
// 5 malformed input, 6 fit error.

#include <chrono>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bmf/em.hpp"
#include "bmf/harness.hpp"
#include "bmf/io.hpp"
#include "bmf/metrics.hpp"
#include "bmf/synth.hpp"

namespace {

enum ExitCode {
  kOk = 0,
  kUsage = 2,
  kCapped = 3,
  kIo = 4,
  kMalformed = 5,
  kFitError = 6,
};

struct FitOptions {
  std::string input;
  int rank = 0;
  double alpha = 0.95;
  double beta = 0.95;
  double eps_tol = 1e-3;
  int max_outer = 50;
  int max_inner = 2000;
  int stable_iters = 50;
  std::uint64_t seed = 0;
  bool exact_eps = false;
  std::string out = "bmf_out";
};

void add_fit_options(CLI::App* cmd, FitOptions& o) {
  cmd->add_option("--input", o.input, "Input matrix (bmf-dense or bmf-sparse)")->required();
  cmd->add_option("--rank", o.rank, "Number of latent factors L")
      ->required()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--alpha", o.alpha, "Beta prior alpha")->capture_default_str();
  cmd->add_option("--beta", o.beta, "Beta prior beta")->capture_default_str();
  cmd->add_option("--eps-tol", o.eps_tol, "Outer-loop tolerance on the flip probability")
      ->capture_default_str();
  cmd->add_option("--max-outer", o.max_outer, "Maximum EM iterations")->capture_default_str();
  cmd->add_option("--max-inner", o.max_inner, "Maximum RPROP iterations per M-step")
      ->capture_default_str();
  cmd->add_option("--stable-iters", o.stable_iters,
                  "M-step stops after this many updates without a reconstruction change")
      ->capture_default_str();
  cmd->add_option("--seed", o.seed, "Initialization seed")->capture_default_str();
  cmd->add_flag("--exact-eps", o.exact_eps, "Estimate noise as mean |X - P*| instead of mismatches");
  cmd->add_option("--out", o.out, "Output prefix")->capture_default_str();
}

bmf::EmConfig to_config(const FitOptions& o) {
  bmf::EmConfig c;
  c.rank = o.rank;
  c.prior = {o.alpha, o.beta};
  c.eps_tolerance = o.eps_tol;
  c.max_outer_iters = o.max_outer;
  c.rprop.max_inner_iters = o.max_inner;
  c.rprop.stable_iters = o.stable_iters;
  c.seed = o.seed;
  c.estimator = o.exact_eps ? bmf::EpsilonEstimator::kExpected
                            : bmf::EpsilonEstimator::kReconstruction;
  return c;
}

struct Timed {
  bmf::FitResult fit;
  double wall_ms;
};

Timed timed_fit(const bmf::ObservedMatrix& x, const bmf::EmConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  bmf::FitResult fit = bmf::fit(x, config);
  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return {std::move(fit), ms};
}

void write_report(const std::string& path, const Timed& t,
                  const std::optional<double>& accuracy) {
  std::ofstream out(path);
  if (!out) throw bmf::IoError("cannot open " + path + " for writing");
  out.precision(10);
  const auto& f = t.fit;
  out << "objective\tepsilon\touter_iters\tinner_iters\tconverged\twall_ms\tcompletion_acc\n";
  out << f.objective << '\t' << f.epsilon << '\t' << f.outer_iters << '\t' << f.inner_iters
      << '\t' << (f.converged ? 1 : 0) << '\t' << t.wall_ms << '\t';
  if (accuracy) {
    out << *accuracy;
  } else {
    out << '-';
  }
  out << '\n';
  std::cout.precision(10);
  std::cout << "objective=" << f.objective << " epsilon=" << f.epsilon
            << " outer_iters=" << f.outer_iters << " inner_iters=" << f.inner_iters
            << " converged=" << (f.converged ? "yes" : "no") << " wall_ms=" << t.wall_ms;
  if (accuracy) std::cout << " completion_acc=" << *accuracy;
  std::cout << '\n';
  if (f.epsilon_clamped) std::cerr << "warning: estimated flip probability reached 1/2 and was clamped\n";
  if (f.inner_capped) std::cerr << "warning: an M-step hit --max-inner\n";
}

int run_factorize(const FitOptions& o) {
  const bmf::ObservedMatrix x = bmf::read_matrix(std::filesystem::path(o.input));
  const Timed t = timed_fit(x, to_config(o));
  bmf::write_real_matrix(std::filesystem::path(o.out + ".mu"), t.fit.mu);
  bmf::write_real_matrix(std::filesystem::path(o.out + ".zeta"), t.fit.zeta);
  bmf::write_matrix(std::filesystem::path(o.out + ".recon"), bmf::ObservedMatrix(t.fit.reconstruction));
  write_report(o.out + ".report.tsv", t, std::nullopt);
  return t.fit.converged ? kOk : kCapped;
}

int run_complete(const FitOptions& o, const std::string& heldout_out, double train_fraction,
                 std::uint64_t split_seed) {
  bmf::ObservedMatrix x = bmf::read_matrix(std::filesystem::path(o.input));
  std::optional<bmf::HoldoutSplit> split;
  if (train_fraction > 0.0) split = bmf::holdout_split(x, train_fraction, split_seed);
  const bmf::ObservedMatrix& train = split ? split->train : x;

  const Timed t = timed_fit(train, to_config(o));
  std::optional<double> accuracy;
  if (split) accuracy = bmf::completion_accuracy(t.fit.reconstruction, x, split->heldout);

  bmf::write_matrix(std::filesystem::path(o.out + ".completed"),
                    bmf::ObservedMatrix(t.fit.reconstruction));
  if (!heldout_out.empty()) {
    // Imputed values at every cell the fit did not see.
    bmf::Mask imputed = (train.mask().array() == 0).cast<std::uint8_t>();
    bmf::write_matrix(std::filesystem::path(heldout_out),
                      bmf::ObservedMatrix(t.fit.reconstruction, imputed),
                      bmf::MatrixFormat::kTriplet);
  }
  write_report(o.out + ".report.tsv", t, accuracy);
  return t.fit.converged ? kOk : kCapped;
}

int run_synth(const bmf::SynthConfig& config, const std::string& prefix) {
  const bmf::SynthInstance inst = bmf::generate(config);
  bmf::write_synth_instance(bmf::SynthFiles::for_prefix(prefix), config, inst);
  std::cout.precision(10);
  std::cout << "p=" << inst.p << " clean_density=" << bmf::density(bmf::ObservedMatrix(inst.x_clean))
            << " wrote " << prefix << ".{noisy,clean,u,z,meta.json}\n";
  return kOk;
}

int run_bench(const std::string& spec_path, const std::string& output_override) {
  bmf::SweepSpec spec = bmf::load_sweep_spec(spec_path);
  if (!output_override.empty()) spec.output = output_override;
  const auto rows = bmf::run_bench(spec);
  const auto summary = bmf::summarize(rows);
  if (spec.output.empty() || spec.output == "-") {
    bmf::write_table(std::cout, rows, summary);
  } else {
    std::ofstream out(spec.output);
    if (!out) throw bmf::IoError("cannot open " + spec.output + " for writing");
    bmf::write_table(out, rows, summary);
    std::cout << "wrote " << rows.size() << " rows and " << summary.size() << " summary rows to "
              << spec.output << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic Boolean matrix factorization (EM + RPROP).\n"
               "Set BMF_THREADS to use several worker threads."};
  app.require_subcommand(1);

  FitOptions factorize_opts;
  auto* factorize = app.add_subcommand("factorize", "Fit factors, noise and reconstruction");
  add_fit_options(factorize, factorize_opts);

  FitOptions complete_opts;
  std::string heldout_out;
  double train_fraction = 0.0;
  std::uint64_t split_seed = 0;
  auto* complete = app.add_subcommand("complete", "Impute missing cells from the fitted model");
  add_fit_options(complete, complete_opts);
  complete->add_option("--heldout-out", heldout_out,
                       "Write imputed values of unseen cells as a bmf-sparse file");
  complete->add_option("--train-fraction", train_fraction,
                       "Hide 1 - F of the observed cells and report accuracy on them")
      ->check(CLI::Range(0.0, 1.0));
  complete->add_option("--split-seed", split_seed, "Seed for --train-fraction")
      ->capture_default_str();

  bmf::SynthConfig synth_config;
  std::string synth_prefix = "synth";
  bool fixed_priors = false;
  auto* synth = app.add_subcommand("synth", "Sample a synthetic benchmark instance");
  synth->add_option("--n", synth_config.n, "Rows")->capture_default_str();
  synth->add_option("--m", synth_config.m, "Columns")->capture_default_str();
  synth->add_option("--rank", synth_config.rank, "Boolean rank")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  synth->add_option("--density", synth_config.target_density, "Target Pr(X=1)")
      ->capture_default_str();
  synth->add_option("--spread", synth_config.prior_spread, "Half-width of the per-factor priors")
      ->capture_default_str();
  synth->add_option("--noise", synth_config.noise, "Flip probability")->capture_default_str();
  synth->add_option("--observed", synth_config.observed_fraction, "Observed fraction")
      ->capture_default_str();
  synth->add_option("--seed", synth_config.seed, "Seed")->capture_default_str();
  synth->add_flag("--fixed-priors", fixed_priors, "Use the same prior p for every factor");
  synth->add_option("--out", synth_prefix, "Output prefix")->capture_default_str();

  std::string spec_path;
  std::string bench_output;
  auto* bench = app.add_subcommand("bench", "Run an experiment sweep described by a JSON spec");
  bench->add_option("--spec", spec_path, "Sweep spec (JSON)")->required();
  bench->add_option("--output", bench_output, "Results table path ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*factorize) return run_factorize(factorize_opts);
    if (*complete) return run_complete(complete_opts, heldout_out, train_fraction, split_seed);
    if (*synth) {
      synth_config.vary_priors = !fixed_priors;
      return run_synth(synth_config, synth_prefix);
    }
    if (*bench) return run_bench(spec_path, bench_output);
  } catch (const bmf::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const bmf::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kMalformed;
  } catch (const bmf::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFitError;
  }
  return kUsage;
}
