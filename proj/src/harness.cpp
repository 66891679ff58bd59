#include "bmf/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "bmf/io.hpp"
#include "bmf/metrics.hpp"

namespace bmf {

using json = nlohmann::json;

namespace {

SweepMode parse_mode(const std::string& name) {
  if (name == "noise-sweep") return SweepMode::kNoise;
  if (name == "completion-sweep") return SweepMode::kCompletion;
  if (name == "movielens") return SweepMode::kMovieLens;
  if (name == "scaling") return SweepMode::kScaling;
  throw InvalidArgument("unknown sweep mode '" + name + "'");
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

void record_fit(BenchRow& row, const FitResult& fit) {
  row.estimated_epsilon = fit.epsilon;
  row.objective = fit.objective;
  row.outer_iters = fit.outer_iters;
  row.inner_iters = fit.inner_iters;
  row.converged = fit.converged;
}

BenchRow make_row(const SweepSpec& spec, double grid_value, int rep, std::uint64_t seed) {
  BenchRow row;
  row.mode = spec.mode;
  row.grid_value = grid_value;
  row.rep = rep;
  row.seed = seed;
  return row;
}

Mask unobserved(const ObservedMatrix& x) {
  return (x.mask().array() == 0).cast<std::uint8_t>();
}

BenchRow run_synthetic_cell(const SweepSpec& spec, double grid_value, int rep,
                            std::uint64_t seed) {
  BenchRow row = make_row(spec, grid_value, rep, seed);
  SynthConfig sc;
  sc.n = spec.n;
  sc.m = spec.m;
  sc.rank = spec.rank;
  sc.target_density = spec.density;
  sc.prior_spread = spec.prior_spread;
  sc.vary_priors = spec.vary_priors;
  sc.seed = seed;
  sc.noise = spec.mode == SweepMode::kNoise ? grid_value : spec.noise;
  sc.observed_fraction = spec.mode == SweepMode::kCompletion ? grid_value : spec.observed;
  const SynthInstance inst = generate(sc);

  EmConfig em = spec.em;
  em.seed = seed;
  const auto start = std::chrono::steady_clock::now();
  const FitResult fit = bmf::fit(inst.x_noisy, em);
  row.wall_ms = elapsed_ms(start);
  record_fit(row, fit);
  row.true_epsilon = sc.noise;
  row.reconstruction_error = reconstruction_error(fit.reconstruction, inst.x_clean);
  if (inst.x_noisy.observed_count() < inst.x_noisy.rows() * inst.x_noisy.cols()) {
    row.completion_accuracy =
        completion_accuracy(fit.reconstruction, inst.x_clean, unobserved(inst.x_noisy));
  }
  return row;
}

BenchRow run_movielens_cell(const SweepSpec& spec, const BinarizedRatings& data,
                            double grid_value, int rep, std::uint64_t seed) {
  BenchRow row = make_row(spec, grid_value, rep, seed);
  const HoldoutSplit split = holdout_split(data.matrix, grid_value, seed);
  EmConfig em = spec.em;
  em.seed = seed;
  const auto start = std::chrono::steady_clock::now();
  const FitResult fit = bmf::fit(split.train, em);
  row.wall_ms = elapsed_ms(start);
  record_fit(row, fit);
  row.completion_accuracy = completion_accuracy(fit.reconstruction, data.matrix, split.heldout);
  return row;
}

BenchRow run_scaling_cell(const SweepSpec& spec, double grid_value, int rep, std::uint64_t seed) {
  BenchRow row = make_row(spec, grid_value, rep, seed);
  const auto n = static_cast<Eigen::Index>(std::llround(grid_value));
  row.wall_ms = time_per_iteration(n, spec.m, spec.rank, 10, 3, seed);
  return row;
}

BenchRow guarded(const SweepSpec& spec, double grid_value, int rep, std::uint64_t seed,
                 const std::function<BenchRow()>& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    BenchRow row = make_row(spec, grid_value, rep, seed);
    row.status = std::string("error: ") + e.what();
    return row;
  }
}

BinarizedRatings load_ratings(const SweepSpec& spec) {
  return binarize_ratings(read_ratings(std::filesystem::path(spec.ratings_path), spec.delimiter),
                          spec.ties_to_one);
}

MeanSd mean_sd(const std::vector<double>& values) {
  MeanSd out;
  out.count = static_cast<int>(values.size());
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / values.size();
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.sd = std::sqrt(ss / (values.size() - 1));
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(10);
  ss << v;
  return ss.str();
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "-"; }

std::string fmt(const MeanSd& v) { return v.count ? fmt(v.mean) : "-"; }

std::string fmt_sd(const MeanSd& v) { return v.count ? fmt(v.sd) : "-"; }

}  // namespace

void SweepSpec::validate() const {
  if (grid.empty()) throw InvalidArgument("sweep grid is empty");
  if (repetitions < 1) throw InvalidArgument("repetitions must be at least 1");
  if (mode == SweepMode::kMovieLens && ratings_path.empty()) {
    throw InvalidArgument("movielens sweep needs a ratings path");
  }
  em.validate();
}

std::string mode_name(SweepMode mode) {
  switch (mode) {
    case SweepMode::kNoise: return "noise-sweep";
    case SweepMode::kCompletion: return "completion-sweep";
    case SweepMode::kMovieLens: return "movielens";
    case SweepMode::kScaling: return "scaling";
  }
  return "unknown";
}

SweepSpec parse_sweep_spec(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("sweep spec is not valid JSON: ") + e.what());
  }
  SweepSpec spec;
  try {
    spec.mode = parse_mode(j.at("mode").get<std::string>());
    spec.grid = j.at("grid").get<std::vector<double>>();
    spec.repetitions = j.value("repetitions", spec.repetitions);
    spec.n = j.value("n", spec.n);
    spec.m = j.value("m", spec.m);
    spec.rank = j.value("rank", spec.rank);
    spec.density = j.value("density", spec.density);
    spec.prior_spread = j.value("prior_spread", spec.prior_spread);
    spec.vary_priors = j.value("vary_priors", spec.vary_priors);
    spec.noise = j.value("noise", spec.noise);
    spec.observed = j.value("observed", spec.observed);
    spec.seed = j.value("seed", spec.seed);
    spec.ratings_path = j.value("ratings", spec.ratings_path);
    spec.delimiter = j.value("delimiter", spec.delimiter);
    spec.ties_to_one = j.value("ties_to_one", spec.ties_to_one);
    spec.output = j.value("output", spec.output);

    spec.em.rank = spec.rank;
    if (j.contains("em")) {
      const json& e = j.at("em");
      spec.em.prior.alpha = e.value("alpha", spec.em.prior.alpha);
      spec.em.prior.beta = e.value("beta", spec.em.prior.beta);
      spec.em.eps_tolerance = e.value("eps_tol", spec.em.eps_tolerance);
      spec.em.max_outer_iters = e.value("max_outer", spec.em.max_outer_iters);
      spec.em.rprop.max_inner_iters = e.value("max_inner", spec.em.rprop.max_inner_iters);
      spec.em.rprop.stable_iters = e.value("stable_iters", spec.em.rprop.stable_iters);
      if (e.value("exact_eps", false)) spec.em.estimator = EpsilonEstimator::kExpected;
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("invalid sweep spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

SweepSpec load_sweep_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_sweep_spec(buf.str());
}

std::uint64_t repetition_seed(std::uint64_t base, int rep) {
  // splitmix64 finalizer
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(rep + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

BenchRow run_cell(const SweepSpec& spec, double grid_value, int rep, std::uint64_t seed) {
  return guarded(spec, grid_value, rep, seed, [&] {
    switch (spec.mode) {
      case SweepMode::kMovieLens:
        return run_movielens_cell(spec, load_ratings(spec), grid_value, rep, seed);
      case SweepMode::kScaling:
        return run_scaling_cell(spec, grid_value, rep, seed);
      default:
        return run_synthetic_cell(spec, grid_value, rep, seed);
    }
  });
}

std::vector<BenchRow> run_bench(const SweepSpec& spec) {
  spec.validate();
  std::unique_ptr<BinarizedRatings> ratings;
  if (spec.mode == SweepMode::kMovieLens) {
    ratings = std::make_unique<BinarizedRatings>(load_ratings(spec));
  }
  std::vector<BenchRow> rows;
  for (double g : spec.grid) {
    for (int rep = 0; rep < spec.repetitions; ++rep) {
      const std::uint64_t seed = repetition_seed(spec.seed, rep);
      if (ratings) {
        rows.push_back(guarded(spec, g, rep, seed, [&] {
          return run_movielens_cell(spec, *ratings, g, rep, seed);
        }));
      } else {
        rows.push_back(run_cell(spec, g, rep, seed));
      }
    }
  }
  return rows;
}

std::vector<SummaryRow> summarize(const std::vector<BenchRow>& rows) {
  std::vector<double> order;
  std::map<double, std::vector<const BenchRow*>> groups;
  for (const auto& r : rows) {
    if (!groups.count(r.grid_value)) order.push_back(r.grid_value);
    groups[r.grid_value].push_back(&r);
  }
  std::vector<SummaryRow> out;
  for (double g : order) {
    std::vector<double> err, acc, eps, obj, ms;
    for (const BenchRow* r : groups[g]) {
      if (r->status != "ok") continue;
      if (r->reconstruction_error) err.push_back(*r->reconstruction_error);
      if (r->completion_accuracy) acc.push_back(*r->completion_accuracy);
      eps.push_back(r->estimated_epsilon);
      obj.push_back(r->objective);
      ms.push_back(r->wall_ms);
    }
    SummaryRow s;
    s.grid_value = g;
    s.ok_count = static_cast<int>(ms.size());
    s.reconstruction_error = mean_sd(err);
    s.completion_accuracy = mean_sd(acc);
    s.estimated_epsilon = mean_sd(eps);
    s.objective = mean_sd(obj);
    s.wall_ms = mean_sd(ms);
    out.push_back(s);
  }
  return out;
}

const std::vector<std::string>& table_columns() {
  static const std::vector<std::string> cols{
      "kind",          "mode",       "grid",        "rep",         "seed",
      "recon_error",   "recon_error_sd", "completion_acc", "completion_acc_sd",
      "est_eps",       "est_eps_sd", "true_eps",    "objective",   "objective_sd",
      "outer_iters",   "inner_iters", "converged",  "wall_ms",     "wall_ms_sd",
      "status"};
  return cols;
}

void write_table(std::ostream& out, const std::vector<BenchRow>& rows,
                 const std::vector<SummaryRow>& summary) {
  const auto& cols = table_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "\t" : "") << cols[i];
  out << '\n';
  for (const auto& r : rows) {
    out << "row\t" << mode_name(r.mode) << '\t' << fmt(r.grid_value) << '\t' << r.rep << '\t'
        << r.seed << '\t' << fmt(r.reconstruction_error) << "\t-\t" << fmt(r.completion_accuracy)
        << "\t-\t" << fmt(r.estimated_epsilon) << "\t-\t" << fmt(r.true_epsilon) << '\t'
        << fmt(r.objective) << "\t-\t" << r.outer_iters << '\t' << r.inner_iters << '\t'
        << (r.converged ? 1 : 0) << '\t' << fmt(r.wall_ms) << "\t-\t" << r.status << '\n';
  }
  const std::string mode = rows.empty() ? "-" : mode_name(rows.front().mode);
  for (const auto& s : summary) {
    out << "summary\t" << mode << '\t' << fmt(s.grid_value) << '\t' << s.ok_count << "\t-\t"
        << fmt(s.reconstruction_error) << '\t' << fmt_sd(s.reconstruction_error) << '\t'
        << fmt(s.completion_accuracy) << '\t' << fmt_sd(s.completion_accuracy) << '\t'
        << fmt(s.estimated_epsilon) << '\t' << fmt_sd(s.estimated_epsilon) << "\t-\t"
        << fmt(s.objective) << '\t' << fmt_sd(s.objective) << "\t-\t-\t-\t" << fmt(s.wall_ms)
        << '\t' << fmt_sd(s.wall_ms) << "\tok\n";
  }
}

double time_per_iteration(Eigen::Index n, Eigen::Index m, int rank, int iterations, int trials,
                          std::uint64_t seed) {
  if (iterations < 1 || trials < 1) throw InvalidArgument("iterations and trials must be positive");
  SynthConfig sc;
  sc.n = n;
  sc.m = m;
  sc.rank = rank;
  sc.seed = seed;
  const SynthInstance inst = generate(sc);
  const NoiseModel noise{0.1};
  const BetaPrior prior{0.95, 0.95};
  const RpropConfig config;

  std::vector<double> samples;
  for (int t = 0; t < trials; ++t) {
    Factors params = initial_factors(n, m, rank, 0.01, seed + t);
    RpropState state = RpropState::initial(params, config);
    auto step = [&] {
      const Evaluation<double> eval = evaluate(inst.x_noisy, params, noise, prior);
      rprop_step(params, eval.grad_a, eval.grad_b, state, config);
      const BinaryMatrix recon = reconstruct(params, noise);
      if (recon.size() == 0) throw Error("empty reconstruction");
    };
    step();  // warm-up, untimed
    const auto start = std::chrono::steady_clock::now();
    for (int it = 0; it < iterations; ++it) step();
    samples.push_back(elapsed_ms(start) / iterations);
  }
  return *std::min_element(samples.begin(), samples.end());
}

SynthFiles SynthFiles::for_prefix(const std::string& prefix) {
  return {prefix + ".noisy", prefix + ".clean", prefix + ".u", prefix + ".z",
          prefix + ".meta.json"};
}

void write_synth_instance(const SynthFiles& files, const SynthConfig& config,
                          const SynthInstance& instance) {
  write_matrix(files.noisy, instance.x_noisy, MatrixFormat::kDense);
  write_matrix(files.clean, ObservedMatrix(instance.x_clean), MatrixFormat::kDense);
  write_matrix(files.u, ObservedMatrix(instance.u), MatrixFormat::kDense);
  write_matrix(files.z, ObservedMatrix(instance.z), MatrixFormat::kDense);

  const double flips = static_cast<double>((instance.flips.array() != 0).count()) /
                       static_cast<double>(instance.flips.size());
  json meta{{"n", config.n},
            {"m", config.m},
            {"rank", config.rank},
            {"density", config.target_density},
            {"p", instance.p},
            {"prior_spread", config.prior_spread},
            {"vary_priors", config.vary_priors},
            {"noise", config.noise},
            {"observed", config.observed_fraction},
            {"seed", config.seed},
            {"realized_flip_fraction", flips}};
  std::ofstream out(files.meta);
  if (!out) throw IoError("cannot open " + files.meta.string() + " for writing");
  out << meta.dump(2) << '\n';
}

SynthMetadata read_synth_metadata(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    const json j = json::parse(in);
    SynthMetadata meta;
    meta.config.n = j.at("n").get<Eigen::Index>();
    meta.config.m = j.at("m").get<Eigen::Index>();
    meta.config.rank = j.at("rank").get<int>();
    meta.config.target_density = j.at("density").get<double>();
    meta.config.prior_spread = j.at("prior_spread").get<double>();
    meta.config.vary_priors = j.at("vary_priors").get<bool>();
    meta.config.noise = j.at("noise").get<double>();
    meta.config.observed_fraction = j.at("observed").get<double>();
    meta.config.seed = j.at("seed").get<std::uint64_t>();
    meta.p = j.at("p").get<double>();
    meta.realized_flip_fraction = j.at("realized_flip_fraction").get<double>();
    return meta;
  } catch (const json::exception& e) {
    throw InvalidArgument(path.string() + ": invalid metadata: " + e.what());
  }
}

}  // namespace bmf
