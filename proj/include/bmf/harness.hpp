#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bmf/em.hpp"
#include "bmf/synth.hpp"

namespace bmf {

enum class SweepMode { kNoise, kCompletion, kMovieLens, kScaling };

/// One experiment sweep.
///
/// noise-sweep:       grid = flip probabilities; instances at `observed`.
/// completion-sweep:  grid = observed fractions; instances at `noise`.
/// movielens:         grid = training fractions of the rated cells.
/// scaling:           grid = row counts N; times one optimizer iteration.
struct SweepSpec {
  SweepMode mode = SweepMode::kNoise;
  std::vector<double> grid;
  int repetitions = 10;
  Eigen::Index n = 200;
  Eigen::Index m = 200;
  int rank = 5;
  double density = 0.5;
  double prior_spread = 0.2;
  bool vary_priors = true;
  double noise = 0.2;
  double observed = 1.0;
  std::uint64_t seed = 0;
  EmConfig em;
  std::string ratings_path;
  std::string delimiter = "\t";
  bool ties_to_one = false;
  std::string output;

  void validate() const;
};

SweepSpec parse_sweep_spec(const std::string& json_text);
SweepSpec load_sweep_spec(const std::filesystem::path& path);
std::string mode_name(SweepMode mode);

/// Seed shared by every grid point for repetition `rep`, so grid points are
/// compared on matched instances.
std::uint64_t repetition_seed(std::uint64_t base, int rep);

/// One (grid point, repetition) result.
struct BenchRow {
  SweepMode mode = SweepMode::kNoise;
  double grid_value = 0.0;
  int rep = 0;
  std::uint64_t seed = 0;
  std::optional<double> reconstruction_error;
  std::optional<double> completion_accuracy;
  double estimated_epsilon = 0.0;
  std::optional<double> true_epsilon;
  double objective = 0.0;
  int outer_iters = 0;
  int inner_iters = 0;
  bool converged = false;
  double wall_ms = 0.0;
  std::string status = "ok";
};

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
  int count = 0;
};

struct SummaryRow {
  double grid_value = 0.0;
  int ok_count = 0;
  MeanSd reconstruction_error;
  MeanSd completion_accuracy;
  MeanSd estimated_epsilon;
  MeanSd objective;
  MeanSd wall_ms;
};

/// Runs a single cell from its seed. Failures are recorded in `status`.
BenchRow run_cell(const SweepSpec& spec, double grid_value, int rep, std::uint64_t seed);

/// Runs every grid point x repetition.
std::vector<BenchRow> run_bench(const SweepSpec& spec);

/// Mean and sample standard deviation per grid point, over rows with status "ok".
std::vector<SummaryRow> summarize(const std::vector<BenchRow>& rows);

/// Tab-separated table: header, one line per row, then one summary line per
/// grid point. Column order is fixed; see `table_columns`.
void write_table(std::ostream& out, const std::vector<BenchRow>& rows,
                 const std::vector<SummaryRow>& summary);
const std::vector<std::string>& table_columns();

/// Wall time of one optimizer iteration (gradient, update, reconstruction) on
/// an N x M instance, in ms. Each trial runs one untimed warm-up iteration;
/// the fastest trial is reported.
double time_per_iteration(Eigen::Index n, Eigen::Index m, int rank, int iterations, int trials,
                          std::uint64_t seed);

/// Synthetic instance on disk: PREFIX.noisy, PREFIX.clean, PREFIX.u, PREFIX.z
/// (bmf-dense) and PREFIX.meta.json.
struct SynthFiles {
  std::filesystem::path noisy, clean, u, z, meta;
  static SynthFiles for_prefix(const std::string& prefix);
};

void write_synth_instance(const SynthFiles& files, const SynthConfig& config,
                          const SynthInstance& instance);

struct SynthMetadata {
  SynthConfig config;
  double p = 0.0;
  double realized_flip_fraction = 0.0;
};

SynthMetadata read_synth_metadata(const std::filesystem::path& path);

}  // namespace bmf
