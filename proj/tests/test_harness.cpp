#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "bmf/harness.hpp"
#include "bmf/io.hpp"

using bmf::SweepMode;
using bmf::SweepSpec;

namespace {

SweepSpec tiny_noise_sweep() {
  return bmf::parse_sweep_spec(R"({
    "mode": "noise-sweep", "grid": [0.0, 0.1, 0.2], "repetitions": 10,
    "n": 20, "m": 20, "rank": 2, "seed": 5,
    "em": {"max_outer": 5, "max_inner": 200}
  })");
}

std::vector<std::vector<std::string>> parse_tsv(const std::string& text) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string f;
    while (std::getline(ls, f, '\t')) fields.push_back(f);
    out.push_back(fields);
  }
  return out;
}

}  // namespace

TEST_CASE("spec parsing reads fields and defaults") {
  const SweepSpec spec = tiny_noise_sweep();
  CHECK(spec.mode == SweepMode::kNoise);
  CHECK(spec.grid == std::vector<double>{0.0, 0.1, 0.2});
  CHECK(spec.n == 20);
  CHECK(spec.rank == 2);
  CHECK(spec.em.max_outer_iters == 5);
  CHECK(spec.em.rprop.max_inner_iters == 200);
  CHECK(spec.density == 0.5);
  CHECK(spec.em.prior.alpha == 0.95);
}

TEST_CASE("invalid specs are rejected") {
  CHECK_THROWS_AS(bmf::parse_sweep_spec(R"({"mode": "bogus", "grid": [0.1]})"), bmf::InvalidArgument);
  CHECK_THROWS_AS(bmf::parse_sweep_spec(R"({"mode": "noise-sweep", "grid": []})"), bmf::InvalidArgument);
  CHECK_THROWS_AS(bmf::parse_sweep_spec(R"({"mode": "movielens", "grid": [0.9]})"),
                  bmf::InvalidArgument);
  CHECK_THROWS(bmf::parse_sweep_spec("{not json"));
}

TEST_CASE("repetition seeds are shared across grid points and distinct across reps") {
  CHECK(bmf::repetition_seed(5, 3) == bmf::repetition_seed(5, 3));
  CHECK(bmf::repetition_seed(5, 3) != bmf::repetition_seed(5, 4));
  CHECK(bmf::repetition_seed(5, 3) != bmf::repetition_seed(6, 3));
}

TEST_CASE("a 3-point x 10-rep sweep yields 30 rows and 3 consistent summaries") {
  const SweepSpec spec = tiny_noise_sweep();
  const auto rows = bmf::run_bench(spec);
  REQUIRE(rows.size() == 30);
  const auto summary = bmf::summarize(rows);
  REQUIRE(summary.size() == 3);

  for (std::size_t g = 0; g < 3; ++g) {
    double sum = 0.0, sq = 0.0;
    int count = 0;
    for (const auto& r : rows) {
      if (r.grid_value != spec.grid[g]) continue;
      CHECK(r.status == "ok");
      sum += *r.reconstruction_error;
      ++count;
    }
    const double mean = sum / count;
    for (const auto& r : rows) {
      if (r.grid_value == spec.grid[g]) sq += std::pow(*r.reconstruction_error - mean, 2);
    }
    CHECK(summary[g].grid_value == spec.grid[g]);
    CHECK(summary[g].ok_count == 10);
    CHECK(summary[g].reconstruction_error.mean == doctest::Approx(mean).epsilon(1e-12));
    CHECK(summary[g].reconstruction_error.sd == doctest::Approx(std::sqrt(sq / (count - 1))).epsilon(1e-9));
  }

  std::ostringstream out;
  bmf::write_table(out, rows, summary);
  const auto table = parse_tsv(out.str());
  REQUIRE(table.size() == 1 + 30 + 3);
  CHECK(table[0] == bmf::table_columns());
  for (std::size_t i = 1; i < table.size(); ++i) {
    CHECK(table[i].size() == bmf::table_columns().size());
    CHECK(table[i][0] == (i <= 30 ? "row" : "summary"));
  }
}

TEST_CASE("failed cells are recorded and excluded from summaries") {
  std::vector<bmf::BenchRow> rows(3);
  for (int i = 0; i < 3; ++i) {
    rows[i].grid_value = 0.1;
    rows[i].reconstruction_error = 0.1 * (i + 1);
  }
  rows[2].status = "error: boom";
  const auto summary = bmf::summarize(rows);
  REQUIRE(summary.size() == 1);
  CHECK(summary[0].ok_count == 2);
  CHECK(summary[0].reconstruction_error.mean == doctest::Approx(0.15));
}

TEST_CASE("any cell reruns bitwise from its recorded seed") {
  SweepSpec spec = tiny_noise_sweep();
  spec.grid = {0.1};
  spec.repetitions = 3;
  const auto rows = bmf::run_bench(spec);
  for (const auto& r : rows) {
    const auto again = bmf::run_cell(spec, r.grid_value, r.rep, r.seed);
    CHECK(again.reconstruction_error == r.reconstruction_error);
    CHECK(again.estimated_epsilon == r.estimated_epsilon);
    CHECK(again.objective == r.objective);
    CHECK(again.inner_iters == r.inner_iters);
  }
}

TEST_CASE("completion sweep reports held-out accuracy") {
  SweepSpec spec = bmf::parse_sweep_spec(R"({
    "mode": "completion-sweep", "grid": [0.5], "repetitions": 2, "n": 20, "m": 20, "rank": 2,
    "noise": 0.1, "em": {"max_outer": 5, "max_inner": 200}
  })");
  for (const auto& r : bmf::run_bench(spec)) {
    REQUIRE(r.completion_accuracy.has_value());
    CHECK(*r.completion_accuracy >= 0.0);
    CHECK(*r.completion_accuracy <= 1.0);
    CHECK(*r.true_epsilon == 0.1);
  }
}

TEST_CASE("scaling cells report a positive per-iteration time") {
  CHECK(bmf::time_per_iteration(40, 30, 3, 2, 1, 0) > 0.0);
  CHECK_THROWS_AS(bmf::time_per_iteration(40, 30, 3, 0, 1, 0), bmf::InvalidArgument);
}

TEST_CASE("synthetic instances are written with readable metadata") {
  const auto dir = std::filesystem::temp_directory_path() / "bmf_harness_test";
  std::filesystem::create_directories(dir);
  bmf::SynthConfig config;
  config.n = 12;
  config.m = 9;
  config.noise = 0.2;
  config.observed_fraction = 0.5;
  config.seed = 4;
  const auto inst = bmf::generate(config);
  const auto files = bmf::SynthFiles::for_prefix((dir / "inst").string());
  bmf::write_synth_instance(files, config, inst);

  const auto meta = bmf::read_synth_metadata(files.meta);
  CHECK(meta.config.noise == 0.2);
  CHECK(meta.config.n == 12);
  CHECK(meta.config.seed == 4);
  CHECK(meta.p == doctest::Approx(0.35979).epsilon(1e-5));
  CHECK(meta.realized_flip_fraction == doctest::Approx(inst.flips.cast<double>().mean()));

  const auto noisy = bmf::read_matrix(files.noisy);
  CHECK(noisy.values() == inst.x_noisy.values());
  CHECK(noisy.mask() == inst.x_noisy.mask());
  CHECK(bmf::read_matrix(files.clean).values() == inst.x_clean);
  std::filesystem::remove_all(dir);
}
