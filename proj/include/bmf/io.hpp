#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "bmf/matrix.hpp"

namespace bmf {

// Matrix text formats. Indices are 0-based.
//
//   bmf-dense v1 <n> <m>        n rows of m symbols from {0, 1, ?}; ? = missing
//   bmf-sparse v1 <n> <m>       lines "<row> <col> <value>"; absent cells are missing
//   bmf-real v1 <n> <m>         n rows of m real numbers

enum class MatrixFormat { kDense, kTriplet };

ObservedMatrix read_matrix(std::istream& in);
ObservedMatrix read_matrix(const std::filesystem::path& path);

void write_matrix(std::ostream& out, const ObservedMatrix& x, MatrixFormat format);
void write_matrix(const std::filesystem::path& path, const ObservedMatrix& x,
                  MatrixFormat format = MatrixFormat::kDense);

void write_real_matrix(std::ostream& out, const RealMatrix& values);
void write_real_matrix(const std::filesystem::path& path, const RealMatrix& values);
RealMatrix read_real_matrix(std::istream& in);
RealMatrix read_real_matrix(const std::filesystem::path& path);

struct RatingsRecord {
  std::int64_t user = 0;
  std::int64_t item = 0;
  double rating = 0.0;
  std::int64_t timestamp = 0;
};

/// "user item rating timestamp" lines split on `delimiter` (u.data uses a tab).
std::vector<RatingsRecord> read_ratings(std::istream& in, const std::string& delimiter = "\t");
std::vector<RatingsRecord> read_ratings(const std::filesystem::path& path,
                                        const std::string& delimiter = "\t");

struct BinarizedRatings {
  ObservedMatrix matrix;
  std::vector<std::int64_t> user_ids;  // row -> user id
  std::vector<std::int64_t> item_ids;  // column -> item id
  double global_mean = 0.0;
};

/// Users become rows and items columns, in first-appearance order. A cell is 1
/// iff its rating exceeds the global mean (or equals it when `ties_to_one`).
/// Unrated pairs are missing.
BinarizedRatings binarize_ratings(const std::vector<RatingsRecord>& records,
                                  bool ties_to_one = false);

struct HoldoutSplit {
  ObservedMatrix train;
  Mask heldout;
};

/// Keeps floor(observed * fraction) uniformly chosen observed cells for
/// training; the rest are held out.
HoldoutSplit holdout_split(const ObservedMatrix& x, double observed_fraction, std::uint64_t seed);

}  // namespace bmf
