#include "bmf/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

namespace bmf {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

template <typename T>
bool parse_number(const std::string& tok, T& value) {
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, value);
  return ec == std::errc() && ptr == end;
}

Eigen::Index parse_dim(const std::string& tok, long line) {
  long long v = 0;
  if (!parse_number(tok, v) || v < 1) throw ParseError("invalid dimension '" + tok + "'", line);
  return static_cast<Eigen::Index>(v);
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

ObservedMatrix read_dense(std::istream& in, Eigen::Index rows, Eigen::Index cols) {
  BinaryMatrix values = BinaryMatrix::Zero(rows, cols);
  Mask mask = Mask::Zero(rows, cols);
  std::string line;
  long lineno = 1;
  Eigen::Index r = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    if (r == rows) throw ParseError("more than " + std::to_string(rows) + " rows", lineno);
    const auto toks = split_ws(line);
    if (static_cast<Eigen::Index>(toks.size()) != cols) {
      throw ParseError("expected " + std::to_string(cols) + " symbols, found " +
                           std::to_string(toks.size()),
                       lineno);
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const std::string& t = toks[static_cast<std::size_t>(c)];
      if (t == "?") continue;
      if (t != "0" && t != "1") throw ParseError("non-binary value '" + t + "'", lineno);
      values(r, c) = t == "1";
      mask(r, c) = 1;
    }
    ++r;
  }
  if (r != rows) {
    throw ParseError("expected " + std::to_string(rows) + " rows, found " + std::to_string(r),
                     lineno);
  }
  return ObservedMatrix(std::move(values), std::move(mask));
}

ObservedMatrix read_triplets(std::istream& in, Eigen::Index rows, Eigen::Index cols) {
  BinaryMatrix values = BinaryMatrix::Zero(rows, cols);
  Mask mask = Mask::Zero(rows, cols);
  std::string line;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    const auto toks = split_ws(line);
    if (toks.size() != 3) throw ParseError("expected '<row> <col> <value>'", lineno);
    long long r = 0;
    long long c = 0;
    if (!parse_number(toks[0], r) || !parse_number(toks[1], c)) {
      throw ParseError("invalid index", lineno);
    }
    if (r < 0 || r >= rows || c < 0 || c >= cols) {
      throw ParseError("index (" + toks[0] + ", " + toks[1] + ") out of range", lineno);
    }
    if (toks[2] != "0" && toks[2] != "1") {
      throw ParseError("non-binary value '" + toks[2] + "'", lineno);
    }
    if (mask(r, c)) {
      throw ParseError("duplicate cell (" + toks[0] + ", " + toks[1] + ")", lineno);
    }
    mask(r, c) = 1;
    values(r, c) = toks[2] == "1";
  }
  return ObservedMatrix(std::move(values), std::move(mask));
}

}  // namespace

ObservedMatrix read_matrix(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw ParseError("missing header", 1);
  const auto toks = split_ws(header);
  if (toks.size() != 4 || toks[1] != "v1") throw ParseError("malformed header", 1);
  const Eigen::Index rows = parse_dim(toks[2], 1);
  const Eigen::Index cols = parse_dim(toks[3], 1);
  if (toks[0] == "bmf-dense") return read_dense(in, rows, cols);
  if (toks[0] == "bmf-sparse") return read_triplets(in, rows, cols);
  throw ParseError("unknown format '" + toks[0] + "'", 1);
}

ObservedMatrix read_matrix(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_matrix(in);
}

void write_matrix(std::ostream& out, const ObservedMatrix& x, MatrixFormat format) {
  if (format == MatrixFormat::kDense) {
    out << "bmf-dense v1 " << x.rows() << ' ' << x.cols() << '\n';
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      for (Eigen::Index c = 0; c < x.cols(); ++c) {
        if (c) out << ' ';
        out << (x.observed(r, c) ? (x(r, c) ? '1' : '0') : '?');
      }
      out << '\n';
    }
  } else {
    out << "bmf-sparse v1 " << x.rows() << ' ' << x.cols() << '\n';
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      for (Eigen::Index c = 0; c < x.cols(); ++c) {
        if (x.observed(r, c)) out << r << ' ' << c << ' ' << int(x(r, c)) << '\n';
      }
    }
  }
}

void write_matrix(const std::filesystem::path& path, const ObservedMatrix& x,
                  MatrixFormat format) {
  auto out = open_out(path);
  write_matrix(out, x, format);
  if (!out) throw IoError("failed writing " + path.string());
}

void write_real_matrix(std::ostream& out, const RealMatrix& values) {
  out << "bmf-real v1 " << values.rows() << ' ' << values.cols() << '\n';
  out << std::setprecision(17);
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      if (c) out << ' ';
      out << values(r, c);
    }
    out << '\n';
  }
}

void write_real_matrix(const std::filesystem::path& path, const RealMatrix& values) {
  auto out = open_out(path);
  write_real_matrix(out, values);
  if (!out) throw IoError("failed writing " + path.string());
}

RealMatrix read_real_matrix(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  const auto head = split_ws(line);
  if (head.size() != 4 || head[0] != "bmf-real" || head[1] != "v1") {
    throw ParseError("malformed header", 1);
  }
  const Eigen::Index rows = parse_dim(head[2], 1);
  const Eigen::Index cols = parse_dim(head[3], 1);
  RealMatrix values(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (!std::getline(in, line)) throw ParseError("missing row", r + 2);
    const auto toks = split_ws(line);
    if (static_cast<Eigen::Index>(toks.size()) != cols) throw ParseError("wrong row length", r + 2);
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!parse_number(toks[static_cast<std::size_t>(c)], values(r, c))) {
        throw ParseError("invalid number", r + 2);
      }
    }
  }
  return values;
}

RealMatrix read_real_matrix(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_real_matrix(in);
}

std::vector<RatingsRecord> read_ratings(std::istream& in, const std::string& delimiter) {
  if (delimiter.empty()) throw InvalidArgument("empty ratings delimiter");
  std::vector<RatingsRecord> records;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (blank(line)) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t pos; (pos = line.find(delimiter, start)) != std::string::npos;) {
      fields.push_back(line.substr(start, pos - start));
      start = pos + delimiter.size();
    }
    fields.push_back(line.substr(start));
    if (fields.size() < 3) throw ParseError("expected 'user item rating [timestamp]'", lineno);
    RatingsRecord rec;
    if (!parse_number(fields[0], rec.user) || !parse_number(fields[1], rec.item) ||
        !parse_number(fields[2], rec.rating) || !std::isfinite(rec.rating)) {
      throw ParseError("invalid ratings record", lineno);
    }
    if (fields.size() > 3 && !parse_number(fields[3], rec.timestamp)) {
      throw ParseError("invalid timestamp", lineno);
    }
    records.push_back(rec);
  }
  return records;
}

std::vector<RatingsRecord> read_ratings(const std::filesystem::path& path,
                                        const std::string& delimiter) {
  auto in = open_in(path);
  return read_ratings(in, delimiter);
}

BinarizedRatings binarize_ratings(const std::vector<RatingsRecord>& records, bool ties_to_one) {
  if (records.empty()) throw InvalidArgument("binarize_ratings: no records");
  BinarizedRatings out;
  std::unordered_map<std::int64_t, Eigen::Index> user_row;
  std::unordered_map<std::int64_t, Eigen::Index> item_col;
  double total = 0.0;
  for (const auto& rec : records) {
    if (user_row.emplace(rec.user, static_cast<Eigen::Index>(out.user_ids.size())).second) {
      out.user_ids.push_back(rec.user);
    }
    if (item_col.emplace(rec.item, static_cast<Eigen::Index>(out.item_ids.size())).second) {
      out.item_ids.push_back(rec.item);
    }
    total += rec.rating;
  }
  out.global_mean = total / static_cast<double>(records.size());

  const auto rows = static_cast<Eigen::Index>(out.user_ids.size());
  const auto cols = static_cast<Eigen::Index>(out.item_ids.size());
  BinaryMatrix values = BinaryMatrix::Zero(rows, cols);
  Mask mask = Mask::Zero(rows, cols);
  for (const auto& rec : records) {
    const Eigen::Index r = user_row[rec.user];
    const Eigen::Index c = item_col[rec.item];
    // A repeated (user, item) pair keeps its last rating.
    mask(r, c) = 1;
    const bool above = ties_to_one ? rec.rating >= out.global_mean : rec.rating > out.global_mean;
    values(r, c) = above ? 1 : 0;
  }
  out.matrix = ObservedMatrix(std::move(values), std::move(mask));
  return out;
}

HoldoutSplit holdout_split(const ObservedMatrix& x, double observed_fraction,
                           std::uint64_t seed) {
  if (!(observed_fraction > 0.0 && observed_fraction < 1.0)) {
    throw InvalidArgument("observed fraction must lie in (0, 1)");
  }
  std::vector<Eigen::Index> cells;
  cells.reserve(static_cast<std::size_t>(x.observed_count()));
  for (Eigen::Index i = 0; i < x.mask().size(); ++i) {
    if (x.mask().data()[i]) cells.push_back(i);
  }
  const auto train_count =
      static_cast<std::size_t>(std::floor(static_cast<double>(cells.size()) * observed_fraction));
  if (train_count == 0) throw InvalidArgument("holdout_split: no training cells");
  if (train_count == cells.size()) throw InvalidArgument("holdout_split: no held-out cells");

  std::mt19937_64 rng(seed);
  std::shuffle(cells.begin(), cells.end(), rng);
  Mask train_mask = Mask::Zero(x.rows(), x.cols());
  Mask heldout = Mask::Zero(x.rows(), x.cols());
  for (std::size_t k = 0; k < cells.size(); ++k) {
    (k < train_count ? train_mask : heldout).data()[cells[k]] = 1;
  }
  return {ObservedMatrix(x.values(), std::move(train_mask)), std::move(heldout)};
}

}  // namespace bmf
