#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "infogain/matrix.hpp"
#include "infogain/rng.hpp"

namespace infogain {

enum class Task { Classification, Regression };

const char* to_string(Task task);
Task parse_task(const std::string& name);

/// Feature matrix plus either class labels or a regression TargetMatrix.
///
/// Class labels are stored as contiguous 0-based indices; label_names[k] is
/// the original CSV token of class k.
struct Dataset {
  Task task = Task::Classification;
  Matrix features;
  std::vector<std::size_t> labels;
  std::size_t n_classes = 0;
  std::vector<std::string> label_names;
  Matrix targets;
  std::vector<std::string> feature_names;
  std::vector<std::string> target_names;

  std::size_t size() const noexcept { return features.rows(); }
  bool has_targets() const noexcept {
    return task == Task::Classification ? !labels.empty() || size() == 0 : targets.rows() == size();
  }
  std::size_t n_features() const noexcept { return features.cols(); }
  std::size_t target_dim() const noexcept { return targets.cols(); }

  // Rows selected by index; class count and names are kept.
  Dataset subset(std::span<const std::size_t> rows) const;

  // Throws DataError if row counts or label ranges are inconsistent.
  void validate() const;
};

struct CsvSchema {
  std::vector<std::string> target_columns;  // header names
  Task task = Task::Classification;
  // Class tokens with preassigned indices (e.g. from a training file); new
  // tokens are appended after them.
  std::vector<std::string> known_labels;
  // Explicit feature columns; empty selects every non-target column.
  std::vector<std::string> feature_columns;
  // When false, absent target columns are allowed and yield a dataset
  // without labels or targets (for prediction).
  bool require_targets = true;
};

// Comma-separated, one header row. Non-target columns are numeric features.
Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema);
Dataset parse_csv(std::istream& in, const CsvSchema& schema);

// Concatenation of rows; both datasets must share task and layout.
Dataset concatenate(const Dataset& a, const Dataset& b);

struct BinWidths {
  std::vector<double> width;    // per dimension; 0 when all values are equal
  std::vector<bool> constant;   // flagged dimensions
};

// Smallest positive gap between sorted values, per dimension.
BinWidths bin_widths(const Matrix& targets);

bool has_duplicate_rows(const Matrix& m);

struct Dequantized {
  Matrix targets;
  bool applied = false;                     // duplicates were present
  std::vector<std::size_t> skipped_dims;    // dimensions with zero bin width
};

// Adds U(-h_j/2, h_j/2) noise per dimension when two target vectors coincide.
Dequantized dequantize(const Matrix& targets, Rng& rng);

/// Per-dimension affine map to zero mean and unit sample variance.
class Standardizer {
 public:
  static constexpr double kScaleFloor = 1e-12;

  Standardizer() = default;
  Standardizer(std::vector<double> mean, std::vector<double> scale);

  // Requires n >= 2; scales use the n - 1 denominator and are floored.
  static Standardizer fit(const Matrix& targets);

  Matrix apply(const Matrix& targets) const;
  Matrix invert(const Matrix& standardized) const;
  std::vector<double> apply(std::span<const double> y) const;
  std::vector<double> invert(std::span<const double> z) const;

  const std::vector<double>& mean() const noexcept { return mean_; }
  const std::vector<double>& scale() const noexcept { return scale_; }
  std::size_t dim() const noexcept { return mean_.size(); }
  // sum_j ln scale_j, the log-Jacobian of the inverse map.
  double log_scale_sum() const;

  friend bool operator==(const Standardizer&, const Standardizer&) = default;

 private:
  std::vector<double> mean_;
  std::vector<double> scale_;
};

struct Proportions {
  double train = 0.0;
  double val = 0.0;
  double test = 0.0;
};

struct IndexSplit {
  std::vector<std::size_t> train, val, test;
};

struct DatasetSplit {
  Dataset train, val, test;
};

// Seeded shuffle into disjoint parts. A zero proportion disables a part; a
// positive proportion that rounds to zero rows is a ConfigError.
IndexSplit split_indices(std::size_t n, const Proportions& p, Rng& rng);
DatasetSplit split_dataset(const Dataset& ds, const Proportions& p, Rng& rng);

// All of 0..n-1 when n <= m, else a uniform m-subset (sorted ascending).
std::vector<std::size_t> subsample_without_replacement(std::size_t n, std::size_t m, Rng& rng);

}  // namespace infogain
