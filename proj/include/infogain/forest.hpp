#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "infogain/data.hpp"
#include "infogain/entropy.hpp"
#include "infogain/matrix.hpp"
#include "infogain/rng.hpp"

namespace infogain {

// Single-feature threshold test: a sample goes left iff x[feature] <= threshold.
struct SplitCandidate {
  std::size_t feature = 0;
  double threshold = 0.0;

  bool goes_left(std::span<const double> x) const { return x[feature] <= threshold; }
  friend bool operator==(const SplitCandidate&, const SplitCandidate&) = default;
};

struct ScoredSplit {
  SplitCandidate split;
  double score = -std::numeric_limits<double>::infinity();
  bool degenerate = false;
};

struct Partition {
  std::vector<std::size_t> left;
  std::vector<std::size_t> right;
};

struct ClassLeaf {
  std::size_t label = 0;
  friend bool operator==(const ClassLeaf&, const ClassLeaf&) = default;
};

/// Kernel density leaf: Gaussian kernels at the stored samples with shared
/// bandwidth matrix B (Scott's rule on the regularised covariance).
struct KdeLeaf {
  TargetMatrix targets;
  std::vector<double> mean;
  Matrix bandwidth;
  double log_det_bandwidth = 0.0;
  // Set when the regularised covariance was singular and a floor was added.
  bool floored = false;
  // Derived from `bandwidth`; not serialized.
  Matrix bandwidth_inverse;

  std::size_t size() const noexcept { return targets.rows(); }
  friend bool operator==(const KdeLeaf&, const KdeLeaf&) = default;
};

struct InternalNode {
  SplitCandidate split;
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  friend bool operator==(const InternalNode&, const InternalNode&) = default;
};

using TreeNode = std::variant<InternalNode, ClassLeaf, KdeLeaf>;

// Flat binary tree; nodes[0] is the root.
struct Tree {
  std::vector<TreeNode> nodes;

  // Index of the leaf reached by x.
  std::size_t route(std::span<const double> x) const;
  std::size_t leaf_count() const;
  std::size_t depth() const;
};

// How per-tree densities are combined into the forest density.
enum class DensityAveraging { Mixture, AverageLogLikelihood };

struct TrainConfig {
  std::size_t n_trees = 8;
  std::size_t n_tests = 256;
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
  std::optional<std::size_t> max_depth;
  EstimatorKind estimator;
  double kde_lambda = 1e-2;
  std::uint64_t master_seed = 0;
  DensityAveraging averaging = DensityAveraging::Mixture;

  // Throws ConfigError on out-of-range values.
  void validate() const;
};

struct Forest {
  Task task = Task::Classification;
  std::size_t n_features = 0;
  std::size_t n_classes = 0;    // classification
  std::size_t target_dim = 0;   // regression
  std::vector<std::string> label_names;
  std::vector<std::string> feature_names;  // CSV header names, may be empty
  std::optional<Standardizer> standardizer;  // regression targets
  TrainConfig config;
  std::vector<Tree> trees;
};

// Uniform feature; threshold = that feature of a uniformly chosen node sample.
SplitCandidate propose_split(const Matrix& features, std::span<const std::size_t> node, Rng& rng);

Partition partition(const Matrix& features, std::span<const std::size_t> node, const SplitCandidate& split);

// Index of the first strict maximum; scores within a relative 1e-12 of the
// running best count as ties. Returns nullopt if every score is -inf.
std::optional<std::size_t> first_strict_max(std::span<const double> scores);

/// Scores n_tests proposals and keeps the best.
///
/// Proposals leaving a side with fewer than max(min_samples_leaf, the
/// estimator's minimum) samples score -inf. Regression datasets must already
/// be in standardized target space.
std::optional<ScoredSplit> select_best_split(const Dataset& ds, std::span<const std::size_t> node,
                                             const TrainConfig& config, Rng& rng);

Tree grow_tree(const Dataset& ds, const TrainConfig& config, std::uint64_t tree_seed);

Forest train_forest(const Dataset& ds, const TrainConfig& config);

inline constexpr double kKdeLambdaFloor = 1e-8;

// Scott's rule B = n^(-1/(d+4)) (C + lambda I)^(1/2) with C the centred
// sample covariance (zero for a single sample).
KdeLeaf fit_kde_leaf(const TargetMatrix& targets, double lambda);

double kde_log_density(const KdeLeaf& leaf, std::span<const double> y);

// Modal leaf label; ties are broken uniformly using `rng`.
std::size_t predict_class(const Forest& forest, std::span<const double> x, Rng& rng);

// De-standardized average of the reached leaf means.
std::vector<double> predict_regression(const Forest& forest, std::span<const double> x);

// ln p(y | x) in original target units.
double forest_log_density(const Forest& forest, std::span<const double> x, std::span<const double> y);

inline constexpr int kModelFormatVersion = 1;

std::string serialize(const Forest& forest);
Forest deserialize(std::string_view document);

void save_forest(const Forest& forest, const std::string& path);
Forest load_forest(const std::string& path);

}  // namespace infogain
