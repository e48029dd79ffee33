#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "infogain/data.hpp"
#include "infogain/entropy.hpp"
#include "infogain/forest.hpp"

namespace infogain {

// Seed of the class table drawn by BiasSimConfig::make_default.
inline constexpr std::uint64_t kDefaultBiasTableSeed = 40;

/// Finite-sample information gain simulation.
///
/// Samples of size n are drawn from p(y, b) = pi_k * (q_k, 1 - q_k); each
/// replicate forms the parent and child histograms and evaluates the full
/// estimated gain H(Y) - sum_b (n_b/n) H(Y_b) under every estimator.
struct BiasSimConfig {
  std::vector<double> class_marginal;  // pi
  std::vector<double> left_prob;       // q_k = p(b = L | y = k)
  std::vector<std::size_t> sample_sizes{50, 100, 200, 400, 800, 1600, 3200};
  std::size_t replicates = 500;
  std::vector<EstimatorKind> estimators{EstimatorKind{.tag = EstimatorTag::Naive},
                                        EstimatorKind{.tag = EstimatorTag::Miller},
                                        EstimatorKind{.tag = EstimatorTag::Grassberger}};
  std::uint64_t seed = 1;

  // pi ~ Dirichlet(1, ..., 1) and q_k ~ U(0, 1), drawn from `table_seed`.
  static BiasSimConfig make_default(std::size_t n_classes = 40,
                                    std::uint64_t table_seed = kDefaultBiasTableSeed);

  std::size_t classes() const noexcept { return class_marginal.size(); }
  // Throws ConfigError for an invalid probability table or empty sweep.
  void validate() const;
};

struct BiasRow {
  std::size_t n = 0;
  std::string estimator;
  double mean_gain = 0.0;
  double std_gain = 0.0;  // sample standard deviation over replicates
  double true_gain = 0.0;
};

std::vector<BiasRow> simulate_bias(const BiasSimConfig& cfg);
void write_bias_csv(std::ostream& out, const std::vector<BiasRow>& rows);

enum class Metric { Accuracy, LogLikelihood, Rmse };

const char* to_string(Metric metric);
bool higher_is_better(Metric metric);

// Fraction of correct predictions; voting ties drawn from `seed`.
double accuracy(const Forest& forest, const Dataset& ds, std::uint64_t seed);
// Mean ln p(y | x) over the rows, original target units.
double mean_log_likelihood(const Forest& forest, const Dataset& ds);
// Root mean squared error over all target entries, original units.
double rmse(const Forest& forest, const Dataset& ds);

double evaluate(const Forest& forest, const Dataset& ds, Metric metric, std::uint64_t seed);

struct ModelSelection {
  std::size_t best_index = 0;
  TrainConfig config;
  std::vector<double> scores;  // validation metric per candidate
};

// Trains every candidate on `train` and scores it on `val`; the first
// candidate wins ties.
ModelSelection model_select(const std::vector<TrainConfig>& candidates, const Dataset& train,
                            const Dataset& val, Metric metric);

struct ReportRow {
  std::string estimator;
  std::size_t replicate = 0;
  std::size_t min_samples_split = 0;
  double kde_lambda = 0.0;
  std::optional<double> accuracy;
  std::optional<double> log_likelihood;
  std::optional<double> rmse;
};

struct MetricSummary {
  std::string estimator;
  std::string metric;
  double mean = 0.0;
  double std = 0.0;
  std::size_t count = 0;
};

struct ExperimentReport {
  Task task = Task::Classification;
  std::vector<ReportRow> rows;
  std::vector<MetricSummary> summary;
  double runtime_seconds = 0.0;

  // One row per (estimator, replicate). Deterministic given the inputs.
  void write_csv(std::ostream& out) const;
  // Structured summary including runtime.
  std::string summary_json() const;
  const MetricSummary* find(const std::string& estimator, const std::string& metric) const;
};

// Train/val/test inputs. Missing parts are derived by seeded splitting:
// only `train` -> 25/25/50; train + test -> train halved into train/val.
struct ExperimentData {
  Dataset train;
  std::optional<Dataset> val;
  std::optional<Dataset> test;
};

struct ClassificationProtocol {
  std::vector<std::size_t> min_split_grid{1, 5, 10};
  std::vector<EstimatorKind> estimators{EstimatorKind{.tag = EstimatorTag::Naive},
                                        EstimatorKind{.tag = EstimatorTag::Grassberger}};
  std::size_t replicates = 5;
  TrainConfig base;  // n_trees = 8, n_tests = 256
  std::uint64_t seed = 0;
};

ExperimentReport run_classification(const ExperimentData& data, const ClassificationProtocol& protocol);

struct RegressionProtocol {
  std::vector<double> lambda_grid{1e-4, 1e-3, 1e-2, 0.1, 1.0};
  std::vector<EstimatorKind> estimators{
      EstimatorKind{.tag = EstimatorTag::MvnDiag}, EstimatorKind{.tag = EstimatorTag::MvnPlugin},
      EstimatorKind{.tag = EstimatorTag::MvnUmvue}, EstimatorKind{.tag = EstimatorTag::OneNN}};
  std::size_t selection_replicates = 10;
  std::size_t final_replicates = 10;
  TrainConfig base = [] {
    TrainConfig c;
    c.min_samples_leaf = 16;
    return c;
  }();
  std::uint64_t seed = 0;
};

// Dequantizes, splits 60/40 into trainval/test, selects lambda per estimator
// over train/val splits at 40/20 of the whole, then trains final replicates on
// trainval. Throws DataError for targets that cannot be made absolutely
// continuous.
ExperimentReport run_regression(const Dataset& ds, const RegressionProtocol& protocol);

// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double sample_std(const std::vector<double>& values);
double mean_of(const std::vector<double>& values);

}  // namespace infogain
