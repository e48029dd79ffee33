#include "infogain/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "infogain/error.hpp"

namespace infogain {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double mean_of(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_std(const std::vector<double>& values) {
  if (values.size() < 2) return 0.0;
  const double m = mean_of(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

// --- bias simulation --------------------------------------------------------

BiasSimConfig BiasSimConfig::make_default(std::size_t n_classes, std::uint64_t table_seed) {
  if (n_classes < 1) throw ConfigError("bias simulation needs at least one class");
  BiasSimConfig cfg;
  Rng rng(table_seed);
  cfg.class_marginal.resize(n_classes);
  cfg.left_prob.resize(n_classes);
  double total = 0.0;
  for (std::size_t k = 0; k < n_classes; ++k) {
    cfg.class_marginal[k] = rng.exponential();
    total += cfg.class_marginal[k];
  }
  for (double& p : cfg.class_marginal) p /= total;
  for (double& q : cfg.left_prob) q = rng.uniform();
  return cfg;
}

void BiasSimConfig::validate() const {
  if (class_marginal.empty() || class_marginal.size() != left_prob.size())
    throw ConfigError("bias simulation: class marginal and left probabilities must have equal, positive length");
  double total = 0.0;
  for (double p : class_marginal) {
    if (!(p >= 0.0)) throw ConfigError("bias simulation: negative class probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError("bias simulation: class marginal does not sum to one");
  for (double q : left_prob)
    if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("bias simulation: left probability outside [0, 1]");
  if (sample_sizes.empty() || replicates < 1) throw ConfigError("bias simulation: empty sweep");
  for (std::size_t n : sample_sizes)
    if (n < 1) throw ConfigError("bias simulation: sample sizes must be positive");
  if (estimators.empty()) throw ConfigError("bias simulation: no estimators");
  for (const auto& e : estimators)
    if (!e.is_discrete()) throw ConfigError("bias simulation: estimator '" + e.name() + "' is not discrete");
}

std::vector<BiasRow> simulate_bias(const BiasSimConfig& cfg) {
  cfg.validate();
  const std::size_t k_classes = cfg.classes();
  const double truth = multinomial_info_gain_exact(
      JointClassSplitDistribution::from_conditionals(cfg.class_marginal, cfg.left_prob));

  // Cumulative distribution over the 2K cells (k, L), (k, R).
  std::vector<double> cdf(2 * k_classes);
  double acc = 0.0;
  for (std::size_t k = 0; k < k_classes; ++k) {
    acc += cfg.class_marginal[k] * cfg.left_prob[k];
    cdf[2 * k] = acc;
    acc += cfg.class_marginal[k] * (1.0 - cfg.left_prob[k]);
    cdf[2 * k + 1] = acc;
  }

  std::vector<BiasRow> rows;
  for (std::size_t n : cfg.sample_sizes) {
    std::vector<std::vector<double>> gains(cfg.estimators.size(), std::vector<double>(cfg.replicates));
    const std::uint64_t size_seed = derive_seed(cfg.seed, n);
    for (std::size_t r = 0; r < cfg.replicates; ++r) {
      Rng rng(derive_seed(size_seed, r));
      ClassHistogram left(k_classes), right(k_classes), parent(k_classes);
      for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform() * acc;
        auto cell = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        cell = std::min(cell, cdf.size() - 1);
        const std::size_t k = cell / 2;
        (cell % 2 == 0 ? left : right).add(k);
        parent.add(k);
      }
      for (std::size_t e = 0; e < cfg.estimators.size(); ++e)
        gains[e][r] = estimated_information_gain(parent, left, right, cfg.estimators[e]);
    }
    for (std::size_t e = 0; e < cfg.estimators.size(); ++e)
      rows.push_back({n, cfg.estimators[e].name(), mean_of(gains[e]), sample_std(gains[e]), truth});
  }
  return rows;
}

void write_bias_csv(std::ostream& out, const std::vector<BiasRow>& rows) {
  out << "n,estimator,mean_gain,std_gain,true_gain\n";
  for (const auto& r : rows)
    out << r.n << ',' << r.estimator << ',' << format_double(r.mean_gain) << ',' << format_double(r.std_gain)
        << ',' << format_double(r.true_gain) << '\n';
}

// --- metrics ----------------------------------------------------------------

const char* to_string(Metric metric) {
  switch (metric) {
    case Metric::Accuracy: return "accuracy";
    case Metric::LogLikelihood: return "log_likelihood";
    case Metric::Rmse: return "rmse";
  }
  return "unknown";
}

bool higher_is_better(Metric metric) { return metric != Metric::Rmse; }

double accuracy(const Forest& forest, const Dataset& ds, std::uint64_t seed) {
  if (ds.size() == 0) throw InsufficientSamplesError("accuracy: empty dataset");
  Rng rng(seed);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (predict_class(forest, ds.features.row(i), rng) == ds.labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(ds.size());
}

double mean_log_likelihood(const Forest& forest, const Dataset& ds) {
  if (ds.size() == 0) throw InsufficientSamplesError("mean_log_likelihood: empty dataset");
  double total = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i)
    total += forest_log_density(forest, ds.features.row(i), ds.targets.row(i));
  return total / static_cast<double>(ds.size());
}

double rmse(const Forest& forest, const Dataset& ds) {
  if (ds.size() == 0) throw InsufficientSamplesError("rmse: empty dataset");
  double ss = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto pred = predict_regression(forest, ds.features.row(i));
    for (std::size_t j = 0; j < pred.size(); ++j) {
      const double e = pred[j] - ds.targets(i, j);
      ss += e * e;
    }
  }
  return std::sqrt(ss / static_cast<double>(ds.size() * ds.target_dim()));
}

double evaluate(const Forest& forest, const Dataset& ds, Metric metric, std::uint64_t seed) {
  switch (metric) {
    case Metric::Accuracy: return accuracy(forest, ds, seed);
    case Metric::LogLikelihood: return mean_log_likelihood(forest, ds);
    case Metric::Rmse: return rmse(forest, ds);
  }
  return 0.0;
}

ModelSelection model_select(const std::vector<TrainConfig>& candidates, const Dataset& train,
                            const Dataset& val, Metric metric) {
  if (candidates.empty()) throw ConfigError("model_select: no candidates");
  ModelSelection out;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const Forest forest = train_forest(train, candidates[c]);
    const double score = evaluate(forest, val, metric, derive_seed(candidates[c].master_seed, 0xE7A1));
    out.scores.push_back(score);
    const bool better = higher_is_better(metric) ? score > out.scores[out.best_index]
                                                 : score < out.scores[out.best_index];
    if (c == 0 || better) out.best_index = c;
  }
  out.config = candidates[out.best_index];
  return out;
}

// --- reports ----------------------------------------------------------------

void ExperimentReport::write_csv(std::ostream& out) const {
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  out << "task,estimator,replicate,min_samples_split,kde_lambda,accuracy,log_likelihood,rmse\n";
  for (const auto& r : rows)
    out << to_string(task) << ',' << r.estimator << ',' << r.replicate << ',' << r.min_samples_split << ','
        << format_double(r.kde_lambda) << ',' << opt(r.accuracy) << ',' << opt(r.log_likelihood) << ','
        << opt(r.rmse) << '\n';
}

std::string ExperimentReport::summary_json() const {
  nlohmann::json doc;
  doc["task"] = to_string(task);
  doc["runtime_seconds"] = runtime_seconds;
  nlohmann::json metrics = nlohmann::json::array();
  for (const auto& s : summary)
    metrics.push_back({{"estimator", s.estimator}, {"metric", s.metric}, {"mean", s.mean}, {"std", s.std},
                       {"replicates", s.count}});
  doc["metrics"] = std::move(metrics);
  nlohmann::json selected = nlohmann::json::array();
  for (const auto& r : rows)
    selected.push_back({{"estimator", r.estimator}, {"replicate", r.replicate},
                        {"min_samples_split", r.min_samples_split}, {"kde_lambda", r.kde_lambda}});
  doc["selected"] = std::move(selected);
  return doc.dump(2) + "\n";
}

const MetricSummary* ExperimentReport::find(const std::string& estimator, const std::string& metric) const {
  for (const auto& s : summary)
    if (s.estimator == estimator && s.metric == metric) return &s;
  return nullptr;
}

namespace {

void summarize(ExperimentReport& report, const std::vector<EstimatorKind>& estimators) {
  for (const auto& e : estimators) {
    std::map<std::string, std::vector<double>> values;
    for (const auto& r : report.rows) {
      if (r.estimator != e.name()) continue;
      if (r.accuracy) values["accuracy"].push_back(*r.accuracy);
      if (r.log_likelihood) values["log_likelihood"].push_back(*r.log_likelihood);
      if (r.rmse) values["rmse"].push_back(*r.rmse);
    }
    for (const char* metric : {"accuracy", "log_likelihood", "rmse"}) {
      const auto it = values.find(metric);
      if (it == values.end()) continue;
      report.summary.push_back({e.name(), metric, mean_of(it->second), sample_std(it->second), it->second.size()});
    }
  }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

ExperimentReport run_classification(const ExperimentData& data, const ClassificationProtocol& protocol) {
  const auto start = std::chrono::steady_clock::now();
  if (data.train.task != Task::Classification) throw ConfigError("run_classification: dataset is not a classification task");
  if (protocol.min_split_grid.empty() || protocol.estimators.empty() || protocol.replicates < 1)
    throw ConfigError("run_classification: empty grid, estimator list or replicate count");
  for (const auto& e : protocol.estimators)
    if (!e.is_discrete()) throw ConfigError("run_classification: estimator '" + e.name() + "' is not discrete");

  Rng split_rng(derive_seed(protocol.seed, 0x5B117));
  Dataset train, val, test;
  if (data.val && data.test) {
    train = data.train;
    val = *data.val;
    test = *data.test;
  } else if (data.test) {
    auto parts = split_dataset(data.train, {0.5, 0.5, 0.0}, split_rng);
    train = std::move(parts.train);
    val = std::move(parts.val);
    test = *data.test;
  } else {
    auto parts = split_dataset(data.train, {0.25, 0.25, 0.5}, split_rng);
    train = std::move(parts.train);
    val = std::move(parts.val);
    test = std::move(parts.test);
  }
  const Dataset trainval = concatenate(train, val);

  ExperimentReport report;
  report.task = Task::Classification;
  for (const auto& estimator : protocol.estimators) {
    for (std::size_t r = 0; r < protocol.replicates; ++r) {
      const std::uint64_t replicate_seed = derive_seed(protocol.seed, r);
      std::vector<TrainConfig> candidates;
      for (std::size_t m : protocol.min_split_grid) {
        TrainConfig c = protocol.base;
        c.estimator = estimator;
        c.min_samples_split = m;
        c.master_seed = replicate_seed;
        candidates.push_back(c);
      }
      const ModelSelection sel = model_select(candidates, train, val, Metric::Accuracy);
      const Forest final_model = train_forest(trainval, sel.config);
      ReportRow row;
      row.estimator = estimator.name();
      row.replicate = r;
      row.min_samples_split = sel.config.min_samples_split;
      row.kde_lambda = sel.config.kde_lambda;
      row.accuracy = accuracy(final_model, test, derive_seed(replicate_seed, 0xACC));
      report.rows.push_back(row);
    }
  }
  summarize(report, protocol.estimators);
  report.runtime_seconds = seconds_since(start);
  return report;
}

ExperimentReport run_regression(const Dataset& ds, const RegressionProtocol& protocol) {
  const auto start = std::chrono::steady_clock::now();
  if (ds.task != Task::Regression) throw ConfigError("run_regression: dataset is not a regression task");
  if (protocol.lambda_grid.empty() || protocol.estimators.empty() || protocol.selection_replicates < 1 ||
      protocol.final_replicates < 1)
    throw ConfigError("run_regression: empty grid, estimator list or replicate count");
  for (const auto& e : protocol.estimators)
    if (e.is_discrete()) throw ConfigError("run_regression: estimator '" + e.name() + "' is not differential");
  ds.validate();

  Rng dequant_rng(derive_seed(protocol.seed, 0xDE0));
  Dataset data = ds;
  Dequantized dq = dequantize(ds.targets, dequant_rng);
  if (dq.applied && !dq.skipped_dims.empty() && dq.skipped_dims.size() < ds.target_dim())
    throw DataError("run_regression: target dimension " + std::to_string(dq.skipped_dims.front()) +
                    " is constant while other target vectors repeat; targets are not absolutely continuous");
  data.targets = std::move(dq.targets);

  Rng split_rng(derive_seed(protocol.seed, 0x5B117));
  const IndexSplit outer = split_indices(data.size(), {0.6, 0.0, 0.4}, split_rng);
  const Dataset trainval = data.subset(outer.train);
  const Dataset test = data.subset(outer.test);

  ExperimentReport report;
  report.task = Task::Regression;
  const std::size_t n_lambda = protocol.lambda_grid.size();
  for (const auto& estimator : protocol.estimators) {
    // Mean validation log-likelihood per lambda over the selection replicates.
    std::vector<double> val_ll(n_lambda, 0.0);
    for (std::size_t r = 0; r < protocol.selection_replicates; ++r) {
      Rng inner_rng(derive_seed(protocol.seed, 0x1000 + r));
      const auto inner = split_dataset(trainval, {2.0 / 3.0, 1.0 / 3.0, 0.0}, inner_rng);
      std::vector<TrainConfig> candidates;
      for (double lambda : protocol.lambda_grid) {
        TrainConfig c = protocol.base;
        c.estimator = estimator;
        c.kde_lambda = lambda;
        c.master_seed = derive_seed(protocol.seed, 0x2000 + r);
        candidates.push_back(c);
      }
      const ModelSelection sel = model_select(candidates, inner.train, inner.val, Metric::LogLikelihood);
      for (std::size_t l = 0; l < n_lambda; ++l) val_ll[l] += sel.scores[l];
    }
    std::size_t best = 0;
    for (std::size_t l = 1; l < n_lambda; ++l)
      if (val_ll[l] > val_ll[best]) best = l;

    for (std::size_t r = 0; r < protocol.final_replicates; ++r) {
      TrainConfig c = protocol.base;
      c.estimator = estimator;
      c.kde_lambda = protocol.lambda_grid[best];
      c.master_seed = derive_seed(protocol.seed, 0x3000 + r);
      const Forest model = train_forest(trainval, c);
      ReportRow row;
      row.estimator = estimator.name();
      row.replicate = r;
      row.min_samples_split = c.min_samples_split;
      row.kde_lambda = c.kde_lambda;
      row.log_likelihood = mean_log_likelihood(model, test);
      row.rmse = rmse(model, test);
      report.rows.push_back(row);
    }
  }
  summarize(report, protocol.estimators);
  report.runtime_seconds = seconds_since(start);
  return report;
}

}  // namespace infogain
