// infogain: command-line front end for forest training, prediction,
// evaluation, model selection and the information gain bias simulation.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "infogain/data.hpp"
#include "infogain/entropy.hpp"
#include "infogain/error.hpp"
#include "infogain/experiments.hpp"
#include "infogain/forest.hpp"

namespace {

using namespace infogain;

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

struct CommonOptions {
  std::uint64_t seed = 0;
  std::vector<std::string> estimators;
  std::size_t trees = 8;
  std::size_t tests = 256;
  std::size_t min_split = 2;
  std::size_t min_leaf = 1;
  std::optional<std::size_t> max_depth;
  double lambda = 1e-2;
  std::size_t subsample = 256;
  std::string umvue_variant = "centered";
  std::string averaging = "mixture";
  std::string out;
  std::string summary;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool training) {
  cmd->add_option("--seed", o.seed, "Master random seed");
  cmd->add_option("--estimator", o.estimators,
                  "naive|miller|grassberger|mvn-plugin|mvn-diag|mvn-umvue|one-nn (repeatable)");
  cmd->add_option("--out", o.out, "Output path (stdout when omitted)");
  cmd->add_option("--summary", o.summary, "Write a JSON summary to this path");
  if (!training) return;
  cmd->add_option("--trees", o.trees, "Number of trees")->check(CLI::PositiveNumber);
  cmd->add_option("--tests", o.tests, "Split proposals per node")->check(CLI::PositiveNumber);
  cmd->add_option("--min-split", o.min_split, "Minimum node size to attempt a split")->check(CLI::PositiveNumber);
  cmd->add_option("--min-leaf", o.min_leaf, "Minimum samples per child")->check(CLI::PositiveNumber);
  cmd->add_option("--max-depth", o.max_depth, "Maximum tree depth");
  cmd->add_option("--lambda", o.lambda, "KDE covariance regularization")->check(CLI::NonNegativeNumber);
  cmd->add_option("--subsample", o.subsample, "1-NN estimator subsample size");
  cmd->add_option("--umvue-variant", o.umvue_variant, "centered|as-printed")
      ->check(CLI::IsMember({"centered", "as-printed"}));
  cmd->add_option("--averaging", o.averaging, "mixture|average-log-likelihood")
      ->check(CLI::IsMember({"mixture", "average-log-likelihood"}));
}

EstimatorKind make_estimator(const std::string& name, const CommonOptions& o) {
  EstimatorKind e = EstimatorKind::parse(name);
  e.subsample_size = o.subsample;
  e.umvue_variant = o.umvue_variant == "as-printed" ? UmvueVariant::AsPrinted : UmvueVariant::Centered;
  e.validate();
  return e;
}

std::vector<EstimatorKind> estimators_or(const CommonOptions& o, std::vector<std::string> fallback) {
  const auto& names = o.estimators.empty() ? fallback : o.estimators;
  std::vector<EstimatorKind> out;
  for (const auto& n : names) out.push_back(make_estimator(n, o));
  return out;
}

TrainConfig make_config(const CommonOptions& o, const EstimatorKind& estimator) {
  TrainConfig c;
  c.n_trees = o.trees;
  c.n_tests = o.tests;
  c.min_samples_split = o.min_split;
  c.min_samples_leaf = o.min_leaf;
  c.max_depth = o.max_depth;
  c.kde_lambda = o.lambda;
  c.master_seed = o.seed;
  c.estimator = estimator;
  c.averaging = o.averaging == "mixture" ? DensityAveraging::Mixture : DensityAveraging::AverageLogLikelihood;
  c.validate();
  return c;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct DataOptions {
  std::string data;
  std::vector<std::string> targets;
  std::string task = "classification";
};

void add_data(CLI::App* cmd, DataOptions& d, bool required = true) {
  auto* opt = cmd->add_option("--data", d.data, "CSV file with one header row");
  if (required) opt->required();
  cmd->add_option("--target", d.targets, "Target column name (repeatable)");
  cmd->add_option("--task", d.task, "classification|regression")
      ->check(CLI::IsMember({"classification", "regression"}));
}

CsvSchema schema_of(const DataOptions& d) {
  if (d.targets.empty()) throw ConfigError("--target is required");
  return CsvSchema{.target_columns = d.targets, .task = parse_task(d.task)};
}

Dataset load_for_model(const Forest& model, const std::string& path, const std::vector<std::string>& targets,
                       bool require_targets) {
  CsvSchema schema;
  schema.task = model.task;
  schema.target_columns = targets;
  schema.feature_columns = model.feature_names;
  schema.known_labels = model.label_names;
  schema.require_targets = require_targets;
  Dataset ds = load_csv(path, schema);
  if (ds.n_features() != model.n_features) throw DataError("feature count does not match the model");
  if (model.task == Task::Classification && ds.has_targets() && ds.n_classes > model.n_classes)
    throw DataError("data contains class labels unknown to the model");
  return ds;
}

// --- subcommands ------------------------------------------------------------

int cmd_simulate_bias(const CommonOptions& o, std::size_t classes, std::size_t replicates,
                      const std::vector<std::size_t>& sizes, std::uint64_t table_seed) {
  BiasSimConfig cfg = BiasSimConfig::make_default(classes, table_seed);
  cfg.replicates = replicates;
  if (!sizes.empty()) cfg.sample_sizes = sizes;
  cfg.seed = o.seed;
  cfg.estimators = estimators_or(o, {"naive", "miller", "grassberger"});
  const auto rows = simulate_bias(cfg);
  std::ostringstream csv;
  write_bias_csv(csv, rows);
  emit(o.out, csv.str());
  if (!o.summary.empty()) {
    nlohmann::json doc;
    doc["classes"] = classes;
    doc["replicates"] = replicates;
    doc["table_seed"] = table_seed;
    doc["true_gain"] = rows.empty() ? 0.0 : rows.front().true_gain;
    emit(o.summary, doc.dump(2) + "\n");
  }
  return 0;
}

int cmd_train(const CommonOptions& o, const DataOptions& d, bool dequant) {
  Dataset ds = load_csv(d.data, schema_of(d));
  const Task task = ds.task;
  const auto est = estimators_or(o, {task == Task::Classification ? "naive" : "mvn-plugin"});
  if (est.size() != 1) throw ConfigError("train takes a single --estimator");
  if (dequant && task == Task::Regression) {
    Rng rng(derive_seed(o.seed, 0xDE0));
    ds.targets = dequantize(ds.targets, rng).targets;
  }
  const Forest forest = train_forest(ds, make_config(o, est.front()));
  const std::string doc = serialize(forest);
  emit(o.out, doc);
  if (!o.summary.empty()) {
    nlohmann::json s;
    s["trees"] = forest.trees.size();
    std::size_t leaves = 0;
    for (const auto& t : forest.trees) leaves += t.leaf_count();
    s["leaves"] = leaves;
    s["samples"] = ds.size();
    emit(o.summary, s.dump(2) + "\n");
  }
  return 0;
}

int cmd_predict(const CommonOptions& o, const std::string& model_path, const std::string& data,
                const std::vector<std::string>& targets) {
  const Forest model = load_forest(model_path);
  const Dataset ds = load_for_model(model, data, targets, false);
  std::ostringstream csv;
  Rng rng(derive_seed(o.seed, 0xACC));
  if (model.task == Task::Classification) {
    csv << "row,prediction\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const std::size_t k = predict_class(model, ds.features.row(i), rng);
      csv << i << ',' << (k < model.label_names.size() ? model.label_names[k] : std::to_string(k)) << '\n';
    }
  } else {
    const bool with_density = ds.has_targets() && ds.target_dim() == model.target_dim;
    csv << "row";
    for (std::size_t j = 0; j < model.target_dim; ++j) csv << ",prediction_" << j;
    if (with_density) csv << ",log_density";
    csv << '\n';
    for (std::size_t i = 0; i < ds.size(); ++i) {
      csv << i;
      for (double v : predict_regression(model, ds.features.row(i))) csv << ',' << fmt(v);
      if (with_density) csv << ',' << fmt(forest_log_density(model, ds.features.row(i), ds.targets.row(i)));
      csv << '\n';
    }
  }
  emit(o.out, csv.str());
  return 0;
}

int cmd_evaluate(const CommonOptions& o, const std::string& model_path, const std::string& data,
                 const std::vector<std::string>& targets) {
  const Forest model = load_forest(model_path);
  if (targets.empty()) throw ConfigError("--target is required");
  const Dataset ds = load_for_model(model, data, targets, true);
  std::ostringstream csv;
  csv << "metric,value\n";
  if (model.task == Task::Classification) {
    csv << "accuracy," << fmt(accuracy(model, ds, derive_seed(o.seed, 0xACC))) << '\n';
  } else {
    csv << "log_likelihood," << fmt(mean_log_likelihood(model, ds)) << '\n';
    csv << "rmse," << fmt(rmse(model, ds)) << '\n';
  }
  emit(o.out, csv.str());
  return 0;
}

int cmd_model_select(const CommonOptions& o, const DataOptions& d, const std::string& val_path,
                     std::vector<std::size_t> split_grid, std::vector<double> lambda_grid,
                     const std::string& metric_name) {
  const CsvSchema schema = schema_of(d);
  Dataset train = load_csv(d.data, schema);
  Dataset val;
  if (val_path.empty()) {
    Rng rng(derive_seed(o.seed, 0x5B117));
    auto parts = split_dataset(train, {0.5, 0.5, 0.0}, rng);
    train = std::move(parts.train);
    val = std::move(parts.val);
  } else {
    CsvSchema vs = schema;
    vs.known_labels = train.label_names;
    val = load_csv(val_path, vs);
  }
  const Task task = train.task;
  Metric metric = task == Task::Classification ? Metric::Accuracy : Metric::LogLikelihood;
  if (metric_name == "rmse") metric = Metric::Rmse;
  else if (metric_name == "accuracy") metric = Metric::Accuracy;
  else if (metric_name == "log-likelihood") metric = Metric::LogLikelihood;
  else if (!metric_name.empty()) throw ConfigError("unknown metric '" + metric_name + "'");
  if ((metric == Metric::Accuracy) != (task == Task::Classification))
    throw ConfigError("metric does not match the task");

  if (split_grid.empty()) split_grid = {o.min_split};
  if (lambda_grid.empty()) lambda_grid = {o.lambda};
  const auto est = estimators_or(o, {task == Task::Classification ? "naive" : "mvn-plugin"});
  std::vector<TrainConfig> candidates;
  for (const auto& e : est)
    for (std::size_t m : split_grid)
      for (double l : lambda_grid) {
        TrainConfig c = make_config(o, e);
        c.min_samples_split = m;
        c.kde_lambda = l;
        candidates.push_back(c);
      }
  const ModelSelection sel = model_select(candidates, train, val, metric);
  std::ostringstream csv;
  csv << "candidate,estimator,min_samples_split,kde_lambda," << to_string(metric) << ",selected\n";
  for (std::size_t c = 0; c < candidates.size(); ++c)
    csv << c << ',' << candidates[c].estimator.name() << ',' << candidates[c].min_samples_split << ','
        << fmt(candidates[c].kde_lambda) << ',' << fmt(sel.scores[c]) << ',' << (c == sel.best_index ? 1 : 0)
        << '\n';
  emit(o.out, csv.str());
  if (!o.summary.empty()) {
    nlohmann::json s;
    s["best_index"] = sel.best_index;
    s["estimator"] = sel.config.estimator.name();
    s["min_samples_split"] = sel.config.min_samples_split;
    s["kde_lambda"] = sel.config.kde_lambda;
    s["score"] = sel.scores[sel.best_index];
    emit(o.summary, s.dump(2) + "\n");
  }
  return 0;
}

int cmd_experiment(const CommonOptions& o, const DataOptions& d, const std::string& val_path,
                   const std::string& test_path, std::size_t replicates, std::size_t selection_replicates,
                   std::vector<std::size_t> split_grid, std::vector<double> lambda_grid) {
  const CsvSchema schema = schema_of(d);
  ExperimentReport report;
  if (schema.task == Task::Classification) {
    ExperimentData data{load_csv(d.data, schema), std::nullopt, std::nullopt};
    CsvSchema other = schema;
    other.known_labels = data.train.label_names;
    if (!val_path.empty()) data.val = load_csv(val_path, other);
    if (!test_path.empty()) {
      other.known_labels = data.val ? data.val->label_names : data.train.label_names;
      data.test = load_csv(test_path, other);
    }
    if (data.val && !data.test) throw ConfigError("--val requires --test");
    ClassificationProtocol p;
    p.base = make_config(o, EstimatorKind{});
    p.estimators = estimators_or(o, {"naive", "grassberger"});
    p.replicates = replicates;
    p.seed = o.seed;
    if (!split_grid.empty()) p.min_split_grid = split_grid;
    report = run_classification(data, p);
  } else {
    if (!val_path.empty() || !test_path.empty())
      throw ConfigError("regression experiments split a single --data file");
    RegressionProtocol p;
    TrainConfig base = make_config(o, EstimatorKind{.tag = EstimatorTag::MvnPlugin});
    p.base = base;
    p.estimators = estimators_or(o, {"mvn-diag", "mvn-plugin", "mvn-umvue", "one-nn"});
    p.final_replicates = replicates;
    p.selection_replicates = selection_replicates;
    p.seed = o.seed;
    if (!lambda_grid.empty()) p.lambda_grid = lambda_grid;
    report = run_regression(load_csv(d.data, schema), p);
  }
  std::ostringstream csv;
  report.write_csv(csv);
  emit(o.out, csv.str());
  if (!o.summary.empty()) emit(o.summary, report.summary_json());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decision forests with bias-corrected information gain estimates"};
  app.require_subcommand(1);

  CommonOptions common;
  DataOptions data;

  auto* sim = app.add_subcommand("simulate-bias", "Finite-sample information gain estimates vs. the exact gain");
  std::size_t classes = 40, sim_replicates = 500;
  std::vector<std::size_t> sizes;
  std::uint64_t table_seed = kDefaultBiasTableSeed;
  add_common(sim, common, false);
  sim->add_option("--classes", classes, "Number of classes")->check(CLI::PositiveNumber);
  sim->add_option("--replicates", sim_replicates, "Replicates per sample size")->check(CLI::PositiveNumber);
  sim->add_option("--sizes", sizes, "Sample sizes")->delimiter(',');
  sim->add_option("--table-seed", table_seed, "Seed of the random class/split table");

  auto* train = app.add_subcommand("train", "Train a forest and write the model document");
  bool dequant = false;
  add_common(train, common, true);
  add_data(train, data);
  train->add_flag("--dequantize", dequant, "Dequantize repeated regression targets first");

  auto* predict = app.add_subcommand("predict", "Predict with a trained model");
  std::string model_path, pred_data;
  std::vector<std::string> pred_targets;
  add_common(predict, common, false);
  predict->add_option("--model", model_path, "Model document")->required();
  predict->add_option("--data", pred_data, "CSV with the model's feature columns")->required();
  predict->add_option("--target", pred_targets, "Target columns to report log-densities for");

  auto* evaluate = app.add_subcommand("evaluate", "Score a trained model on labelled data");
  add_common(evaluate, common, false);
  evaluate->add_option("--model", model_path, "Model document")->required();
  evaluate->add_option("--data", pred_data, "Labelled CSV")->required();
  evaluate->add_option("--target", pred_targets, "Target column names")->required();

  auto* select = app.add_subcommand("model-select", "Choose hyperparameters on a validation set");
  std::string val_path, test_path, metric_name;
  std::vector<std::size_t> split_grid;
  std::vector<double> lambda_grid;
  add_common(select, common, true);
  add_data(select, data);
  select->add_option("--val", val_path, "Validation CSV (default: half of --data)");
  select->add_option("--min-split-grid", split_grid, "Candidate min-split values")->delimiter(',');
  select->add_option("--lambda-grid", lambda_grid, "Candidate KDE lambdas")->delimiter(',');
  select->add_option("--metric", metric_name, "accuracy|log-likelihood|rmse");

  auto* experiment = app.add_subcommand("experiment", "Run the full classification or regression protocol");
  std::size_t replicates = 0, selection_replicates = 10;
  add_common(experiment, common, true);
  add_data(experiment, data);
  experiment->add_option("--val", val_path, "Fixed validation CSV");
  experiment->add_option("--test", test_path, "Fixed test CSV");
  experiment->add_option("--replicates", replicates, "Final replicates (5 classification, 10 regression)");
  experiment->add_option("--selection-replicates", selection_replicates, "Regression model-selection replicates");
  experiment->add_option("--min-split-grid", split_grid, "Candidate min-split values")->delimiter(',');
  experiment->add_option("--lambda-grid", lambda_grid, "Candidate KDE lambdas")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*sim) return cmd_simulate_bias(common, classes, sim_replicates, sizes, table_seed);
    if (*train) return cmd_train(common, data, dequant);
    if (*predict) return cmd_predict(common, model_path, pred_data, pred_targets);
    if (*evaluate) return cmd_evaluate(common, model_path, pred_data, pred_targets);
    if (*select) return cmd_model_select(common, data, val_path, split_grid, lambda_grid, metric_name);
    if (*experiment) {
      if (replicates == 0) replicates = data.task == "classification" ? 5 : 10;
      return cmd_experiment(common, data, val_path, test_path, replicates, selection_replicates, split_grid,
                            lambda_grid);
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const InsufficientSamplesError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const DomainError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
