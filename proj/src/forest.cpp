#include "infogain/forest.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <thread>

#include "infogain/error.hpp"
#include "infogain/numerics.hpp"

namespace infogain {

namespace {

constexpr double kTieTolerance = 1e-12;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool improves(double score, double best) {
  if (!std::isfinite(score)) return false;
  if (!std::isfinite(best)) return true;
  return score > best + kTieTolerance * std::max(1.0, std::abs(best));
}

double log_sum_exp(std::span<const double> values) {
  const double hi = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(hi)) return hi;
  double s = 0.0;
  for (double v : values) s += std::exp(v - hi);
  return hi + std::log(s);
}

}  // namespace

void TrainConfig::validate() const {
  if (n_trees < 1) throw ConfigError("n_trees must be at least 1");
  if (n_tests < 1) throw ConfigError("n_tests must be at least 1");
  if (min_samples_split < 1) throw ConfigError("min_samples_split must be at least 1");
  if (min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be at least 1");
  if (max_depth && *max_depth < 1) throw ConfigError("max_depth must be at least 1");
  if (!(kde_lambda >= 0.0) || !std::isfinite(kde_lambda)) throw ConfigError("kde_lambda must be non-negative");
  estimator.validate();
}

std::size_t Tree::route(std::span<const double> x) const {
  std::size_t id = 0;
  while (const auto* internal = std::get_if<InternalNode>(&nodes[id]))
    id = internal->split.goes_left(x) ? internal->left : internal->right;
  return id;
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) {
    return !std::holds_alternative<InternalNode>(n);
  }));
}

std::size_t Tree::depth() const {
  std::size_t deepest = 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [id, level] = stack.back();
    stack.pop_back();
    if (const auto* internal = std::get_if<InternalNode>(&nodes[id])) {
      stack.emplace_back(internal->left, level + 1);
      stack.emplace_back(internal->right, level + 1);
    } else {
      deepest = std::max(deepest, level);
    }
  }
  return deepest;
}

SplitCandidate propose_split(const Matrix& features, std::span<const std::size_t> node, Rng& rng) {
  if (node.empty()) throw InsufficientSamplesError("propose_split: empty node");
  if (features.cols() == 0) throw DomainError("propose_split: no features");
  const auto feature = static_cast<std::size_t>(rng.uniform_index(features.cols()));
  const std::size_t sample = node[rng.uniform_index(node.size())];
  return {feature, features(sample, feature)};
}

Partition partition(const Matrix& features, std::span<const std::size_t> node, const SplitCandidate& split) {
  Partition out;
  for (std::size_t i : node) (split.goes_left(features.row(i)) ? out.left : out.right).push_back(i);
  return out;
}

std::optional<std::size_t> first_strict_max(std::span<const double> scores) {
  std::optional<std::size_t> best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < scores.size(); ++t) {
    if (improves(scores[t], best_score)) {
      best = t;
      best_score = scores[t];
    }
  }
  return best;
}

std::optional<ScoredSplit> select_best_split(const Dataset& ds, std::span<const std::size_t> node,
                                             const TrainConfig& config, Rng& rng) {
  const bool classification = ds.task == Task::Classification;
  if (classification != config.estimator.is_discrete())
    throw ConfigError("estimator '" + config.estimator.name() + "' does not match the " +
                      to_string(ds.task) + " task");
  const std::size_t min_side =
      std::max(config.min_samples_leaf, min_samples(config.estimator, classification ? 1 : ds.target_dim()));

  std::optional<ScoredSplit> best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < config.n_tests; ++t) {
    const SplitCandidate candidate = propose_split(ds.features, node, rng);
    const Partition parts = partition(ds.features, node, candidate);
    if (parts.left.size() < min_side || parts.right.size() < min_side) continue;

    ScoredSplit scored{candidate};
    if (classification) {
      ClassHistogram lh(ds.n_classes), rh(ds.n_classes);
      for (std::size_t i : parts.left) lh.add(ds.labels[i]);
      for (std::size_t i : parts.right) rh.add(ds.labels[i]);
      scored.score = split_score(lh, rh, config.estimator);
    } else {
      const Estimate e = split_score(ds.targets.select_rows(parts.left), ds.targets.select_rows(parts.right),
                                     config.estimator, rng);
      scored.score = e.value;
      scored.degenerate = e.degenerate;
    }
    if (improves(scored.score, best_score)) {
      best_score = scored.score;
      best = scored;
    }
  }
  return best;
}

namespace {

ClassLeaf majority_leaf(const Dataset& ds, std::span<const std::size_t> node, Rng& rng) {
  std::vector<std::size_t> counts(ds.n_classes, 0);
  for (std::size_t i : node) ++counts[ds.labels[i]];
  const std::size_t top = *std::max_element(counts.begin(), counts.end());
  std::vector<std::size_t> tied;
  for (std::size_t k = 0; k < counts.size(); ++k)
    if (counts[k] == top) tied.push_back(k);
  const std::size_t pick = tied.size() == 1 ? 0 : rng.uniform_index(tied.size());
  return {tied[pick]};
}

bool is_pure(const Dataset& ds, std::span<const std::size_t> node) {
  return std::all_of(node.begin(), node.end(), [&](std::size_t i) { return ds.labels[i] == ds.labels[node[0]]; });
}

}  // namespace

Tree grow_tree(const Dataset& ds, const TrainConfig& config, std::uint64_t tree_seed) {
  if (ds.size() == 0) throw InsufficientSamplesError("grow_tree: empty dataset");
  config.validate();
  const bool classification = ds.task == Task::Classification;
  Rng rng(tree_seed);
  Tree tree;

  struct Work {
    std::size_t node;
    std::vector<std::size_t> samples;
    std::size_t depth;
  };
  std::vector<std::size_t> all(ds.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  tree.nodes.emplace_back(ClassLeaf{});
  std::vector<Work> stack;
  stack.push_back({0, std::move(all), 0});

  while (!stack.empty()) {
    Work work = std::move(stack.back());
    stack.pop_back();

    std::optional<ScoredSplit> best;
    const bool stop = work.samples.size() < config.min_samples_split ||
                      (config.max_depth && work.depth >= *config.max_depth) ||
                      (classification && is_pure(ds, work.samples));
    if (!stop) best = select_best_split(ds, work.samples, config, rng);

    if (!best) {
      if (classification)
        tree.nodes[work.node] = majority_leaf(ds, work.samples, rng);
      else
        tree.nodes[work.node] = fit_kde_leaf(ds.targets.select_rows(work.samples), config.kde_lambda);
      continue;
    }

    Partition parts = partition(ds.features, work.samples, best->split);
    const auto left = static_cast<std::uint32_t>(tree.nodes.size());
    const auto right = left + 1;
    tree.nodes.emplace_back(ClassLeaf{});
    tree.nodes.emplace_back(ClassLeaf{});
    tree.nodes[work.node] = InternalNode{best->split, left, right};
    // Right is pushed first so the left subtree is grown (and draws) first.
    stack.push_back({right, std::move(parts.right), work.depth + 1});
    stack.push_back({left, std::move(parts.left), work.depth + 1});
  }
  return tree;
}

Forest train_forest(const Dataset& ds, const TrainConfig& config) {
  config.validate();
  ds.validate();
  if (ds.size() == 0) throw InsufficientSamplesError("train_forest: empty dataset");

  Forest forest;
  forest.task = ds.task;
  forest.n_features = ds.n_features();
  forest.feature_names = ds.feature_names;
  forest.config = config;
  const Dataset* train = &ds;
  Dataset standardized;
  if (ds.task == Task::Classification) {
    forest.n_classes = ds.n_classes;
    forest.label_names = ds.label_names;
  } else {
    forest.target_dim = ds.target_dim();
    forest.standardizer = Standardizer::fit(ds.targets);
    standardized = ds;
    standardized.targets = forest.standardizer->apply(ds.targets);
    train = &standardized;
  }

  forest.trees.resize(config.n_trees);
  const std::size_t workers = std::min<std::size_t>(config.n_trees, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t t = 0; t < config.n_trees; ++t)
      forest.trees[t] = grow_tree(*train, config, derive_seed(config.master_seed, t));
  } else {
    std::vector<std::future<void>> jobs;
    for (std::size_t w = 0; w < workers; ++w)
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t t = w; t < config.n_trees; t += workers)
          forest.trees[t] = grow_tree(*train, config, derive_seed(config.master_seed, t));
      }));
    for (auto& job : jobs) job.get();
  }
  return forest;
}

KdeLeaf fit_kde_leaf(const TargetMatrix& targets, double lambda) {
  if (targets.rows() == 0) throw InsufficientSamplesError("fit_kde_leaf: empty leaf");
  if (!(lambda >= 0.0)) throw ConfigError("fit_kde_leaf: lambda must be non-negative");
  const std::size_t n = targets.rows();
  const std::size_t d = targets.cols();

  KdeLeaf leaf;
  leaf.targets = targets;
  leaf.mean.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) leaf.mean[j] += targets(i, j);
  for (double& m : leaf.mean) m /= static_cast<double>(n);

  Matrix sigma = n >= 2 ? sample_covariance(targets) : Matrix(d, d);
  for (std::size_t j = 0; j < d; ++j) sigma(j, j) += lambda;
  const SymmetricEigen eig = symmetric_eigen(sigma);
  const double largest = std::max(eig.values.back(), 0.0);
  if (eig.values.front() <= 1e-12 * std::max(1.0, largest)) {
    for (std::size_t j = 0; j < d; ++j) sigma(j, j) += kKdeLambdaFloor;
    leaf.floored = true;
  }

  const double shrink = std::pow(static_cast<double>(n), -1.0 / (static_cast<double>(d) + 4.0));
  leaf.bandwidth = psd_sqrt(sigma);
  for (double& v : leaf.bandwidth.data()) v *= shrink;
  leaf.log_det_bandwidth = log_det_psd(leaf.bandwidth).value;
  leaf.bandwidth_inverse = spd_inverse(leaf.bandwidth);
  return leaf;
}

double kde_log_density(const KdeLeaf& leaf, std::span<const double> y) {
  const std::size_t d = leaf.targets.cols();
  if (y.size() != d) throw DomainError("kde_log_density: dimension mismatch");
  std::vector<double> terms(leaf.size());
  std::vector<double> diff(d);
  for (std::size_t i = 0; i < leaf.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) diff[j] = y[j] - leaf.targets(i, j);
    double sq = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
      double z = 0.0;
      for (std::size_t b = 0; b < d; ++b) z += leaf.bandwidth_inverse(a, b) * diff[b];
      sq += z * z;
    }
    terms[i] = -0.5 * sq;
  }
  const double dd = static_cast<double>(d);
  return log_sum_exp(terms) - std::log(static_cast<double>(leaf.size())) -
         0.5 * dd * std::log(2.0 * std::numbers::pi) - leaf.log_det_bandwidth;
}

namespace {

void require_task(const Forest& forest, Task task, std::size_t x_dim) {
  if (forest.task != task) throw DomainError(std::string("forest is not a ") + to_string(task) + " model");
  if (x_dim != forest.n_features) throw DomainError("feature vector has the wrong dimension");
  if (forest.trees.empty()) throw DomainError("forest has no trees");
}

}  // namespace

std::size_t predict_class(const Forest& forest, std::span<const double> x, Rng& rng) {
  require_task(forest, Task::Classification, x.size());
  std::vector<std::size_t> votes(forest.n_classes, 0);
  for (const Tree& tree : forest.trees) ++votes[std::get<ClassLeaf>(tree.nodes[tree.route(x)]).label];
  const std::size_t top = *std::max_element(votes.begin(), votes.end());
  std::vector<std::size_t> tied;
  for (std::size_t k = 0; k < votes.size(); ++k)
    if (votes[k] == top) tied.push_back(k);
  return tied.size() == 1 ? tied[0] : tied[rng.uniform_index(tied.size())];
}

std::vector<double> predict_regression(const Forest& forest, std::span<const double> x) {
  require_task(forest, Task::Regression, x.size());
  std::vector<double> avg(forest.target_dim, 0.0);
  for (const Tree& tree : forest.trees) {
    const auto& leaf = std::get<KdeLeaf>(tree.nodes[tree.route(x)]);
    for (std::size_t j = 0; j < avg.size(); ++j) avg[j] += leaf.mean[j];
  }
  for (double& v : avg) v /= static_cast<double>(forest.trees.size());
  return forest.standardizer ? forest.standardizer->invert(avg) : avg;
}

double forest_log_density(const Forest& forest, std::span<const double> x, std::span<const double> y) {
  require_task(forest, Task::Regression, x.size());
  if (y.size() != forest.target_dim) throw DomainError("target vector has the wrong dimension");
  std::vector<double> z(y.begin(), y.end());
  double log_jacobian = 0.0;
  if (forest.standardizer) {
    z = forest.standardizer->apply(y);
    log_jacobian = forest.standardizer->log_scale_sum();
  }
  std::vector<double> per_tree;
  per_tree.reserve(forest.trees.size());
  for (const Tree& tree : forest.trees)
    per_tree.push_back(kde_log_density(std::get<KdeLeaf>(tree.nodes[tree.route(x)]), z));
  const double count = static_cast<double>(per_tree.size());
  double combined = 0.0;
  if (forest.config.averaging == DensityAveraging::Mixture) {
    combined = log_sum_exp(per_tree) - std::log(count);
  } else {
    for (double v : per_tree) combined += v;
    combined /= count;
  }
  return combined - log_jacobian;
}

}  // namespace infogain
