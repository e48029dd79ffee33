// Versioned JSON model documents.

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "infogain/error.hpp"
#include "infogain/forest.hpp"
#include "infogain/numerics.hpp"

namespace infogain {

using json = nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) rows.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
  return rows;
}

json node_to_json(const Tree& tree, std::size_t id) {
  return std::visit(
      [&](const auto& node) -> json {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, InternalNode>) {
          return {{"feature", node.split.feature},
                  {"threshold", node.split.threshold},
                  {"left", node_to_json(tree, node.left)},
                  {"right", node_to_json(tree, node.right)}};
        } else if constexpr (std::is_same_v<T, ClassLeaf>) {
          return {{"leaf", {{"label", node.label}}}};
        } else {
          return {{"leaf",
                   {{"targets", matrix_to_json(node.targets)},
                    {"mean", node.mean},
                    {"bandwidth", matrix_to_json(node.bandwidth)},
                    {"log_det_bandwidth", node.log_det_bandwidth},
                    {"floored", node.floored}}}};
        }
      },
      tree.nodes[id]);
}

const char* averaging_name(DensityAveraging a) {
  return a == DensityAveraging::Mixture ? "mixture" : "average-log-likelihood";
}

// Reader that reports the JSON pointer of the offending field.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError("model document: " + what + " at '" + (path_.empty() ? "/" : path_) + "'");
  }

  Reader at(const std::string& key) const {
    if (!j_.is_object()) fail("expected an object");
    const auto it = j_.find(key);
    if (it == j_.end()) Reader(j_, path_ + "/" + key).fail("missing field");
    return Reader(*it, path_ + "/" + key);
  }
  Reader at(std::size_t i) const {
    if (!j_.is_array() || i >= j_.size()) fail("index out of range");
    return Reader(j_[i], path_ + "/" + std::to_string(i));
  }
  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }
  bool is_null() const { return j_.is_null(); }
  std::size_t size() const {
    if (!j_.is_array()) fail("expected an array");
    return j_.size();
  }

  double number() const {
    if (!j_.is_number()) fail("expected a number");
    return j_.get<double>();
  }
  std::uint64_t unsigned_integer() const {
    if (!j_.is_number_unsigned()) fail("expected a non-negative integer");
    return j_.get<std::uint64_t>();
  }
  bool boolean() const {
    if (!j_.is_boolean()) fail("expected a boolean");
    return j_.get<bool>();
  }
  std::string string() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }
  std::vector<double> numbers() const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i).number();
    return out;
  }
  Matrix matrix(std::size_t cols) const {
    Matrix m(0, cols);
    for (std::size_t i = 0; i < size(); ++i) {
      const auto row = at(i).numbers();
      if (row.size() != cols) at(i).fail("row has the wrong length");
      m.append_row(row);
    }
    return m;
  }

  const std::string& path() const { return path_; }

 private:
  const json& j_;
  std::string path_;
};

std::size_t read_node(const Reader& r, Tree& tree, const Forest& forest, std::size_t depth) {
  if (depth > 100000) r.fail("tree too deep");
  const std::size_t id = tree.nodes.size();
  tree.nodes.emplace_back(ClassLeaf{});
  if (r.has("leaf")) {
    const Reader leaf = r.at("leaf");
    if (forest.task == Task::Classification) {
      const auto label = leaf.at("label").unsigned_integer();
      if (label >= forest.n_classes) leaf.at("label").fail("class label out of range");
      tree.nodes[id] = ClassLeaf{static_cast<std::size_t>(label)};
    } else {
      KdeLeaf kde;
      const std::size_t d = forest.target_dim;
      kde.targets = leaf.at("targets").matrix(d);
      if (kde.targets.rows() == 0) leaf.at("targets").fail("leaf has no samples");
      kde.mean = leaf.at("mean").numbers();
      if (kde.mean.size() != d) leaf.at("mean").fail("wrong dimension");
      kde.bandwidth = leaf.at("bandwidth").matrix(d);
      if (kde.bandwidth.rows() != d) leaf.at("bandwidth").fail("bandwidth must be square");
      kde.log_det_bandwidth = leaf.at("log_det_bandwidth").number();
      kde.floored = leaf.at("floored").boolean();
      try {
        kde.bandwidth_inverse = spd_inverse(kde.bandwidth);
      } catch (const Error&) {
        leaf.at("bandwidth").fail("bandwidth is not symmetric positive definite");
      }
      tree.nodes[id] = std::move(kde);
    }
    return id;
  }
  InternalNode node;
  const auto feature = r.at("feature").unsigned_integer();
  if (feature >= forest.n_features) r.at("feature").fail("feature index out of range");
  node.split = {static_cast<std::size_t>(feature), r.at("threshold").number()};
  node.left = static_cast<std::uint32_t>(read_node(r.at("left"), tree, forest, depth + 1));
  node.right = static_cast<std::uint32_t>(read_node(r.at("right"), tree, forest, depth + 1));
  tree.nodes[id] = node;
  return id;
}

}  // namespace

std::string serialize(const Forest& forest) {
  const TrainConfig& c = forest.config;
  json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["task"] = to_string(forest.task);
  doc["n_features"] = forest.n_features;
  doc["feature_names"] = forest.feature_names;
  if (forest.task == Task::Classification) {
    doc["n_classes"] = forest.n_classes;
    doc["label_names"] = forest.label_names;
    doc["standardizer"] = nullptr;
  } else {
    doc["target_dim"] = forest.target_dim;
    doc["standardizer"] = forest.standardizer
                              ? json{{"mean", forest.standardizer->mean()}, {"scale", forest.standardizer->scale()}}
                              : json(nullptr);
  }
  doc["config"] = {
      {"n_trees", c.n_trees},
      {"n_tests", c.n_tests},
      {"min_samples_split", c.min_samples_split},
      {"min_samples_leaf", c.min_samples_leaf},
      {"max_depth", c.max_depth ? json(*c.max_depth) : json(nullptr)},
      {"estimator",
       {{"name", c.estimator.name()},
        {"subsample_size", c.estimator.subsample_size},
        {"umvue_variant", c.estimator.umvue_variant == UmvueVariant::Centered ? "centered" : "as-printed"}}},
      {"kde_lambda", c.kde_lambda},
      {"master_seed", c.master_seed},
      {"averaging", averaging_name(c.averaging)}};
  json trees = json::array();
  for (const Tree& tree : forest.trees) trees.push_back(node_to_json(tree, 0));
  doc["trees"] = std::move(trees);
  return doc.dump(1) + "\n";
}

Forest deserialize(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("model document: ") + e.what());
  }
  const Reader root(doc, "");
  if (!doc.is_object()) root.fail("expected an object");

  const Reader version = root.at("format_version");
  {
    const json& v = doc["format_version"];
    long long value = -1;
    if (v.is_number_integer()) {
      value = v.get<long long>();
    } else if (v.is_string()) {
      try {
        value = std::stoll(v.get<std::string>());
      } catch (const std::exception&) {
        version.fail("unreadable format version");
      }
    } else {
      version.fail("unreadable format version");
    }
    if (value != kModelFormatVersion)
      throw VersionError("model document: format version " + std::to_string(value) +
                         " is not supported (reader version " + std::to_string(kModelFormatVersion) + ")");
  }

  Forest forest;
  try {
    forest.task = parse_task(root.at("task").string());
  } catch (const ConfigError&) {
    root.at("task").fail("unknown task");
  }
  forest.n_features = root.at("n_features").unsigned_integer();
  if (root.has("feature_names")) {
    const Reader names = root.at("feature_names");
    for (std::size_t i = 0; i < names.size(); ++i) forest.feature_names.push_back(names.at(i).string());
    if (!forest.feature_names.empty() && forest.feature_names.size() != forest.n_features)
      names.fail("feature name count differs from n_features");
  }
  if (forest.task == Task::Classification) {
    forest.n_classes = root.at("n_classes").unsigned_integer();
    const Reader names = root.at("label_names");
    for (std::size_t i = 0; i < names.size(); ++i) forest.label_names.push_back(names.at(i).string());
  } else {
    forest.target_dim = root.at("target_dim").unsigned_integer();
    const Reader s = root.at("standardizer");
    if (!s.is_null()) {
      auto mean = s.at("mean").numbers();
      auto scale = s.at("scale").numbers();
      if (mean.size() != forest.target_dim || scale.size() != forest.target_dim) s.fail("wrong dimension");
      try {
        forest.standardizer = Standardizer(std::move(mean), std::move(scale));
      } catch (const Error&) {
        s.at("scale").fail("scales must be positive");
      }
    }
  }

  const Reader c = root.at("config");
  TrainConfig& cfg = forest.config;
  cfg.n_trees = c.at("n_trees").unsigned_integer();
  cfg.n_tests = c.at("n_tests").unsigned_integer();
  cfg.min_samples_split = c.at("min_samples_split").unsigned_integer();
  cfg.min_samples_leaf = c.at("min_samples_leaf").unsigned_integer();
  if (!c.at("max_depth").is_null()) cfg.max_depth = c.at("max_depth").unsigned_integer();
  const Reader est = c.at("estimator");
  try {
    cfg.estimator = EstimatorKind::parse(est.at("name").string());
  } catch (const ConfigError&) {
    est.at("name").fail("unknown estimator");
  }
  cfg.estimator.subsample_size = est.at("subsample_size").unsigned_integer();
  const std::string variant = est.at("umvue_variant").string();
  if (variant != "centered" && variant != "as-printed") est.at("umvue_variant").fail("unknown variant");
  cfg.estimator.umvue_variant = variant == "centered" ? UmvueVariant::Centered : UmvueVariant::AsPrinted;
  cfg.kde_lambda = c.at("kde_lambda").number();
  cfg.master_seed = c.at("master_seed").unsigned_integer();
  const std::string averaging = c.at("averaging").string();
  if (averaging == "mixture")
    cfg.averaging = DensityAveraging::Mixture;
  else if (averaging == "average-log-likelihood")
    cfg.averaging = DensityAveraging::AverageLogLikelihood;
  else
    c.at("averaging").fail("unknown averaging");

  const Reader trees = root.at("trees");
  if (trees.size() == 0) trees.fail("forest has no trees");
  for (std::size_t t = 0; t < trees.size(); ++t) {
    Tree tree;
    read_node(trees.at(t), tree, forest, 0);
    forest.trees.push_back(std::move(tree));
  }
  return forest;
}

void save_forest(const Forest& forest, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << serialize(forest);
}

Forest load_forest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return deserialize(buffer.str());
}

}  // namespace infogain
