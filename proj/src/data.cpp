#include "infogain/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

#include "infogain/error.hpp"

namespace infogain {

const char* to_string(Task task) {
  return task == Task::Classification ? "classification" : "regression";
}

Task parse_task(const std::string& name) {
  if (name == "classification") return Task::Classification;
  if (name == "regression") return Task::Regression;
  throw ConfigError("unknown task '" + name + "'");
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.task = task;
  out.features = features.select_rows(rows);
  if (task == Task::Classification) {
    out.labels.reserve(rows.size());
    for (std::size_t r : rows) out.labels.push_back(labels[r]);
  } else {
    out.targets = targets.select_rows(rows);
  }
  out.n_classes = n_classes;
  out.label_names = label_names;
  out.feature_names = feature_names;
  out.target_names = target_names;
  return out;
}

void Dataset::validate() const {
  if (task == Task::Classification) {
    if (labels.size() != features.rows()) throw DataError("dataset: label and feature row counts differ");
    for (std::size_t y : labels)
      if (y >= n_classes) throw DataError("dataset: class label out of range");
  } else {
    if (targets.rows() != features.rows()) throw DataError("dataset: target and feature row counts differ");
    if (targets.cols() == 0) throw DataError("dataset: regression targets have zero dimensions");
    for (double v : targets.data())
      if (!std::isfinite(v)) throw DataError("dataset: non-finite target value");
  }
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_number(const std::string& field, std::size_t row, std::size_t col) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  if (!field.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(value))
    throw ParseError("non-numeric cell '" + field + "'", row, col);
  return value;
}

}  // namespace

Dataset parse_csv(std::istream& in, const CsvSchema& schema) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split_fields(line);
      break;
    }
  }
  if (header.empty()) throw DataError("csv: missing header row");
  const std::size_t header_row = line_no;

  auto column_of = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  std::vector<bool> is_target(header.size(), false);
  std::vector<std::size_t> target_cols;
  for (const auto& name : schema.target_columns) {
    const auto col = column_of(name);
    if (!col) {
      if (!schema.require_targets) {
        target_cols.clear();
        break;
      }
      throw ParseError("unknown target column '" + name + "'", header_row, 0);
    }
    is_target[*col] = true;
    target_cols.push_back(*col);
  }
  if (!schema.require_targets && target_cols.size() != schema.target_columns.size()) {
    std::fill(is_target.begin(), is_target.end(), false);
    target_cols.clear();
  }
  if (target_cols.empty() && schema.require_targets) throw ConfigError("csv: no target column selected");
  if (schema.task == Task::Classification && target_cols.size() > 1)
    throw ConfigError("csv: classification takes exactly one label column");

  std::vector<std::size_t> feature_cols;
  if (schema.feature_columns.empty()) {
    for (std::size_t c = 0; c < header.size(); ++c)
      if (!is_target[c]) feature_cols.push_back(c);
  } else {
    for (const auto& name : schema.feature_columns) {
      const auto col = column_of(name);
      if (!col) throw ParseError("unknown feature column '" + name + "'", header_row, 0);
      if (is_target[*col]) throw ConfigError("csv: column '" + name + "' is both feature and target");
      feature_cols.push_back(*col);
    }
  }

  Dataset ds;
  ds.task = schema.task;
  for (std::size_t c : feature_cols) ds.feature_names.push_back(header[c]);
  for (std::size_t c : target_cols) ds.target_names.push_back(header[c]);

  std::map<std::string, std::size_t> label_index;
  for (const auto& token : schema.known_labels)
    if (label_index.try_emplace(token, ds.label_names.size()).second) ds.label_names.push_back(token);
  std::vector<double> feature_row;
  std::vector<double> target_row(target_cols.size());
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(fields.size()),
                       line_no, std::min(fields.size(), header.size()) + 1);
    feature_row.clear();
    for (std::size_t c : feature_cols) feature_row.push_back(parse_number(fields[c], line_no, c + 1));
    if (target_cols.empty()) {
    } else if (ds.task == Task::Classification) {
      const std::string& token = fields[target_cols[0]];
      if (token.empty()) throw ParseError("empty class label", line_no, target_cols[0] + 1);
      auto [it, inserted] = label_index.try_emplace(token, ds.label_names.size());
      if (inserted) ds.label_names.push_back(token);
      ds.labels.push_back(it->second);
    } else {
      for (std::size_t t = 0; t < target_cols.size(); ++t)
        target_row[t] = parse_number(fields[target_cols[t]], line_no, target_cols[t] + 1);
      ds.targets.append_row(target_row);
    }
    if (ds.features.rows() == 0 && ds.features.cols() == 0)
      ds.features = Matrix(0, feature_row.size());
    ds.features.append_row(feature_row);
  }
  if (ds.features.rows() == 0) throw DataError("csv: dataset has no rows");
  ds.n_classes = ds.label_names.size();
  if (!target_cols.empty()) ds.validate();
  return ds;
}

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  return parse_csv(in, schema);
}

Dataset concatenate(const Dataset& a, const Dataset& b) {
  if (a.task != b.task || a.n_features() != b.n_features())
    throw DataError("concatenate: incompatible datasets");
  Dataset out = a;
  for (std::size_t i = 0; i < b.size(); ++i) out.features.append_row(b.features.row(i));
  if (a.task == Task::Classification) {
    const auto& shorter = a.label_names.size() <= b.label_names.size() ? a.label_names : b.label_names;
    const auto& longer = a.label_names.size() <= b.label_names.size() ? b.label_names : a.label_names;
    if (!std::equal(shorter.begin(), shorter.end(), longer.begin()))
      throw DataError("concatenate: class label mappings differ");
    out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
    out.label_names = longer;
    out.n_classes = std::max(a.n_classes, b.n_classes);
  } else {
    for (std::size_t i = 0; i < b.size(); ++i) out.targets.append_row(b.targets.row(i));
  }
  return out;
}

BinWidths bin_widths(const Matrix& targets) {
  if (targets.rows() < 2) throw InsufficientSamplesError("bin_widths: need at least two samples");
  BinWidths out{std::vector<double>(targets.cols(), 0.0), std::vector<bool>(targets.cols(), false)};
  std::vector<double> column(targets.rows());
  for (std::size_t j = 0; j < targets.cols(); ++j) {
    for (std::size_t i = 0; i < targets.rows(); ++i) column[i] = targets(i, j);
    std::sort(column.begin(), column.end());
    double h = 0.0;
    for (std::size_t i = 1; i < column.size(); ++i) {
      const double gap = column[i] - column[i - 1];
      if (gap > 0.0 && (h == 0.0 || gap < h)) h = gap;
    }
    out.width[j] = h;
    out.constant[j] = h == 0.0;
  }
  return out;
}

bool has_duplicate_rows(const Matrix& m) {
  std::set<std::vector<double>> seen;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto r = m.row(i);
    if (!seen.emplace(r.begin(), r.end()).second) return true;
  }
  return false;
}

Dequantized dequantize(const Matrix& targets, Rng& rng) {
  Dequantized out{targets, false, {}};
  if (targets.rows() < 2 || !has_duplicate_rows(targets)) return out;
  const BinWidths bins = bin_widths(targets);
  out.applied = true;
  for (std::size_t j = 0; j < targets.cols(); ++j)
    if (bins.constant[j]) out.skipped_dims.push_back(j);
  for (std::size_t i = 0; i < targets.rows(); ++i)
    for (std::size_t j = 0; j < targets.cols(); ++j) {
      if (bins.constant[j]) continue;
      out.targets(i, j) += bins.width[j] * (rng.uniform() - 0.5);
    }
  return out;
}

Standardizer::Standardizer(std::vector<double> mean, std::vector<double> scale)
    : mean_(std::move(mean)), scale_(std::move(scale)) {
  if (mean_.size() != scale_.size()) throw DomainError("Standardizer: mean/scale size mismatch");
  for (double s : scale_)
    if (!(s > 0.0)) throw DomainError("Standardizer: scales must be positive");
}

Standardizer Standardizer::fit(const Matrix& targets) {
  const std::size_t n = targets.rows();
  if (n < 2) throw InsufficientSamplesError("Standardizer::fit: need at least two samples");
  const std::size_t d = targets.cols();
  std::vector<double> mean(d, 0.0), scale(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < n; ++i) mean[j] += targets(i, j);
    mean[j] /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dev = targets(i, j) - mean[j];
      ss += dev * dev;
    }
    scale[j] = std::max(std::sqrt(ss / static_cast<double>(n - 1)), kScaleFloor);
  }
  return Standardizer(std::move(mean), std::move(scale));
}

Matrix Standardizer::apply(const Matrix& targets) const {
  if (targets.cols() != dim()) throw DomainError("Standardizer::apply: dimension mismatch");
  Matrix out = targets;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < dim(); ++j) out(i, j) = (out(i, j) - mean_[j]) / scale_[j];
  return out;
}

Matrix Standardizer::invert(const Matrix& standardized) const {
  if (standardized.cols() != dim()) throw DomainError("Standardizer::invert: dimension mismatch");
  Matrix out = standardized;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < dim(); ++j) out(i, j) = out(i, j) * scale_[j] + mean_[j];
  return out;
}

std::vector<double> Standardizer::apply(std::span<const double> y) const {
  if (y.size() != dim()) throw DomainError("Standardizer::apply: dimension mismatch");
  std::vector<double> z(dim());
  for (std::size_t j = 0; j < dim(); ++j) z[j] = (y[j] - mean_[j]) / scale_[j];
  return z;
}

std::vector<double> Standardizer::invert(std::span<const double> z) const {
  if (z.size() != dim()) throw DomainError("Standardizer::invert: dimension mismatch");
  std::vector<double> y(dim());
  for (std::size_t j = 0; j < dim(); ++j) y[j] = z[j] * scale_[j] + mean_[j];
  return y;
}

double Standardizer::log_scale_sum() const {
  double s = 0.0;
  for (double v : scale_) s += std::log(v);
  return s;
}

namespace {

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.uniform_index(i)]);
}

std::size_t part_size(std::size_t n, double proportion, const char* name) {
  const auto size = static_cast<std::size_t>(std::llround(static_cast<double>(n) * proportion));
  if (proportion > 0.0 && size == 0)
    throw ConfigError(std::string("split: ") + name + " subset would be empty");
  return size;
}

}  // namespace

IndexSplit split_indices(std::size_t n, const Proportions& p, Rng& rng) {
  if (p.train < 0.0 || p.val < 0.0 || p.test < 0.0)
    throw ConfigError("split: proportions must be non-negative");
  const double sum = p.train + p.val + p.test;
  if (sum > 1.0 + 1e-9) throw ConfigError("split: proportions sum above one");
  const std::size_t n_train = part_size(n, p.train, "train");
  const std::size_t n_val = part_size(n, p.val, "val");
  if (n_train + n_val > n) throw ConfigError("split: proportions exceed the row count");
  std::size_t n_test = std::abs(sum - 1.0) <= 1e-9 && p.test > 0.0 ? n - n_train - n_val
                                                                    : part_size(n, p.test, "test");
  n_test = std::min(n_test, n - n_train - n_val);
  if (p.test > 0.0 && n_test == 0) throw ConfigError("split: test subset would be empty");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  shuffle(order, rng);
  IndexSplit out;
  out.train.assign(order.begin(), order.begin() + n_train);
  out.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  out.test.assign(order.begin() + n_train + n_val, order.begin() + n_train + n_val + n_test);
  return out;
}

DatasetSplit split_dataset(const Dataset& ds, const Proportions& p, Rng& rng) {
  const IndexSplit idx = split_indices(ds.size(), p, rng);
  return {ds.subset(idx.train), ds.subset(idx.val), ds.subset(idx.test)};
}

std::vector<std::size_t> subsample_without_replacement(std::size_t n, std::size_t m, Rng& rng) {
  if (m == 0) throw ConfigError("subsample size must be positive");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (n <= m) return idx;
  // Partial Fisher-Yates: the first m slots become a uniform m-subset.
  for (std::size_t i = 0; i < m; ++i) std::swap(idx[i], idx[i + rng.uniform_index(n - i)]);
  idx.resize(m);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace infogain
