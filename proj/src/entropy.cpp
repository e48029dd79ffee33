#include "infogain/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "infogain/data.hpp"
#include "infogain/error.hpp"
#include "infogain/neighbors.hpp"
#include "infogain/numerics.hpp"

namespace infogain {

namespace {

constexpr double kMinNeighbourDistance = 1e-12;

double log_two_pi() { return std::log(2.0 * std::numbers::pi); }

void require_nonempty(const ClassHistogram& h) {
  if (h.empty()) throw InsufficientSamplesError("entropy of an empty histogram");
}

}  // namespace

ClassHistogram::ClassHistogram(std::vector<std::uint64_t> counts) : counts_(std::move(counts)) {
  for (auto c : counts_) total_ += c;
}

ClassHistogram ClassHistogram::from_labels(std::span<const std::size_t> labels, std::size_t n_classes) {
  ClassHistogram h(n_classes);
  for (std::size_t y : labels) h.add(y);
  return h;
}

void ClassHistogram::add(std::size_t k, std::uint64_t count) {
  if (k >= counts_.size()) throw DomainError("ClassHistogram: class index out of range");
  counts_[k] += count;
  total_ += count;
}

void ClassHistogram::remove(std::size_t k, std::uint64_t count) {
  if (k >= counts_.size() || counts_[k] < count) throw DomainError("ClassHistogram: count underflow");
  counts_[k] -= count;
  total_ -= count;
}

bool EstimatorKind::is_discrete() const noexcept {
  return tag == EstimatorTag::Naive || tag == EstimatorTag::Miller || tag == EstimatorTag::Grassberger;
}

std::string EstimatorKind::name() const {
  switch (tag) {
    case EstimatorTag::Naive: return "naive";
    case EstimatorTag::Miller: return "miller";
    case EstimatorTag::Grassberger: return "grassberger";
    case EstimatorTag::MvnPlugin: return "mvn-plugin";
    case EstimatorTag::MvnDiag: return "mvn-diag";
    case EstimatorTag::MvnUmvue: return "mvn-umvue";
    case EstimatorTag::OneNN: return "one-nn";
  }
  return "unknown";
}

EstimatorKind EstimatorKind::parse(const std::string& name) {
  static const std::pair<const char*, EstimatorTag> table[] = {
      {"naive", EstimatorTag::Naive},          {"miller", EstimatorTag::Miller},
      {"grassberger", EstimatorTag::Grassberger}, {"mvn-plugin", EstimatorTag::MvnPlugin},
      {"mvn-diag", EstimatorTag::MvnDiag},     {"mvn-umvue", EstimatorTag::MvnUmvue},
      {"one-nn", EstimatorTag::OneNN}};
  for (const auto& [key, tag] : table)
    if (name == key) return EstimatorKind{.tag = tag};
  throw ConfigError("unknown estimator '" + name + "'");
}

void EstimatorKind::validate() const {
  if (subsample_size < 2) throw ConfigError("estimator subsample size must be at least 2");
}

std::size_t min_samples(const EstimatorKind& kind, std::size_t d) {
  switch (kind.tag) {
    case EstimatorTag::Naive:
    case EstimatorTag::Miller:
    case EstimatorTag::Grassberger:
      return 1;
    case EstimatorTag::MvnPlugin:
    case EstimatorTag::MvnDiag:
    case EstimatorTag::OneNN:
      return 2;
    case EstimatorTag::MvnUmvue:
      return kind.umvue_variant == UmvueVariant::Centered ? d + 2 : d + 1;
  }
  return 1;
}

double naive_entropy(const ClassHistogram& h) {
  require_nonempty(h);
  const auto n = static_cast<double>(h.total());
  double sum = 0.0;
  for (auto c : h.counts())
    if (c > 0) sum += static_cast<double>(c) * std::log(static_cast<double>(c));
  // Rounding can leave the value a few ulp outside [0, ln K].
  return std::clamp(std::log(n) - sum / n, 0.0, std::log(static_cast<double>(h.classes())));
}

double miller_entropy(const ClassHistogram& h) {
  const double k = static_cast<double>(h.classes());
  return naive_entropy(h) + (k - 1.0) / (2.0 * static_cast<double>(h.total()));
}

double grassberger_g(std::uint64_t h) {
  if (h == 0) throw DomainError("grassberger_g: count must be positive");
  const auto x = static_cast<double>(h);
  const double sign = (h % 2 == 0) ? 1.0 : -1.0;
  return digamma(x) + 0.5 * sign * (digamma(0.5 * (x + 1.0)) - digamma(0.5 * x));
}

double grassberger_entropy(const ClassHistogram& h) {
  require_nonempty(h);
  const auto n = static_cast<double>(h.total());
  double sum = 0.0;
  for (auto c : h.counts())
    if (c > 0) sum += static_cast<double>(c) * grassberger_g(c);
  return std::log(n) - sum / n;
}

namespace {

Estimate gaussian_entropy_from_logdet(std::size_t d, const LogDet& ld) {
  const double dd = static_cast<double>(d);
  return {0.5 * dd * (1.0 + log_two_pi()) + 0.5 * ld.value, ld.degenerate};
}

void require_rows(const TargetMatrix& samples, std::size_t min_rows, const char* who) {
  if (samples.cols() == 0) throw DomainError(std::string(who) + ": zero-dimensional samples");
  if (samples.rows() < min_rows)
    throw InsufficientSamplesError(std::string(who) + ": need at least " + std::to_string(min_rows) +
                                   " samples");
}

}  // namespace

Estimate mvn_plugin_entropy(const TargetMatrix& samples) {
  require_rows(samples, 2, "mvn_plugin_entropy");
  return gaussian_entropy_from_logdet(samples.cols(), log_det_psd(sample_covariance(samples)));
}

Estimate mvn_diag_entropy(const TargetMatrix& samples) {
  require_rows(samples, 2, "mvn_diag_entropy");
  const Matrix c = sample_covariance(samples);
  Matrix diag(c.rows(), c.cols());
  for (std::size_t j = 0; j < c.rows(); ++j) diag(j, j) = c(j, j);
  return gaussian_entropy_from_logdet(samples.cols(), log_det_psd(diag));
}

Estimate mvn_umvue_entropy(const TargetMatrix& samples, UmvueVariant variant) {
  const std::size_t d = samples.cols();
  const bool centered = variant == UmvueVariant::Centered;
  require_rows(samples, centered ? d + 2 : d + 1, "mvn_umvue_entropy");
  const std::size_t n = samples.rows();
  const LogDet ld = log_det_psd(scatter_matrix(samples, centered ? Centering::Centered : Centering::Uncentered));
  // Degrees of freedom: n - 1 for the centred scatter, n for the raw one.
  const double dof = static_cast<double>(centered ? n - 1 : n);
  double psi_sum = 0.0;
  for (std::size_t j = 1; j <= d; ++j) psi_sum += digamma(0.5 * (dof + 1.0 - static_cast<double>(j)));
  const double dd = static_cast<double>(d);
  return {0.5 * dd * (1.0 + std::log(std::numbers::pi)) + 0.5 * ld.value - 0.5 * psi_sum, ld.degenerate};
}

Estimate one_nn_entropy(const TargetMatrix& samples, Rng& rng, std::size_t subsample_size) {
  require_rows(samples, 2, "one_nn_entropy");
  if (subsample_size < 2) throw ConfigError("one_nn_entropy: subsample size must be at least 2");
  const std::size_t d = samples.cols();
  std::vector<double> rho;
  if (samples.rows() <= subsample_size) {
    rho = all_1nn_distances(samples);
  } else {
    const auto rows = subsample_without_replacement(samples.rows(), subsample_size, rng);
    rho = all_1nn_distances(samples.select_rows(rows));
  }
  const auto m = static_cast<double>(rho.size());
  Estimate out;
  double log_sum = 0.0;
  for (double r : rho) {
    if (r < kMinNeighbourDistance) {
      r = kMinNeighbourDistance;
      out.degenerate = true;
    }
    log_sum += std::log(r);
  }
  out.value = static_cast<double>(d) / m * log_sum + std::log(m - 1.0) + kEulerGamma +
              std::log(unit_ball_volume(d));
  return out;
}

double discrete_entropy(const ClassHistogram& h, const EstimatorKind& kind) {
  switch (kind.tag) {
    case EstimatorTag::Naive: return naive_entropy(h);
    case EstimatorTag::Miller: return miller_entropy(h);
    case EstimatorTag::Grassberger: return grassberger_entropy(h);
    default:
      throw ConfigError("estimator '" + kind.name() + "' does not apply to class histograms");
  }
}

Estimate differential_entropy(const TargetMatrix& samples, const EstimatorKind& kind, Rng& rng) {
  switch (kind.tag) {
    case EstimatorTag::MvnPlugin: return mvn_plugin_entropy(samples);
    case EstimatorTag::MvnDiag: return mvn_diag_entropy(samples);
    case EstimatorTag::MvnUmvue: return mvn_umvue_entropy(samples, kind.umvue_variant);
    case EstimatorTag::OneNN: return one_nn_entropy(samples, rng, kind.subsample_size);
    default:
      throw ConfigError("estimator '" + kind.name() + "' does not apply to continuous targets");
  }
}

double split_score(const ClassHistogram& left, const ClassHistogram& right, const EstimatorKind& kind) {
  if (left.classes() != right.classes()) throw DomainError("split_score: class counts differ");
  const auto n = static_cast<double>(left.total() + right.total());
  if (n == 0.0) throw InsufficientSamplesError("split_score: both sides empty");
  double score = 0.0;
  if (!left.empty()) score -= static_cast<double>(left.total()) / n * discrete_entropy(left, kind);
  if (!right.empty()) score -= static_cast<double>(right.total()) / n * discrete_entropy(right, kind);
  return score;
}

Estimate split_score(const TargetMatrix& left, const TargetMatrix& right, const EstimatorKind& kind,
                     Rng& rng) {
  const auto n = static_cast<double>(left.rows() + right.rows());
  if (n == 0.0) throw InsufficientSamplesError("split_score: both sides empty");
  Estimate score;
  for (const TargetMatrix* side : {&left, &right}) {
    if (side->rows() == 0) continue;
    const Estimate h = differential_entropy(*side, kind, rng);
    score.value -= static_cast<double>(side->rows()) / n * h.value;
    score.degenerate = score.degenerate || h.degenerate;
  }
  return score;
}

double estimated_information_gain(const ClassHistogram& parent, const ClassHistogram& left,
                                  const ClassHistogram& right, const EstimatorKind& kind) {
  return discrete_entropy(parent, kind) + split_score(left, right, kind);
}

JointClassSplitDistribution::JointClassSplitDistribution(std::vector<std::array<double, 2>> table)
    : table_(std::move(table)) {
  if (table_.empty()) throw DomainError("joint distribution: no classes");
  double sum = 0.0;
  for (const auto& row : table_)
    for (double p : row) {
      if (!(p >= 0.0) || !std::isfinite(p)) throw DomainError("joint distribution: negative or non-finite cell");
      sum += p;
    }
  if (std::abs(sum - 1.0) > 1e-9) throw DomainError("joint distribution: cells do not sum to one");
}

JointClassSplitDistribution JointClassSplitDistribution::from_conditionals(
    std::span<const double> class_marginal, std::span<const double> left_prob) {
  if (class_marginal.size() != left_prob.size())
    throw DomainError("joint distribution: marginal and conditional sizes differ");
  std::vector<std::array<double, 2>> table(class_marginal.size());
  for (std::size_t k = 0; k < table.size(); ++k) {
    if (left_prob[k] < 0.0 || left_prob[k] > 1.0)
      throw DomainError("joint distribution: left probability outside [0, 1]");
    table[k] = {class_marginal[k] * left_prob[k], class_marginal[k] * (1.0 - left_prob[k])};
  }
  return JointClassSplitDistribution(std::move(table));
}

double multinomial_info_gain_exact(const JointClassSplitDistribution& joint) {
  auto entropy = [](auto&& probs, double total) {
    double h = 0.0;
    for (double p : probs)
      if (p > 0.0) h -= (p / total) * std::log(p / total);
    return h;
  };
  std::vector<double> marginal(joint.classes());
  std::array<std::vector<double>, 2> conditional{std::vector<double>(joint.classes()),
                                                 std::vector<double>(joint.classes())};
  std::array<double, 2> branch{0.0, 0.0};
  for (std::size_t k = 0; k < joint.classes(); ++k) {
    marginal[k] = joint(k, 0) + joint(k, 1);
    for (std::size_t b = 0; b < 2; ++b) {
      conditional[b][k] = joint(k, b);
      branch[b] += joint(k, b);
    }
  }
  double total = 0.0;
  for (double p : marginal) total += p;
  double gain = entropy(marginal, total);
  for (std::size_t b = 0; b < 2; ++b)
    if (branch[b] > 0.0) gain -= (branch[b] / total) * entropy(conditional[b], branch[b]);
  return std::max(gain, 0.0);
}

}  // namespace infogain
