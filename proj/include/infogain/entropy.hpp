#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "infogain/matrix.hpp"
#include "infogain/rng.hpp"

namespace infogain {

/// Per-class counts h_k over a fixed set of K classes.
///
/// K is the class count of the whole problem, not the number of occupied
/// bins; it stays fixed when a node's samples are divided among children.
class ClassHistogram {
 public:
  explicit ClassHistogram(std::size_t n_classes = 0) : counts_(n_classes, 0) {}
  explicit ClassHistogram(std::vector<std::uint64_t> counts);

  static ClassHistogram from_labels(std::span<const std::size_t> labels, std::size_t n_classes);

  std::size_t classes() const noexcept { return counts_.size(); }
  std::uint64_t total() const noexcept { return total_; }
  bool empty() const noexcept { return total_ == 0; }
  std::uint64_t operator[](std::size_t k) const { return counts_[k]; }
  std::span<const std::uint64_t> counts() const noexcept { return counts_; }

  void add(std::size_t k, std::uint64_t count = 1);
  void remove(std::size_t k, std::uint64_t count = 1);

  friend bool operator==(const ClassHistogram&, const ClassHistogram&) = default;

 private:
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

enum class EstimatorTag { Naive, Miller, Grassberger, MvnPlugin, MvnDiag, MvnUmvue, OneNN };

// Centered uses the mean-centred scatter with psi((n - j)/2); AsPrinted uses
// the raw scatter sum y y^T with psi((n + 1 - j)/2) and assumes zero mean.
enum class UmvueVariant { Centered, AsPrinted };

struct EstimatorKind {
  EstimatorTag tag = EstimatorTag::Naive;
  std::size_t subsample_size = 256;  // OneNN only
  UmvueVariant umvue_variant = UmvueVariant::Centered;

  bool is_discrete() const noexcept;
  std::string name() const;
  // Accepts naive|miller|grassberger|mvn-plugin|mvn-diag|mvn-umvue|one-nn.
  static EstimatorKind parse(const std::string& name);
  void validate() const;

  friend bool operator==(const EstimatorKind&, const EstimatorKind&) = default;
};

// A differential entropy value; `degenerate` marks a clamped log-determinant
// or a clamped zero neighbour distance.
struct Estimate {
  double value = 0.0;
  bool degenerate = false;
};

// Smallest sample count the estimator accepts for d-dimensional targets.
std::size_t min_samples(const EstimatorKind& kind, std::size_t d = 1);

// Plug-in estimate ln n - (1/n) sum h_k ln h_k.
double naive_entropy(const ClassHistogram& h);
// Plug-in plus the first-order bias term (K - 1) / (2n).
double miller_entropy(const ClassHistogram& h);
// G(h) = psi(h) + (1/2)(-1)^h (psi((h+1)/2) - psi(h/2)).
double grassberger_g(std::uint64_t h);
// ln n - (1/n) sum_{h_k > 0} h_k G(h_k).
double grassberger_entropy(const ClassHistogram& h);

Estimate mvn_plugin_entropy(const TargetMatrix& samples);
Estimate mvn_diag_entropy(const TargetMatrix& samples);
Estimate mvn_umvue_entropy(const TargetMatrix& samples,
                           UmvueVariant variant = UmvueVariant::Centered);

/// Kozachenko-Leonenko 1-NN estimate on a without-replacement subsample.
///
/// Draws min(n, subsample_size) rows from `rng` (no draws when the whole
/// sample is kept) and evaluates
///   (d/m) sum ln rho_i + ln(m - 1) + gamma + ln V_d.
/// Zero distances are clamped to 1e-12 and flag the estimate degenerate.
Estimate one_nn_entropy(const TargetMatrix& samples, Rng& rng, std::size_t subsample_size = 256);

double discrete_entropy(const ClassHistogram& h, const EstimatorKind& kind);
Estimate differential_entropy(const TargetMatrix& samples, const EstimatorKind& kind, Rng& rng);

// g = -(n_L/n) H(L) - (n_R/n) H(R). An empty side contributes exactly zero.
double split_score(const ClassHistogram& left, const ClassHistogram& right, const EstimatorKind& kind);
Estimate split_score(const TargetMatrix& left, const TargetMatrix& right, const EstimatorKind& kind,
                     Rng& rng);

// H(parent) - (n_L/n) H(L) - (n_R/n) H(R), the full estimated gain.
double estimated_information_gain(const ClassHistogram& parent, const ClassHistogram& left,
                                  const ClassHistogram& right, const EstimatorKind& kind);

/// Joint probability table p(y = k, b) for b in {L, R}.
class JointClassSplitDistribution {
 public:
  // Throws DomainError unless entries are non-negative and sum to 1 (1e-9).
  explicit JointClassSplitDistribution(std::vector<std::array<double, 2>> table);

  // p(y, b) = class_marginal[k] * (left_prob[k], 1 - left_prob[k]).
  static JointClassSplitDistribution from_conditionals(std::span<const double> class_marginal,
                                                       std::span<const double> left_prob);

  std::size_t classes() const noexcept { return table_.size(); }
  double operator()(std::size_t k, std::size_t b) const { return table_[k][b]; }
  std::span<const std::array<double, 2>> cells() const noexcept { return table_; }

 private:
  std::vector<std::array<double, 2>> table_;
};

// Exact I(y; b) = H_y - sum_b p(b) H_{y|b}.
double multinomial_info_gain_exact(const JointClassSplitDistribution& joint);

}  // namespace infogain
