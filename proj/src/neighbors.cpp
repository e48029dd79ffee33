#include "infogain/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "infogain/error.hpp"

namespace infogain {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    s += diff * diff;
  }
  return s;
}

}  // namespace

KdTree::KdTree(Matrix points, std::size_t leaf_capacity)
    : points_(std::move(points)), leaf_capacity_(std::max<std::size_t>(leaf_capacity, 1)) {
  if (points_.rows() == 0) throw InsufficientSamplesError("KdTree: no points");
  if (points_.cols() == 0) throw DomainError("KdTree: zero-dimensional points");
  if (points_.rows() >= UINT32_MAX) throw DomainError("KdTree: too many points");
  order_.resize(points_.rows());
  std::iota(order_.begin(), order_.end(), 0);
  nodes_.reserve(2 * (points_.rows() / leaf_capacity_) + 1);
  build(0, static_cast<std::uint32_t>(points_.rows()));
}

std::uint32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(Node{.begin = begin, .end = end});
  if (end - begin <= leaf_capacity_) return id;

  const std::size_t d = points_.cols();
  std::uint32_t best_dim = 0;
  double best_spread = -1.0;
  for (std::size_t k = 0; k < d; ++k) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::uint32_t i = begin; i < end; ++i) {
      const double v = points_(order_[i], k);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo > best_spread) {
      best_spread = hi - lo;
      best_dim = static_cast<std::uint32_t>(k);
    }
  }

  const std::uint32_t mid = begin + (end - begin) / 2;
  auto first = order_.begin() + begin;
  std::nth_element(first, order_.begin() + mid, order_.begin() + end,
                   [&](std::size_t a, std::size_t b) { return points_(a, best_dim) < points_(b, best_dim); });
  // Left holds coordinates <= split, right holds coordinates >= split.
  const double split = points_(order_[mid], best_dim);

  const std::uint32_t left = build(begin, mid);
  const std::uint32_t right = build(mid, end);
  Node& node = nodes_[id];
  node.left = left;
  node.right = right;
  node.dim = best_dim;
  node.split = split;
  return id;
}

std::size_t KdTree::depth() const {
  std::size_t deepest = 0;
  std::vector<std::pair<std::uint32_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [id, level] = stack.back();
    stack.pop_back();
    const Node& node = nodes_[id];
    if (node.is_leaf()) {
      deepest = std::max(deepest, level);
    } else {
      stack.emplace_back(node.left, level + 1);
      stack.emplace_back(node.right, level + 1);
    }
  }
  return deepest;
}

void KdTree::for_each_point(const std::function<void(std::size_t)>& visit) const {
  std::vector<std::uint32_t> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (node.is_leaf()) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) visit(order_[i]);
    } else {
      stack.push_back(node.right);
      stack.push_back(node.left);
    }
  }
}

void KdTree::search(std::uint32_t id, std::span<const double> query, std::size_t self,
                    double& best_sq) const {
  const Node& node = nodes_[id];
  if (node.is_leaf()) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::size_t j = order_[i];
      if (j == self) continue;
      best_sq = std::min(best_sq, squared_distance(points_.row(j), query));
    }
    return;
  }
  const double diff = query[node.dim] - node.split;
  const std::uint32_t near = diff <= 0.0 ? node.left : node.right;
  const std::uint32_t far = diff <= 0.0 ? node.right : node.left;
  search(near, query, self, best_sq);
  if (diff * diff <= best_sq) search(far, query, self, best_sq);
}

double KdTree::nearest_distance_excluding(std::size_t i) const {
  if (points_.rows() < 2) throw InsufficientSamplesError("nearest neighbour needs at least two points");
  double best_sq = std::numeric_limits<double>::infinity();
  search(0, points_.row(i), i, best_sq);
  return std::sqrt(best_sq);
}

std::vector<double> KdTree::all_1nn_distances() const {
  if (points_.rows() < 2) throw InsufficientSamplesError("all_1nn_distances: need at least two points");
  std::vector<double> rho(points_.rows());
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = nearest_distance_excluding(i);
  return rho;
}

std::vector<double> all_1nn_distances(const Matrix& points) {
  if (points.rows() < 2) throw InsufficientSamplesError("all_1nn_distances: need at least two points");
  return KdTree(points).all_1nn_distances();
}

std::vector<double> brute_force_1nn(const Matrix& points) {
  const std::size_t n = points.rows();
  if (n < 2) throw InsufficientSamplesError("brute_force_1nn: need at least two points");
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double sq = squared_distance(points.row(i), points.row(j));
      best[i] = std::min(best[i], sq);
      best[j] = std::min(best[j], sq);
    }
  for (double& b : best) b = std::sqrt(b);
  return best;
}

}  // namespace infogain
