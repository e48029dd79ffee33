#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "infogain/matrix.hpp"

namespace infogain {

/// k-d tree over the rows of a point matrix.
///
/// Internal nodes split on the dimension of widest spread at the median
/// coordinate; every point index lives in exactly one leaf. The tree is
/// immutable after construction and safe to query concurrently.
class KdTree {
 public:
  static constexpr std::size_t kDefaultLeafCapacity = 16;

  struct Node {
    // Leaf when left == kNone; then [begin, end) indexes into the permutation.
    static constexpr std::uint32_t kNone = UINT32_MAX;
    std::uint32_t left = kNone;
    std::uint32_t right = kNone;
    std::uint32_t dim = 0;
    double split = 0.0;
    std::uint32_t begin = 0;
    std::uint32_t end = 0;

    bool is_leaf() const noexcept { return left == kNone; }
  };

  explicit KdTree(Matrix points, std::size_t leaf_capacity = kDefaultLeafCapacity);

  const Matrix& points() const noexcept { return points_; }
  std::size_t leaf_capacity() const noexcept { return leaf_capacity_; }
  std::span<const Node> nodes() const noexcept { return nodes_; }
  // Point indices grouped by leaf; a leaf owns permutation()[begin, end).
  std::span<const std::size_t> permutation() const noexcept { return order_; }

  // Number of edges on the longest root-to-leaf path.
  std::size_t depth() const;

  // Calls visit(point_index) for every point by walking the leaves.
  void for_each_point(const std::function<void(std::size_t)>& visit) const;

  // Euclidean distance from point i to its nearest neighbour of a different
  // index. Duplicated points give 0.
  double nearest_distance_excluding(std::size_t i) const;

  std::vector<double> all_1nn_distances() const;

 private:
  std::uint32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::uint32_t node, std::span<const double> query, std::size_t self,
              double& best_sq) const;

  Matrix points_;
  std::size_t leaf_capacity_;
  std::vector<std::size_t> order_;
  std::vector<Node> nodes_;
};

// rho_i = min_{j != i} ||y_j - y_i|| for every row, via a k-d tree.
std::vector<double> all_1nn_distances(const Matrix& points);

// O(n^2) reference for all_1nn_distances.
std::vector<double> brute_force_1nn(const Matrix& points);

}  // namespace infogain
