#pragma once

#include "gtsrep/linalg.hpp"

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

namespace gtsrep {

/// Undirected weighted graph on nodes 0..n-1, stored as its dense adjacency.
/// Construction enforces symmetry, a zero diagonal and nonnegative finite
/// weights.
template <class Scalar>
class Graph {
 public:
  explicit Graph(Mat<Scalar> adjacency) : w_(std::move(adjacency)) {
    if (w_.rows() != w_.cols()) throw Error("Graph: adjacency must be square");
    require_finite(w_, "Graph");
    for (Index j = 0; j < w_.cols(); ++j) {
      if (w_(j, j) != Scalar(0)) throw Error("Graph: self-loop at node " + std::to_string(j));
      for (Index i = 0; i < w_.rows(); ++i) {
        if (w_(i, j) < Scalar(0)) throw Error("Graph: negative weight");
        if (w_(i, j) != w_(j, i)) throw Error("Graph: adjacency not symmetric");
      }
    }
  }

  Index n() const { return w_.rows(); }
  const Mat<Scalar>& adjacency() const { return w_; }
  Vec<Scalar> degrees() const { return w_.rowwise().sum(); }

  /// Number of undirected edges with nonzero weight.
  Index edge_count() const {
    Index count = 0;
    for (Index j = 0; j < n(); ++j)
      for (Index i = j + 1; i < n(); ++i)
        if (w_(i, j) != Scalar(0)) ++count;
    return count;
  }

 private:
  Mat<Scalar> w_;
};

/// Node index of pixel (row, col) in a row-major h x w frame.
inline Index grid_node(Index row, Index col, Index width) { return row * width + col; }

/// Pairs (i, j), i < j, of 4-neighbours on an h x w grid.
inline std::vector<std::pair<Index, Index>> grid_edges(Index h, Index w) {
  std::vector<std::pair<Index, Index>> edges;
  edges.reserve(static_cast<std::size_t>(2 * h * w));
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      const Index i = grid_node(r, c, w);
      if (c + 1 < w) edges.emplace_back(i, grid_node(r, c + 1, w));
      if (r + 1 < h) edges.emplace_back(i, grid_node(r + 1, c, w));
    }
  }
  return edges;
}

template <class Scalar = double>
Graph<Scalar> build_grid_graph(Index h, Index w) {
  if (h < 1 || w < 1) throw Error("build_grid_graph: dimensions must be positive");
  Mat<Scalar> adj = Mat<Scalar>::Zero(h * w, h * w);
  for (auto [i, j] : grid_edges(h, w)) adj(i, j) = adj(j, i) = Scalar(1);
  return Graph<Scalar>(std::move(adj));
}

/// Grid support, weights |cov(x_i, x_j)| over the rows of `frames`
/// (one frame per row, unbiased estimator).
template <class Derived>
Graph<typename Derived::Scalar> build_semi_geometric_graph(const Eigen::MatrixBase<Derived>& frames, Index h,
                                                           Index w) {
  using Scalar = typename Derived::Scalar;
  if (frames.rows() < 2) throw Error("build_semi_geometric_graph: need at least 2 frames");
  if (h < 1 || w < 1 || frames.cols() != h * w)
    throw Error("build_semi_geometric_graph: frame length " + std::to_string(frames.cols()) +
                " does not match grid " + shape_str(h, w));
  require_finite(frames, "build_semi_geometric_graph");

  const Mat<Scalar> centered = frames.rowwise() - frames.colwise().mean();
  const Scalar denom = static_cast<Scalar>(frames.rows() - 1);
  Mat<Scalar> adj = Mat<Scalar>::Zero(h * w, h * w);
  for (auto [i, j] : grid_edges(h, w)) {
    const Scalar cov = centered.col(i).dot(centered.col(j)) / denom;
    adj(i, j) = adj(j, i) = std::abs(cov);
  }
  return Graph<Scalar>(std::move(adj));
}

/// Keeps the ceil(keep_fraction * n(n-1)/2) node pairs with largest |Pearson
/// correlation| over the rows of `series` (T x n). Ties are broken by
/// lexicographic (i, j) order.
template <class Derived>
Graph<typename Derived::Scalar> build_correlation_graph(const Eigen::MatrixBase<Derived>& series,
                                                        double keep_fraction = 0.05) {
  using Scalar = typename Derived::Scalar;
  if (series.rows() < 2) throw Error("build_correlation_graph: need at least 2 time points");
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0))
    throw Error("build_correlation_graph: keep_fraction must lie in (0, 1]");
  require_finite(series, "build_correlation_graph");

  const Index n = series.cols();
  Mat<Scalar> z = series.rowwise() - series.colwise().mean();
  for (Index i = 0; i < n; ++i) {
    const Scalar norm = z.col(i).norm();
    if (norm == Scalar(0))
      throw Error("build_correlation_graph: node " + std::to_string(i) + " has zero variance");
    z.col(i) /= norm;
  }
  const Mat<Scalar> corr = z.transpose() * z;

  struct Pair {
    Scalar weight;
    Index i, j;
  };
  std::vector<Pair> pairs;
  pairs.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      pairs.push_back({std::min<Scalar>(std::abs(corr(i, j)), Scalar(1)), i, j});

  const auto total = static_cast<double>(pairs.size());
  // The guard keeps products such as (1/3) * 3 from rounding up past an
  // integer.
  const auto keep = static_cast<std::size_t>(std::ceil(keep_fraction * total - 1e-9));
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.weight > b.weight; });

  Mat<Scalar> adj = Mat<Scalar>::Zero(n, n);
  for (std::size_t k = 0; k < keep && k < pairs.size(); ++k)
    adj(pairs[k].i, pairs[k].j) = adj(pairs[k].j, pairs[k].i) = pairs[k].weight;
  return Graph<Scalar>(std::move(adj));
}

/// Combinatorial Laplacian D - W.
template <class Scalar>
Mat<Scalar> laplacian(const Graph<Scalar>& g) {
  Mat<Scalar> l = -g.adjacency();
  l.diagonal() = g.degrees();
  return l;
}

}  // namespace gtsrep
