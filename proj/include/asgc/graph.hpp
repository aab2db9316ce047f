#pragma once

// Sparse undirected graphs, normalized adjacency operators, and the
// sparse-times-dense propagation kernel shared by every filter.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "asgc/error.hpp"
#include "asgc/parallel.hpp"

namespace asgc {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

/// Dense node-by-feature matrix (column-major, one column per feature).
using FeatureMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline void require_finite(const Eigen::Ref<const Eigen::MatrixXd>& m, const char* what) {
  if (!m.allFinite()) throw InvalidArgument(std::string(what) + ": non-finite entry");
}

/// Undirected, unweighted simple graph in compressed sparse row layout.
///
/// Invariants: symmetric, no self-loops, no duplicate entries, and column
/// indices sorted ascending within each row. Immutable once built.
class Graph {
 public:
  Graph() : offsets_(1, 0) {}

  /// Builds a graph from an arbitrary edge list. Each pair is inserted in
  /// both directions, duplicates collapse to a single edge and self-loops are
  /// dropped.
  static Graph from_edges(std::size_t n, std::span<const Edge> edges) {
    std::vector<std::size_t> counts(n + 1, 0);
    for (const auto& [u, v] : edges) {
      if (u >= n || v >= n) {
        throw InvalidArgument("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                              ") out of range for " + std::to_string(n) + " nodes");
      }
      if (u == v) continue;
      ++counts[u + 1];
      ++counts[v + 1];
    }
    for (std::size_t i = 0; i < n; ++i) counts[i + 1] += counts[i];
    std::vector<NodeId> cols(counts[n]);
    std::vector<std::size_t> fill(counts.begin(), counts.end() - 1);
    for (const auto& [u, v] : edges) {
      if (u == v) continue;
      cols[fill[u]++] = v;
      cols[fill[v]++] = u;
    }
    Graph g;
    g.offsets_.assign(n + 1, 0);
    g.cols_.reserve(cols.size());
    for (std::size_t i = 0; i < n; ++i) {
      auto first = cols.begin() + static_cast<std::ptrdiff_t>(counts[i]);
      auto last = cols.begin() + static_cast<std::ptrdiff_t>(counts[i + 1]);
      std::sort(first, last);
      last = std::unique(first, last);
      g.cols_.insert(g.cols_.end(), first, last);
      g.offsets_[i + 1] = g.cols_.size();
    }
    g.cols_.shrink_to_fit();
    return g;
  }

  static Graph from_edges(std::size_t n, const std::vector<Edge>& edges) {
    return from_edges(n, std::span<const Edge>(edges));
  }

  std::size_t num_nodes() const { return offsets_.size() - 1; }
  /// Number of undirected edges.
  std::size_t num_edges() const { return cols_.size() / 2; }
  /// Number of stored (directed) entries, twice num_edges().
  std::size_t num_entries() const { return cols_.size(); }

  std::span<const NodeId> neighbors(std::size_t i) const {
    return {cols_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  std::size_t degree(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }

  bool has_edge(std::size_t i, std::size_t j) const {
    const auto nb = neighbors(i);
    return std::binary_search(nb.begin(), nb.end(), static_cast<NodeId>(j));
  }

  /// Each undirected edge once, as (u, v) with u < v, in row order.
  std::vector<Edge> edge_list() const {
    std::vector<Edge> out;
    out.reserve(num_edges());
    for (std::size_t i = 0; i < num_nodes(); ++i) {
      for (NodeId j : neighbors(i)) {
        if (i < j) out.emplace_back(static_cast<NodeId>(i), j);
      }
    }
    return out;
  }

  std::span<const std::size_t> row_offsets() const { return offsets_; }
  std::span<const NodeId> column_indices() const { return cols_; }

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> cols_;
};

/// Node degrees d = A·1.
inline std::vector<std::size_t> degrees(const Graph& g) {
  std::vector<std::size_t> d(g.num_nodes());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = g.degree(i);
  return d;
}

/// Symmetric real sparse operator with the same row-compressed layout as
/// Graph. Either S = D^{-1/2} A D^{-1/2} or, with self-loops, the same
/// normalization of A + I.
class PropagationOperator {
 public:
  std::size_t size() const { return offsets_.size() - 1; }
  bool with_self_loops() const { return self_loops_; }

  std::span<const std::size_t> row_offsets() const { return offsets_; }
  std::span<const NodeId> column_indices() const { return cols_; }
  std::span<const double> values() const { return values_; }

  /// Stored value at (i, j), or 0 when the entry is structurally absent.
  double entry(std::size_t i, std::size_t j) const {
    const auto first = cols_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]);
    const auto last = cols_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]);
    const auto it = std::lower_bound(first, last, static_cast<NodeId>(j));
    if (it == last || *it != j) return 0.0;
    return values_[static_cast<std::size_t>(it - cols_.begin())];
  }

  /// out = op · in for one column; `in` and `out` must not alias.
  void apply(const double* in, double* out) const {
    const std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t e = offsets_[i]; e < offsets_[i + 1]; ++e) acc += values_[e] * in[cols_[e]];
      out[i] = acc;
    }
  }

 private:
  friend PropagationOperator normalized_adjacency(const Graph& g, bool add_self_loops);

  std::vector<std::size_t> offsets_{0};
  std::vector<NodeId> cols_;
  std::vector<double> values_;
  bool self_loops_ = false;
};

/// Entry (i, j) = A'_ij / sqrt(d'_i d'_j) with A' = A (+ I) and d' = d (+ 1).
/// Zero-degree nodes get D^{-1/2} = 0, so their rows and columns vanish.
inline PropagationOperator normalized_adjacency(const Graph& g, bool add_self_loops) {
  const std::size_t n = g.num_nodes();
  const double loop = add_self_loops ? 1.0 : 0.0;
  std::vector<double> deg(n);
  for (std::size_t i = 0; i < n; ++i) deg[i] = static_cast<double>(g.degree(i)) + loop;
  // 1/sqrt(d_i d_j) in one rounding; symmetric because the product commutes.
  auto weight = [&](std::size_t i, std::size_t j) {
    const double d = deg[i] * deg[j];
    return d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
  };

  PropagationOperator op;
  op.self_loops_ = add_self_loops;
  op.offsets_.assign(n + 1, 0);
  const std::size_t nnz = g.num_entries() + (add_self_loops ? n : 0);
  op.cols_.reserve(nnz);
  op.values_.reserve(nnz);
  for (std::size_t i = 0; i < n; ++i) {
    bool diagonal_pending = add_self_loops;
    for (NodeId j : g.neighbors(i)) {
      if (diagonal_pending && j > i) {
        op.cols_.push_back(static_cast<NodeId>(i));
        op.values_.push_back(weight(i, i));
        diagonal_pending = false;
      }
      op.cols_.push_back(j);
      op.values_.push_back(weight(i, j));
    }
    if (diagonal_pending) {
      op.cols_.push_back(static_cast<NodeId>(i));
      op.values_.push_back(weight(i, i));
    }
    op.offsets_[i + 1] = op.cols_.size();
  }
  return op;
}

/// op · x, one sparse product per feature column. Columns are independent so
/// the result does not depend on the thread count.
inline FeatureMatrix propagate(const PropagationOperator& op,
                               const Eigen::Ref<const FeatureMatrix>& x, unsigned threads = 1) {
  detail::require_same(op.size(), static_cast<std::size_t>(x.rows()), "propagate: rows");
  FeatureMatrix out(x.rows(), x.cols());
  parallel_for(
      static_cast<std::size_t>(x.cols()),
      [&](std::size_t c) {
        const auto col = static_cast<Eigen::Index>(c);
        op.apply(x.col(col).data(), out.col(col).data());
      },
      threads);
  return out;
}

/// xᵀ(I − S)x for the normalized Laplacian. Graphs with isolated nodes are
/// rejected since the edge-sum form of the identity is undefined there.
inline double laplacian_quadratic_form(const Graph& g, const Eigen::Ref<const Vector>& x) {
  detail::require_same(g.num_nodes(), static_cast<std::size_t>(x.size()),
                       "laplacian_quadratic_form: length");
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    if (g.degree(i) == 0) {
      throw InvalidArgument("laplacian_quadratic_form: node " + std::to_string(i) +
                            " is isolated");
    }
  }
  const auto s = normalized_adjacency(g, false);
  Vector sx(x.size());
  s.apply(x.data(), sx.data());
  return x.squaredNorm() - x.dot(sx);
}

}  // namespace asgc
