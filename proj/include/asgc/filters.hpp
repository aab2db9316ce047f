#pragma once

// Feature filters: the fixed low-pass SGC filter, the adaptive per-feature
// Krylov least-squares filter (ASGC), and convex blends of the two with the
// raw features.

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "asgc/error.hpp"
#include "asgc/graph.hpp"
#include "asgc/least_squares.hpp"
#include "asgc/parallel.hpp"

namespace asgc {

inline constexpr int kDefaultHops = 6;

inline void require_hops(int k_hops) {
  if (k_hops < 1) throw InvalidArgument("k_hops must be >= 1, got " + std::to_string(k_hops));
}

/// S̃^K · X by K successive propagations with the self-loop operator.
inline FeatureMatrix sgc_filter(const PropagationOperator& s_tilde,
                                const Eigen::Ref<const FeatureMatrix>& x, int k_hops,
                                unsigned threads = 1) {
  require_hops(k_hops);
  if (!s_tilde.with_self_loops()) throw InvalidArgument("sgc_filter: operator lacks self-loops");
  FeatureMatrix out = propagate(s_tilde, x, threads);
  for (int k = 1; k < k_hops; ++k) out = propagate(s_tilde, out, threads);
  return out;
}

inline FeatureMatrix sgc_filter(const Graph& g, const Eigen::Ref<const FeatureMatrix>& x,
                                int k_hops, unsigned threads = 1) {
  detail::require_same(g.num_nodes(), static_cast<std::size_t>(x.rows()), "sgc_filter: rows");
  return sgc_filter(normalized_adjacency(g, true), x, k_hops, threads);
}

struct AsgcResult {
  FeatureMatrix filtered;
  /// features x K; column k-1 multiplies S^k x.
  Eigen::MatrixXd coefficients;
  Eigen::VectorXd residual_norms;
};

/// Krylov columns S¹x … S^K x for one feature, as an n x K matrix.
inline Eigen::MatrixXd krylov_basis(const PropagationOperator& s,
                                    const Eigen::Ref<const Eigen::VectorXd>& x, int k_hops) {
  require_hops(k_hops);
  detail::require_same(s.size(), static_cast<std::size_t>(x.size()), "krylov_basis: length");
  Eigen::MatrixXd basis(x.size(), k_hops);
  s.apply(x.data(), basis.col(0).data());
  for (int k = 1; k < k_hops; ++k) s.apply(basis.col(k - 1).data(), basis.col(k).data());
  return basis;
}

/// Fits each feature independently as a combination of its 1..K-step
/// propagations under S (no self-loops, no 0-step term) and returns the
/// reconstruction. Zero columns map to zero output and zero coefficients.
inline AsgcResult asgc_filter(const PropagationOperator& s,
                              const Eigen::Ref<const FeatureMatrix>& x, int k_hops,
                              double rank_tol = kDefaultRankTol, unsigned threads = 1) {
  require_hops(k_hops);
  if (s.with_self_loops()) throw InvalidArgument("asgc_filter: operator must not have self-loops");
  detail::require_same(s.size(), static_cast<std::size_t>(x.rows()), "asgc_filter: rows");
  require_finite(x, "asgc_filter");

  AsgcResult out;
  out.filtered = FeatureMatrix::Zero(x.rows(), x.cols());
  out.coefficients = Eigen::MatrixXd::Zero(x.cols(), k_hops);
  out.residual_norms = Eigen::VectorXd::Zero(x.cols());
  parallel_for(
      static_cast<std::size_t>(x.cols()),
      [&](std::size_t c) {
        const auto j = static_cast<Eigen::Index>(c);
        const Eigen::VectorXd feature = x.col(j);
        if (feature.isZero(0.0)) return;
        const Eigen::MatrixXd basis = krylov_basis(s, feature, k_hops);
        const auto fit = least_squares(basis, feature, rank_tol);
        out.filtered.col(j) = basis * fit.coefficients;
        out.coefficients.row(j) = fit.coefficients.transpose();
        out.residual_norms(j) = fit.residual_norm;
      },
      threads);
  return out;
}

inline AsgcResult asgc_filter(const Graph& g, const Eigen::Ref<const FeatureMatrix>& x,
                              int k_hops, double rank_tol = kDefaultRankTol,
                              unsigned threads = 1) {
  detail::require_same(g.num_nodes(), static_cast<std::size_t>(x.rows()), "asgc_filter: rows");
  return asgc_filter(normalized_adjacency(g, false), x, k_hops, rank_tol, threads);
}

/// Convex weights (raw, sgc, asgc) stored as integer numerators over a
/// common resolution, so they sum to one exactly.
class ComboWeights {
 public:
  ComboWeights(int raw, int sgc, int asgc, int resolution)
      : raw_(raw), sgc_(sgc), asgc_(asgc), resolution_(resolution) {
    if (resolution < 1 || raw < 0 || sgc < 0 || asgc < 0 || raw + sgc + asgc != resolution) {
      throw InvalidArgument("ComboWeights: numerators must be >= 0 and sum to the resolution");
    }
  }

  int raw_numerator() const { return raw_; }
  int sgc_numerator() const { return sgc_; }
  int asgc_numerator() const { return asgc_; }
  int resolution() const { return resolution_; }

  double raw() const { return static_cast<double>(raw_) / resolution_; }
  double sgc() const { return static_cast<double>(sgc_) / resolution_; }
  double asgc() const { return static_cast<double>(asgc_) / resolution_; }

  friend bool operator==(const ComboWeights&, const ComboWeights&) = default;

 private:
  int raw_;
  int sgc_;
  int asgc_;
  int resolution_;
};

/// w_r·X + w_s·X_SGC + w_a·X_ASGC. Corners return the selected input exactly.
inline FeatureMatrix blend(const Eigen::Ref<const FeatureMatrix>& x_raw,
                           const Eigen::Ref<const FeatureMatrix>& x_sgc,
                           const Eigen::Ref<const FeatureMatrix>& x_asgc, const ComboWeights& w) {
  if (x_raw.rows() != x_sgc.rows() || x_raw.rows() != x_asgc.rows() ||
      x_raw.cols() != x_sgc.cols() || x_raw.cols() != x_asgc.cols()) {
    throw DimensionMismatch("blend: feature matrices differ in shape");
  }
  const int r = w.resolution();
  if (w.raw_numerator() == r) return x_raw;
  if (w.sgc_numerator() == r) return x_sgc;
  if (w.asgc_numerator() == r) return x_asgc;
  FeatureMatrix out = FeatureMatrix::Zero(x_raw.rows(), x_raw.cols());
  if (w.raw_numerator() > 0) out += w.raw() * x_raw;
  if (w.sgc_numerator() > 0) out += w.sgc() * x_sgc;
  if (w.asgc_numerator() > 0) out += w.asgc() * x_asgc;
  return out;
}

/// All (R+1)(R+2)/2 lattice points of the 2-simplex at resolution R, in
/// lexicographic order of the numerators (raw, sgc, asgc).
inline std::vector<ComboWeights> simplex_grid(int resolution) {
  if (resolution < 1) throw InvalidArgument("simplex_grid: resolution must be >= 1");
  std::vector<ComboWeights> grid;
  grid.reserve(static_cast<std::size_t>((resolution + 1) * (resolution + 2) / 2));
  for (int r = 0; r <= resolution; ++r) {
    for (int s = 0; s <= resolution - r; ++s) grid.emplace_back(r, s, resolution - r - s, resolution);
  }
  return grid;
}

}  // namespace asgc
