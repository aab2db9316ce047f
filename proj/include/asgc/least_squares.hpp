#pragma once

// Minimum-norm dense least squares by Householder QR with column pivoting,
// followed by a complete orthogonal decomposition when the basis is
// rank-deficient.

#include <Eigen/Dense>

#include <cmath>
#include <numeric>
#include <vector>

#include "asgc/error.hpp"

namespace asgc {

struct LeastSquaresSolution {
  Eigen::VectorXd coefficients;
  double residual_norm = 0.0;
  Eigen::Index effective_rank = 0;
};

inline constexpr double kDefaultRankTol = 1e-10;

namespace detail {

// Householder vector for x: on return x holds v (v[0] = 1 implied by scaling)
// and the function returns (beta, alpha) with (I - beta v vᵀ) x = alpha e1.
struct Reflector {
  double beta = 0.0;
  double alpha = 0.0;
};

template <class Segment>
Reflector make_reflector(Segment x) {
  Reflector r;
  const double head = x(0);
  const double tail_sq = x.size() > 1 ? x.tail(x.size() - 1).squaredNorm() : 0.0;
  if (tail_sq == 0.0) {
    r.alpha = head;
    r.beta = 0.0;
    x(0) = 1.0;
    return r;
  }
  const double norm = std::sqrt(head * head + tail_sq);
  r.alpha = head <= 0.0 ? norm : -norm;
  const double v0 = head - r.alpha;
  x.tail(x.size() - 1) /= v0;
  x(0) = 1.0;
  r.beta = -v0 / r.alpha;
  return r;
}

// Applies (I - beta v vᵀ) to each column of m.
template <class V, class M>
void apply_reflector(const V& v, double beta, M&& m) {
  if (beta == 0.0) return;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const double w = beta * v.dot(m.col(c));
    m.col(c) -= w * v;
  }
}

}  // namespace detail

/// Minimizes ‖basis·c − target‖₂. Columns whose pivoted-QR diagonal falls at
/// or below rank_tol·|R₁₁| are treated as dependent and the minimum-norm
/// minimizer is returned.
inline LeastSquaresSolution least_squares(const Eigen::Ref<const Eigen::MatrixXd>& basis,
                                          const Eigen::Ref<const Eigen::VectorXd>& target,
                                          double rank_tol = kDefaultRankTol) {
  const Eigen::Index n = basis.rows();
  const Eigen::Index k = basis.cols();
  if (n < 1 || k < 1) throw InvalidArgument("least_squares: empty basis");
  detail::require_same(static_cast<std::size_t>(n), static_cast<std::size_t>(target.size()),
                       "least_squares: target length");
  if (!basis.allFinite() || !target.allFinite()) {
    throw InvalidArgument("least_squares: non-finite input");
  }
  if (!(rank_tol >= 0.0)) throw InvalidArgument("least_squares: rank_tol must be >= 0");

  Eigen::MatrixXd a = basis;
  Eigen::VectorXd b = target;
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), Eigen::Index{0});
  Eigen::VectorXd col_norms = a.colwise().squaredNorm().transpose();

  // Pivoted QR; R overwrites the upper triangle of a.
  const Eigen::Index steps = std::min(n, k);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(steps);
  for (Eigen::Index j = 0; j < steps; ++j) {
    Eigen::Index pivot = j;
    for (Eigen::Index c = j + 1; c < k; ++c) {
      if (col_norms(c) > col_norms(pivot)) pivot = c;
    }
    if (pivot != j) {
      a.col(j).swap(a.col(pivot));
      std::swap(col_norms(j), col_norms(pivot));
      std::swap(perm[static_cast<std::size_t>(j)], perm[static_cast<std::size_t>(pivot)]);
    }
    auto v = a.col(j).segment(j, n - j);
    const auto refl = detail::make_reflector(v);
    const Eigen::VectorXd vj = v;
    detail::apply_reflector(vj, refl.beta, a.block(j, j + 1, n - j, k - j - 1));
    detail::apply_reflector(vj, refl.beta, b.segment(j, n - j));
    diag(j) = refl.alpha;
    // Recompute trailing norms exactly; k is small so this stays cheap and
    // avoids the cancellation of downdating.
    for (Eigen::Index c = j + 1; c < k; ++c) {
      col_norms(c) = j + 1 < n ? a.col(c).segment(j + 1, n - j - 1).squaredNorm() : 0.0;
    }
  }

  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(steps, k);
  for (Eigen::Index i = 0; i < steps; ++i) {
    r(i, i) = diag(i);
    for (Eigen::Index c = i + 1; c < k; ++c) r(i, c) = a(i, c);
  }

  Eigen::Index rank = 0;
  const double cutoff = steps > 0 ? rank_tol * std::abs(diag(0)) : 0.0;
  while (rank < steps && std::abs(diag(rank)) > cutoff && diag(rank) != 0.0) ++rank;

  Eigen::VectorXd z = Eigen::VectorXd::Zero(k);
  if (rank == k) {
    z = r.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(b.head(k));
  } else if (rank > 0) {
    // Min-norm solution of [R11 R12] z = y: factor [R11 R12]ᵀ = Q₂ U, solve
    // Uᵀ w = y and take z = Q₂ [w; 0].
    Eigen::MatrixXd rt = r.topRows(rank).transpose();  // k x rank
    std::vector<Eigen::VectorXd> vs;
    std::vector<double> betas;
    Eigen::VectorXd u_diag(rank);
    for (Eigen::Index j = 0; j < rank; ++j) {
      auto v = rt.col(j).segment(j, k - j);
      const auto refl = detail::make_reflector(v);
      Eigen::VectorXd vj = v;
      detail::apply_reflector(vj, refl.beta, rt.block(j, j + 1, k - j, rank - j - 1));
      u_diag(j) = refl.alpha;
      vs.push_back(std::move(vj));
      betas.push_back(refl.beta);
    }
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(rank, rank);
    for (Eigen::Index i = 0; i < rank; ++i) {
      u(i, i) = u_diag(i);
      for (Eigen::Index c = i + 1; c < rank; ++c) u(i, c) = rt(i, c);
    }
    const Eigen::VectorXd w =
        u.transpose().triangularView<Eigen::Lower>().solve(b.head(rank));
    z.head(rank) = w;
    for (Eigen::Index j = rank - 1; j >= 0; --j) {
      const auto& vj = vs[static_cast<std::size_t>(j)];
      detail::apply_reflector(vj, betas[static_cast<std::size_t>(j)], z.segment(j, k - j));
    }
  }

  LeastSquaresSolution out;
  out.coefficients = Eigen::VectorXd::Zero(k);
  for (Eigen::Index j = 0; j < k; ++j) out.coefficients(perm[static_cast<std::size_t>(j)]) = z(j);
  out.residual_norm = (basis * out.coefficients - target).norm();
  out.effective_rank = rank;
  return out;
}

}  // namespace asgc
