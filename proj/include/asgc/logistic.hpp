#pragma once

// Multinomial logistic regression trained full-batch with L-BFGS on the
// L2-regularized mean cross-entropy.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "asgc/error.hpp"

namespace asgc {

using Label = int;

struct LogisticConfig {
  int max_iter = 1000;
  /// Stop once the largest gradient component falls to this value.
  double tol = 1e-5;
  /// λ in mean CE + (λ/2)‖W‖². Unset means 1 / (training rows), the scale
  /// of an unscaled ½‖W‖² penalty with unit inverse strength.
  std::optional<double> l2_strength;
  int history = 10;
};

struct LogisticModel {
  Eigen::MatrixXd weights;  // features x classes
  Eigen::VectorXd bias;     // classes
  std::vector<Label> classes;
  int iterations = 0;
  bool converged = false;

  Eigen::Index num_features() const { return weights.rows(); }
  Eigen::Index num_classes() const { return weights.cols(); }
};

namespace detail {

inline void softmax_rows(Eigen::MatrixXd& scores) {
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    auto row = scores.row(i);
    const double m = row.maxCoeff();
    row = (row.array() - m).exp();
    row /= row.sum();
  }
}

}  // namespace detail

/// Objective value and gradient at (weights, bias) for one-hot class indices.
/// Exposed for gradient checks; fit_logistic minimizes exactly this.
struct LogisticObjective {
  double value = 0.0;
  Eigen::MatrixXd grad_weights;
  Eigen::VectorXd grad_bias;
};

inline LogisticObjective logistic_objective(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                            std::span<const int> class_index,
                                            const Eigen::MatrixXd& weights,
                                            const Eigen::VectorXd& bias, double l2) {
  const auto n = x.rows();
  const double inv_n = 1.0 / static_cast<double>(n);
  Eigen::MatrixXd scores = x * weights;
  scores.rowwise() += bias.transpose();

  LogisticObjective out;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    auto row = scores.row(i);
    const double m = row.maxCoeff();
    const double lse = m + std::log((row.array() - m).exp().sum());
    loss += lse - row(class_index[static_cast<std::size_t>(i)]);
    row = (row.array() - lse).exp();
    row(class_index[static_cast<std::size_t>(i)]) -= 1.0;
  }
  out.value = loss * inv_n + 0.5 * l2 * weights.squaredNorm();
  out.grad_weights.noalias() = x.transpose() * scores;
  out.grad_weights *= inv_n;
  out.grad_weights += l2 * weights;
  out.grad_bias = scores.colwise().sum().transpose() * inv_n;
  return out;
}

/// Trains from zero initialization; deterministic for fixed inputs.
inline LogisticModel fit_logistic(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                  std::span<const Label> y, const LogisticConfig& cfg = {}) {
  detail::require_same(static_cast<std::size_t>(x.rows()), y.size(), "fit_logistic: rows");
  if (y.empty()) throw InvalidArgument("fit_logistic: empty training set");
  if (!x.allFinite()) throw InvalidArgument("fit_logistic: non-finite features");

  LogisticModel model;
  model.classes.assign(y.begin(), y.end());
  std::sort(model.classes.begin(), model.classes.end());
  model.classes.erase(std::unique(model.classes.begin(), model.classes.end()),
                      model.classes.end());
  if (model.classes.size() < 2) throw InvalidArgument("fit_logistic: single-class training set");

  std::vector<int> idx(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    idx[i] = static_cast<int>(
        std::lower_bound(model.classes.begin(), model.classes.end(), y[i]) -
        model.classes.begin());
  }

  const Eigen::Index f = x.cols();
  const auto num_classes = static_cast<Eigen::Index>(model.classes.size());
  const Eigen::Index dim = f * num_classes + num_classes;
  const double l2 = cfg.l2_strength.value_or(1.0 / static_cast<double>(x.rows()));
  if (!(l2 >= 0.0)) throw InvalidArgument("fit_logistic: l2_strength must be >= 0");

  // Parameters packed as [vec(W); b].
  auto evaluate = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
    const Eigen::MatrixXd w = Eigen::Map<const Eigen::MatrixXd>(theta.data(), f, num_classes);
    const Eigen::VectorXd b = theta.tail(num_classes);
    auto obj = logistic_objective(x, idx, w, b, l2);
    grad.resize(dim);
    grad.head(f * num_classes) = Eigen::Map<const Eigen::VectorXd>(obj.grad_weights.data(),
                                                                   f * num_classes);
    grad.tail(num_classes) = obj.grad_bias;
    return obj.value;
  };

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd grad;
  double value = evaluate(theta, grad);
  std::deque<Eigen::VectorXd> s_hist;
  std::deque<Eigen::VectorXd> y_hist;
  std::deque<double> rho_hist;

  int iter = 0;
  bool converged = grad.lpNorm<Eigen::Infinity>() <= cfg.tol;
  Eigen::VectorXd next_grad;
  while (!converged && iter < cfg.max_iter) {
    // Two-loop recursion for the search direction.
    Eigen::VectorXd q = grad;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t i = s_hist.size(); i-- > 0;) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    if (!s_hist.empty()) {
      q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    } else {
      q /= std::max(1.0, grad.norm());
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    Eigen::VectorXd direction = -q;
    double slope = grad.dot(direction);
    if (slope >= 0.0) {
      // History lost positive definiteness numerically; restart from steepest descent.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      direction = -grad / std::max(1.0, grad.norm());
      slope = grad.dot(direction);
    }

    // Armijo backtracking.
    double step = 1.0;
    double next_value = 0.0;
    Eigen::VectorXd next_theta;
    bool accepted = false;
    for (int tries = 0; tries < 60; ++tries) {
      next_theta = theta + step * direction;
      next_value = evaluate(next_theta, next_grad);
      if (std::isfinite(next_value) && next_value <= value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    ++iter;
    if (!accepted) break;

    Eigen::VectorXd s = next_theta - theta;
    Eigen::VectorXd yv = next_grad - grad;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * yv.squaredNorm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(yv));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > cfg.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    theta = std::move(next_theta);
    grad = next_grad;
    value = next_value;
    converged = grad.lpNorm<Eigen::Infinity>() <= cfg.tol;
  }

  model.weights = Eigen::Map<const Eigen::MatrixXd>(theta.data(), f, num_classes);
  model.bias = theta.tail(num_classes);
  model.iterations = iter;
  model.converged = converged;
  return model;
}

/// Class scores x·W + b.
inline Eigen::MatrixXd decision_function(const LogisticModel& model,
                                         const Eigen::Ref<const Eigen::MatrixXd>& x) {
  detail::require_same(static_cast<std::size_t>(x.cols()),
                       static_cast<std::size_t>(model.num_features()), "predict: feature width");
  Eigen::MatrixXd scores = x * model.weights;
  scores.rowwise() += model.bias.transpose();
  return scores;
}

inline Eigen::MatrixXd predict_proba(const LogisticModel& model,
                                     const Eigen::Ref<const Eigen::MatrixXd>& x) {
  Eigen::MatrixXd p = decision_function(model, x);
  detail::softmax_rows(p);
  return p;
}

/// Argmax class per row; ties go to the lowest class index.
inline std::vector<Label> predict(const LogisticModel& model,
                                  const Eigen::Ref<const Eigen::MatrixXd>& x) {
  const Eigen::MatrixXd scores = decision_function(model, x);
  std::vector<Label> out(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < scores.cols(); ++c) {
      if (scores(i, c) > scores(i, best)) best = c;
    }
    out[static_cast<std::size_t>(i)] = model.classes[static_cast<std::size_t>(best)];
  }
  return out;
}

inline double accuracy(std::span<const Label> predicted, std::span<const Label> truth) {
  detail::require_same(predicted.size(), truth.size(), "accuracy: length");
  if (truth.empty()) throw InvalidArgument("accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace asgc
