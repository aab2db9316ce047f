#pragma once

// Two-community stochastic block model with a noisy ±1 feature, and the
// denoising metrics used to compare raw, SGC and ASGC features on it.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "asgc/dataset.hpp"
#include "asgc/error.hpp"
#include "asgc/filters.hpp"
#include "asgc/graph.hpp"
#include "asgc/parallel.hpp"
#include "asgc/rng.hpp"

namespace asgc {

struct SbmConfig {
  std::size_t n_per_block = 500;
  double expected_degree = 10.0;
  /// ln(p / q); negative is heterophilous.
  double log_ratio = 0.0;
  std::uint64_t seed = 0;
};

struct SbmProbabilities {
  double intra = 0.0;  // p
  double inter = 0.0;  // q
};

/// Solves p + q = expected_degree / n_per_block with p / q = e^{log_ratio}.
inline SbmProbabilities sbm_probabilities(const SbmConfig& cfg) {
  if (cfg.n_per_block < 1) throw InvalidArgument("sbm: n_per_block must be >= 1");
  if (!(cfg.expected_degree > 0.0)) throw InvalidArgument("sbm: expected_degree must be > 0");
  if (std::isnan(cfg.log_ratio)) throw InvalidArgument("sbm: log_ratio is NaN");
  const double total = cfg.expected_degree / static_cast<double>(cfg.n_per_block);
  // p = total·σ(ρ), q = total·σ(−ρ), written to stay exact at ±∞.
  SbmProbabilities pr;
  pr.intra = total / (1.0 + std::exp(-cfg.log_ratio));
  pr.inter = total / (1.0 + std::exp(cfg.log_ratio));
  if (pr.intra > 1.0 || pr.inter > 1.0) {
    throw InvalidArgument("sbm: derived edge probability exceeds 1 (p=" +
                          std::to_string(pr.intra) + ", q=" + std::to_string(pr.inter) + ")");
  }
  return pr;
}

struct SbmSample {
  Graph graph;
  Eigen::VectorXd feature;
  /// -1 for the first block, +1 for the second.
  std::vector<int> community;
};

inline SbmSample generate_sbm(const SbmConfig& cfg) {
  const auto pr = sbm_probabilities(cfg);
  const std::size_t half = cfg.n_per_block;
  const std::size_t n = 2 * half;
  Rng rng = Rng::derive(cfg.seed, {0x5b3});

  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(cfg.expected_degree * static_cast<double>(n)));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool same = (i < half) == (j < half);
      if (rng.bernoulli(same ? pr.intra : pr.inter)) {
        edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
      }
    }
  }

  SbmSample out;
  out.graph = Graph::from_edges(n, edges);
  out.feature.resize(static_cast<Eigen::Index>(n));
  out.community.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.community[i] = i < half ? -1 : 1;
    out.feature(static_cast<Eigen::Index>(i)) = out.community[i] + rng.normal();
  }
  return out;
}

struct DenoiseMetrics {
  double rms_deviation = 0.0;
  double sign_error = 0.0;
};

/// RMS distance from the community means ±1, and the fraction of nodes whose
/// value does not carry the community's sign (zero counts as wrong).
inline DenoiseMetrics denoise_metrics(const Eigen::Ref<const Eigen::VectorXd>& filtered,
                                      std::span<const int> community) {
  detail::require_same(static_cast<std::size_t>(filtered.size()), community.size(),
                       "denoise_metrics: length");
  if (community.empty()) throw InvalidArgument("denoise_metrics: empty input");
  double sq = 0.0;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < community.size(); ++i) {
    const double v = filtered(static_cast<Eigen::Index>(i));
    const double mean = community[i] < 0 ? -1.0 : 1.0;
    sq += (v - mean) * (v - mean);
    if (!(v * mean > 0.0)) ++wrong;
  }
  const auto n = static_cast<double>(community.size());
  return {std::sqrt(sq / n), static_cast<double>(wrong) / n};
}

/// Per-community means of a node feature, (minus block, plus block).
inline std::pair<double, double> community_means(const Eigen::Ref<const Eigen::VectorXd>& v,
                                                 std::span<const int> community) {
  detail::require_same(static_cast<std::size_t>(v.size()), community.size(),
                       "community_means: length");
  double sum[2] = {0.0, 0.0};
  std::size_t count[2] = {0, 0};
  for (std::size_t i = 0; i < community.size(); ++i) {
    const int b = community[i] < 0 ? 0 : 1;
    sum[b] += v(static_cast<Eigen::Index>(i));
    ++count[b];
  }
  return {count[0] ? sum[0] / static_cast<double>(count[0]) : 0.0,
          count[1] ? sum[1] / static_cast<double>(count[1]) : 0.0};
}

struct DenoiseReport {
  double log_ratio = 0.0;
  DenoiseMetrics raw;
  DenoiseMetrics sgc;
  DenoiseMetrics asgc;
  /// Trial-averaged community means (minus, plus) per method.
  std::pair<double, double> raw_means;
  std::pair<double, double> sgc_means;
  std::pair<double, double> asgc_means;
  /// Mean edge count of the sampled graphs, for degree sanity checks.
  double mean_degree = 0.0;
};

/// Raw / SGC / ASGC features of one sample.
struct FilteredSample {
  Eigen::VectorXd raw;
  Eigen::VectorXd sgc;
  Eigen::VectorXd asgc;
};

inline FilteredSample filter_sample(const SbmSample& sample, int k_hops) {
  FilteredSample out;
  out.raw = sample.feature;
  out.sgc = sgc_filter(sample.graph, sample.feature, k_hops).col(0);
  out.asgc = asgc_filter(sample.graph, sample.feature, k_hops).filtered.col(0);
  return out;
}

struct SweepConfig {
  std::vector<double> log_ratios;
  int trials = 10;
  int k_hops = 2;
  std::size_t n_per_block = 500;
  double expected_degree = 10.0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

/// Evenly spaced grid of `steps` points over [lo, hi].
inline std::vector<double> linspace(double lo, double hi, int steps) {
  if (steps < 1) throw InvalidArgument("linspace: steps must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    out[static_cast<std::size_t>(i)] =
        steps == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (steps - 1);
  }
  return out;
}

/// Metrics averaged per trial, then across trials, for each grid point. Each
/// (grid index, trial) pair owns its own random stream.
inline std::vector<DenoiseReport> run_sweep(const SweepConfig& cfg) {
  if (cfg.log_ratios.empty()) throw InvalidArgument("run_sweep: empty log-ratio grid");
  if (cfg.trials < 1) throw InvalidArgument("run_sweep: trials must be >= 1");
  require_hops(cfg.k_hops);

  const std::size_t points = cfg.log_ratios.size();
  const auto trials = static_cast<std::size_t>(cfg.trials);
  struct TrialOutcome {
    DenoiseMetrics m[3];
    std::pair<double, double> means[3];
    double degree = 0.0;
  };
  std::vector<TrialOutcome> outcomes(points * trials);
  parallel_for(
      points * trials,
      [&](std::size_t task) {
        const std::size_t g = task / trials;
        const std::size_t t = task % trials;
        SbmConfig sc;
        sc.n_per_block = cfg.n_per_block;
        sc.expected_degree = cfg.expected_degree;
        sc.log_ratio = cfg.log_ratios[g];
        sc.seed = Rng::derive(cfg.seed, {g, t}).next_u64();
        const auto sample = generate_sbm(sc);
        const auto f = filter_sample(sample, cfg.k_hops);
        auto& o = outcomes[task];
        const Eigen::VectorXd* vs[3] = {&f.raw, &f.sgc, &f.asgc};
        for (int m = 0; m < 3; ++m) {
          o.m[m] = denoise_metrics(*vs[m], sample.community);
          o.means[m] = community_means(*vs[m], sample.community);
        }
        o.degree = 2.0 * static_cast<double>(sample.graph.num_edges()) /
                   static_cast<double>(sample.graph.num_nodes());
      },
      cfg.threads);

  std::vector<DenoiseReport> reports(points);
  const double inv = 1.0 / static_cast<double>(trials);
  for (std::size_t g = 0; g < points; ++g) {
    DenoiseReport& r = reports[g];
    r.log_ratio = cfg.log_ratios[g];
    DenoiseMetrics* dst[3] = {&r.raw, &r.sgc, &r.asgc};
    std::pair<double, double>* means[3] = {&r.raw_means, &r.sgc_means, &r.asgc_means};
    for (std::size_t t = 0; t < trials; ++t) {
      const auto& o = outcomes[g * trials + t];
      for (int m = 0; m < 3; ++m) {
        dst[m]->rms_deviation += o.m[m].rms_deviation * inv;
        dst[m]->sign_error += o.m[m].sign_error * inv;
        means[m]->first += o.means[m].first * inv;
        means[m]->second += o.means[m].second * inv;
      }
      r.mean_degree += o.degree * inv;
    }
  }
  return reports;
}

struct LabeledSbmConfig {
  int classes = 3;
  std::size_t n_per_class = 100;
  double expected_degree = 10.0;
  double log_ratio = 0.0;
  int features = 16;
  /// Scale of the per-class mean vectors relative to unit feature noise.
  double signal = 0.5;
  std::uint64_t seed = 0;
};

/// Multi-class SBM with Gaussian class-mean features, for exercising the
/// classification pipeline without external data. Intra-class pairs link
/// with probability p and inter-class pairs with q, where p / q = e^{log_ratio}
/// and the expected degree is as configured.
inline LabeledDataset labeled_sbm(const LabeledSbmConfig& cfg) {
  if (cfg.classes < 2 || cfg.n_per_class < 1 || cfg.features < 1) {
    throw InvalidArgument("labeled_sbm: need >= 2 classes, >= 1 node per class and >= 1 feature");
  }
  const auto c = static_cast<std::size_t>(cfg.classes);
  const std::size_t n = c * cfg.n_per_class;
  const double intra_pairs = static_cast<double>(cfg.n_per_class - 1);
  const double inter_pairs = static_cast<double>(n - cfg.n_per_class);
  // intra_pairs·p + inter_pairs·q = expected_degree with p = e^ρ q.
  const double q = cfg.expected_degree / (intra_pairs * std::exp(cfg.log_ratio) + inter_pairs);
  const double p = q * std::exp(cfg.log_ratio);
  if (!(p <= 1.0 && q <= 1.0)) throw InvalidArgument("labeled_sbm: edge probability exceeds 1");

  Rng rng = Rng::derive(cfg.seed, {0x1abe1});
  LabeledDataset ds;
  ds.name = "labeled_sbm";
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) ds.labels[i] = static_cast<Label>(i / cfg.n_per_class);

  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (rng.bernoulli(ds.labels[i] == ds.labels[j] ? p : q)) {
        edges.emplace_back(static_cast<NodeId>(i), static_cast<NodeId>(j));
      }
    }
  }
  ds.graph = Graph::from_edges(n, edges);

  Eigen::MatrixXd means(cfg.classes, cfg.features);
  for (Eigen::Index k = 0; k < means.rows(); ++k) {
    for (Eigen::Index f = 0; f < means.cols(); ++f) means(k, f) = cfg.signal * rng.normal();
  }
  ds.features.resize(static_cast<Eigen::Index>(n), cfg.features);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    for (Eigen::Index f = 0; f < cfg.features; ++f) {
      ds.features(row, f) = means(ds.labels[i], f) + rng.normal();
    }
  }
  return ds;
}

}  // namespace asgc
