#pragma once

// Node-classification protocol: per-method trials on random splits, the
// validation-driven convex-combination search, K sweeps, and aggregation of
// mean accuracies as proportions of the best method per dataset.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "asgc/dataset.hpp"
#include "asgc/error.hpp"
#include "asgc/filters.hpp"
#include "asgc/logistic.hpp"
#include "asgc/parallel.hpp"
#include "asgc/rng.hpp"

namespace asgc {

enum class Method { raw, sgc, sgc1, asgc, combo };

inline constexpr Method kAllMethods[] = {Method::raw, Method::sgc, Method::sgc1, Method::asgc,
                                         Method::combo};
inline constexpr int kDefaultResolution = 3;
inline constexpr int kDefaultTrials = 10;

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::raw: return "raw";
    case Method::sgc: return "sgc";
    case Method::sgc1: return "sgc1";
    case Method::asgc: return "asgc";
    case Method::combo: return "combo";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  for (Method m : kAllMethods) {
    if (to_string(m) == s) return m;
  }
  throw InvalidArgument("unknown method '" + std::string(s) + "'");
}

/// Hop count a method actually uses; sgc1 is SGC pinned to one hop.
inline int effective_hops(Method m, int k_hops) { return m == Method::sgc1 ? 1 : k_hops; }

struct ClassifyConfig {
  LogisticConfig logistic;
  int resolution = kDefaultResolution;
  double rank_tol = kDefaultRankTol;
  unsigned threads = 1;
};

struct TrialResult {
  std::string dataset;
  Method method = Method::raw;
  int k_hops = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  double test_accuracy = 0.0;
  std::optional<ComboWeights> chosen_weights;
  std::optional<double> validation_accuracy;
};

/// Raw, SGC and ASGC feature matrices of one dataset, computed once per hop
/// count and shared read-only across splits.
class FeatureBank {
 public:
  FeatureBank(const LabeledDataset& ds, const ClassifyConfig& cfg) : ds_(&ds), cfg_(cfg) {}

  const LabeledDataset& dataset() const { return *ds_; }
  const FeatureMatrix& raw() const { return ds_->features; }

  /// Computes whatever `m` needs at `k_hops`. Not thread-safe; call before
  /// handing the bank to parallel readers.
  void prepare(Method m, int k_hops) {
    const int k = effective_hops(m, k_hops);
    if (m == Method::sgc || m == Method::sgc1 || m == Method::combo) ensure_sgc(k);
    if (m == Method::asgc || m == Method::combo) ensure_asgc(k);
  }

  const FeatureMatrix& sgc(int k_hops) const { return lookup(sgc_, k_hops, "sgc"); }
  const FeatureMatrix& asgc(int k_hops) const { return lookup(asgc_, k_hops, "asgc"); }

  /// Feature matrix a non-combo method trains on.
  const FeatureMatrix& features_for(Method m, int k_hops) const {
    switch (m) {
      case Method::raw: return raw();
      case Method::sgc:
      case Method::sgc1: return sgc(effective_hops(m, k_hops));
      case Method::asgc: return asgc(k_hops);
      case Method::combo: break;
    }
    throw InvalidArgument("features_for: combo has no single feature matrix");
  }

 private:
  void ensure_sgc(int k) {
    if (!sgc_.contains(k)) sgc_.emplace(k, sgc_filter(ds_->graph, ds_->features, k, cfg_.threads));
  }
  void ensure_asgc(int k) {
    if (!asgc_.contains(k)) {
      asgc_.emplace(k, asgc_filter(ds_->graph, ds_->features, k, cfg_.rank_tol, cfg_.threads)
                           .filtered);
    }
  }
  static const FeatureMatrix& lookup(const std::map<int, FeatureMatrix>& m, int k,
                                     const char* what) {
    const auto it = m.find(k);
    if (it == m.end()) {
      throw InvalidArgument(std::string("FeatureBank: ") + what + " features for K=" +
                            std::to_string(k) + " not prepared");
    }
    return it->second;
  }

  const LabeledDataset* ds_;
  ClassifyConfig cfg_;
  std::map<int, FeatureMatrix> sgc_;
  std::map<int, FeatureMatrix> asgc_;
};

inline Eigen::MatrixXd select_rows(const Eigen::Ref<const Eigen::MatrixXd>& x,
                                   std::span<const std::size_t> idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(idx[r]));
  }
  return out;
}

inline std::vector<Label> select_labels(std::span<const Label> y, std::span<const std::size_t> idx) {
  std::vector<Label> out(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) out[r] = y[idx[r]];
  return out;
}

struct FitScore {
  LogisticModel model;
  double accuracy = 0.0;
};

/// Trains on `train` rows and scores on `eval` rows of x.
inline FitScore fit_and_score(const Eigen::Ref<const Eigen::MatrixXd>& x, std::span<const Label> y,
                              std::span<const std::size_t> train,
                              std::span<const std::size_t> eval, const LogisticConfig& cfg) {
  FitScore out;
  out.model = fit_logistic(select_rows(x, train), select_labels(y, train), cfg);
  const auto pred = predict(out.model, select_rows(x, eval));
  out.accuracy = accuracy(pred, select_labels(y, eval));
  return out;
}

struct ComboOutcome {
  /// Winning blend retrained on train ∪ validation.
  LogisticModel classifier;
  ComboWeights weights{1, 0, 0, 1};
  double validation_accuracy = 0.0;
  /// Validation accuracy of every grid point, in simplex_grid order.
  std::vector<double> grid_validation_accuracy;
  double test_accuracy = 0.0;
};

/// Scores every blend on the simplex grid by validation accuracy of a model
/// trained on the train split, keeps the first maximum in grid order,
/// retrains it on train ∪ validation and reports test accuracy.
inline ComboOutcome combo_search(std::span<const Label> labels, const SplitSpec& split,
                                 const Eigen::Ref<const FeatureMatrix>& x_raw,
                                 const Eigen::Ref<const FeatureMatrix>& x_sgc,
                                 const Eigen::Ref<const FeatureMatrix>& x_asgc,
                                 const ClassifyConfig& cfg) {
  const auto grid = simplex_grid(cfg.resolution);
  ComboOutcome out;
  out.grid_validation_accuracy.assign(grid.size(), 0.0);
  parallel_for(
      grid.size(),
      [&](std::size_t i) {
        const FeatureMatrix x = blend(x_raw, x_sgc, x_asgc, grid[i]);
        out.grid_validation_accuracy[i] =
            fit_and_score(x, labels, split.train, split.validation, cfg.logistic).accuracy;
      },
      cfg.threads);

  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (out.grid_validation_accuracy[i] > out.grid_validation_accuracy[best]) best = i;
  }
  out.weights = grid[best];
  out.validation_accuracy = out.grid_validation_accuracy[best];

  const FeatureMatrix x = blend(x_raw, x_sgc, x_asgc, out.weights);
  auto final_fit = fit_and_score(x, labels, split.non_test(), split.test, cfg.logistic);
  out.classifier = std::move(final_fit.model);
  out.test_accuracy = final_fit.accuracy;
  return out;
}

/// One trial of one method. Non-combo methods train on train ∪ validation;
/// combo uses the validation split for its weight search. `bank` must have
/// been prepared for (method, k_hops).
inline TrialResult run_method(const FeatureBank& bank, const SplitSpec& split, Method method,
                              int k_hops, const ClassifyConfig& cfg, int trial = 0) {
  require_hops(k_hops);
  const auto& ds = bank.dataset();
  TrialResult r;
  r.dataset = ds.name;
  r.method = method;
  r.k_hops = effective_hops(method, k_hops);
  r.trial = trial;
  r.seed = split.seed;
  if (method == Method::combo) {
    auto c = combo_search(ds.labels, split, bank.raw(), bank.sgc(k_hops), bank.asgc(k_hops), cfg);
    r.test_accuracy = c.test_accuracy;
    r.chosen_weights = c.weights;
    r.validation_accuracy = c.validation_accuracy;
  } else {
    r.test_accuracy = fit_and_score(bank.features_for(method, k_hops), ds.labels,
                                    split.non_test(), split.test, cfg.logistic)
                          .accuracy;
  }
  return r;
}

/// Convenience overload that filters the features itself.
inline TrialResult run_method(const LabeledDataset& ds, const SplitSpec& split, Method method,
                              int k_hops, const ClassifyConfig& cfg = {}) {
  FeatureBank bank(ds, cfg);
  bank.prepare(method, k_hops);
  return run_method(bank, split, method, k_hops, cfg);
}

/// Split seed for a trial; every method and hop count shares it.
inline std::uint64_t trial_seed(std::uint64_t seed, int trial) {
  return Rng::derive(seed, {static_cast<std::uint64_t>(trial)}).next_u64();
}

/// Cross product of hop counts, trials and methods. Results are ordered by
/// (k, trial, method order as given).
inline std::vector<TrialResult> k_sweep(const LabeledDataset& ds, std::span<const Method> methods,
                                        std::span<const int> k_values, int trials,
                                        std::uint64_t seed, const ClassifyConfig& cfg = {}) {
  if (methods.empty() || k_values.empty()) throw InvalidArgument("k_sweep: nothing to run");
  if (trials < 1) throw InvalidArgument("k_sweep: trials must be >= 1");
  FeatureBank bank(ds, cfg);
  for (int k : k_values) {
    require_hops(k);
    for (Method m : methods) bank.prepare(m, k);
  }
  std::vector<SplitSpec> splits;
  for (int t = 0; t < trials; ++t) splits.push_back(make_splits(ds.num_nodes(), trial_seed(seed, t)));

  const std::size_t per_k = static_cast<std::size_t>(trials) * methods.size();
  std::vector<TrialResult> out(k_values.size() * per_k);
  ClassifyConfig inner = cfg;
  inner.threads = 1;
  parallel_for(
      out.size(),
      [&](std::size_t task) {
        const std::size_t ki = task / per_k;
        const std::size_t rem = task % per_k;
        const auto t = static_cast<int>(rem / methods.size());
        const Method m = methods[rem % methods.size()];
        out[task] = run_method(bank, splits[static_cast<std::size_t>(t)], m, k_values[ki], inner, t);
      },
      cfg.threads);
  return out;
}

/// `trials` random splits of every method at one hop count.
inline std::vector<TrialResult> run_trials(const LabeledDataset& ds,
                                           std::span<const Method> methods, int k_hops,
                                           int trials, std::uint64_t seed,
                                           const ClassifyConfig& cfg = {}) {
  const int ks[] = {k_hops};
  return k_sweep(ds, methods, ks, trials, seed, cfg);
}

/// name -> dataset -> accuracy, for numbers reported elsewhere and not reproduced.
using ExternalBaselines = std::map<std::string, std::map<std::string, double>>;

struct MethodAggregate {
  std::string method;
  bool reported = false;  // external baseline, not reproduced
  std::map<std::string, double> mean_accuracy;
  std::map<std::string, double> std_accuracy;
  std::map<std::string, double> proportion;
  double mean_proportion = 0.0;
  double min_proportion = 0.0;
};

struct AggregateReport {
  std::vector<std::string> datasets;
  std::vector<MethodAggregate> methods;

  const MethodAggregate& at(std::string_view name) const {
    for (const auto& m : methods) {
      if (m.method == name) return m;
    }
    throw InvalidArgument("aggregate: no method '" + std::string(name) + "'");
  }
};

/// Mean accuracy per (dataset, method) over trials, as a proportion of the
/// best mean on that dataset; then mean and minimum of those proportions per
/// method. Standard deviations are population (ddof = 0).
inline AggregateReport aggregate(std::span<const TrialResult> results,
                                 const ExternalBaselines& external = {}) {
  if (results.empty()) throw InvalidArgument("aggregate: no results");
  std::map<std::string, std::map<std::string, std::vector<double>>> acc;  // method -> ds -> values
  std::map<std::pair<std::string, std::string>, int> hops;
  std::set<std::string> datasets;
  std::vector<std::string> order;
  for (const auto& r : results) {
    const std::string name(to_string(r.method));
    if (!acc.contains(name)) order.push_back(name);
    acc[name][r.dataset].push_back(r.test_accuracy);
    datasets.insert(r.dataset);
    const auto [it, fresh] = hops.emplace(std::pair{name, r.dataset}, r.k_hops);
    if (!fresh && it->second != r.k_hops) {
      throw InvalidArgument("aggregate: method '" + name + "' mixes hop counts on '" + r.dataset + "'");
    }
  }

  AggregateReport rep;
  rep.datasets.assign(datasets.begin(), datasets.end());
  for (const auto& name : order) {
    MethodAggregate m;
    m.method = name;
    for (const auto& d : rep.datasets) {
      const auto it = acc[name].find(d);
      if (it == acc[name].end()) {
        throw InvalidArgument("aggregate: missing coverage, method '" + name + "' has no '" + d + "' results");
      }
      const auto& v = it->second;
      double mean = 0.0;
      for (double a : v) mean += a;
      mean /= static_cast<double>(v.size());
      double var = 0.0;
      for (double a : v) var += (a - mean) * (a - mean);
      m.mean_accuracy[d] = mean;
      m.std_accuracy[d] = std::sqrt(var / static_cast<double>(v.size()));
    }
    rep.methods.push_back(std::move(m));
  }
  for (const auto& [name, per_ds] : external) {
    MethodAggregate m;
    m.method = name;
    m.reported = true;
    for (const auto& d : rep.datasets) {
      const auto it = per_ds.find(d);
      if (it == per_ds.end()) {
        throw InvalidArgument("aggregate: missing coverage, baseline '" + name + "' has no '" + d + "' value");
      }
      m.mean_accuracy[d] = it->second;
    }
    rep.methods.push_back(std::move(m));
  }

  for (const auto& d : rep.datasets) {
    double best = 0.0;
    for (const auto& m : rep.methods) best = std::max(best, m.mean_accuracy.at(d));
    if (!(best > 0.0)) throw InvalidArgument("aggregate: every method scored 0 on '" + d + "'");
    for (auto& m : rep.methods) m.proportion[d] = m.mean_accuracy.at(d) / best;
  }
  for (auto& m : rep.methods) {
    double sum = 0.0;
    double lo = 1.0;
    for (const auto& d : rep.datasets) {
      sum += m.proportion[d];
      lo = std::min(lo, m.proportion[d]);
    }
    m.mean_proportion = sum / static_cast<double>(rep.datasets.size());
    m.min_proportion = lo;
  }
  return rep;
}

}  // namespace asgc
