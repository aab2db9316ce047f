// Command-line front end: synthetic denoising sweeps, feature filtering,
// node classification trials, K sweeps, aggregation and homophily.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "asgc/asgc.hpp"

namespace fs = std::filesystem;
using namespace asgc;

namespace {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kMissingFile = 3,
  kMalformedInput = 4,
  kInvalidArgument = 5,
};

struct Options {
  std::string manifest;
  std::vector<std::string> datasets;
  std::vector<std::string> methods;
  std::string out = ".";
  int k = kDefaultHops;
  int synth_k = 2;
  int resolution = kDefaultResolution;
  int trials = kDefaultTrials;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double log_ratio_min = -5.0;
  double log_ratio_max = 5.0;
  int log_ratio_steps = 21;
  std::size_t n_per_block = 500;
  double expected_degree = 10.0;
  int k_min = 1;
  int k_max = 10;
  bool svg = false;
  std::vector<std::string> inputs;
  std::string baselines;
};

fs::path output_dir(const Options& o) {
  fs::path dir(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  write_text_file(path, text);
  std::cerr << "wrote " << path.string() << '\n';
}

LabeledDataset load_named(const Manifest& m, const std::string& name) {
  auto ds = load_dataset(m.at(name));
  for (const auto& w : check_expected(ds, m.at(name))) std::cerr << "warning: " << w << '\n';
  return ds;
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<Method> out;
  for (const auto& n : names) {
    if (n == "all") {
      out.assign(std::begin(kAllMethods), std::end(kAllMethods));
      return out;
    }
    out.push_back(parse_method(n));
  }
  return out;
}

ClassifyConfig classify_config(const Options& o) {
  ClassifyConfig cfg;
  cfg.resolution = o.resolution;
  cfg.threads = o.threads;
  return cfg;
}

int run_synth(const Options& o) {
  SweepConfig cfg;
  cfg.log_ratios = linspace(o.log_ratio_min, o.log_ratio_max, o.log_ratio_steps);
  cfg.trials = o.trials;
  cfg.k_hops = o.synth_k;
  cfg.n_per_block = o.n_per_block;
  cfg.expected_degree = o.expected_degree;
  cfg.seed = o.seed;
  cfg.threads = o.threads;
  const auto reports = run_sweep(cfg);

  const auto dir = output_dir(o);
  std::ostringstream csv;
  write_synth_csv(csv, reports);
  write_file(dir / "synth.csv", csv.str());
  if (o.svg) {
    for (const bool rms : {true, false}) {
      std::vector<Series> series;
      for (const char* name : {"raw", "sgc", "asgc"}) {
        Series s{name, {}, {}};
        for (const auto& r : reports) {
          const auto& m = std::string_view(name) == "raw" ? r.raw : std::string_view(name) == "sgc" ? r.sgc : r.asgc;
          s.x.push_back(r.log_ratio);
          s.y.push_back(rms ? m.rms_deviation : m.sign_error);
        }
        series.push_back(std::move(s));
      }
      write_file(dir / (rms ? "synth_rms_deviation.svg" : "synth_sign_error.svg"),
                 svg_line_chart(series, fmt::format("Denoising, K={}", o.synth_k), "ln(p/q)",
                                rms ? "RMS deviation from community mean" : "sign error rate"));
    }
  }
  return kOk;
}

int run_filter(const Options& o) {
  const auto manifest = Manifest::load(o.manifest);
  const auto dir = output_dir(o);
  const auto methods = o.methods.empty() ? std::vector<std::string>{"asgc"} : o.methods;
  for (const auto& name : o.datasets) {
    const auto ds = load_named(manifest, name);
    for (const auto& method : methods) {
      LabeledDataset filtered = ds;
      if (method == "sgc") {
        filtered.features = sgc_filter(ds.graph, ds.features, o.k, o.threads);
      } else if (method == "asgc") {
        const auto res = asgc_filter(ds.graph, ds.features, o.k, kDefaultRankTol, o.threads);
        filtered.features = res.filtered;
        std::ostringstream coef;
        coef << "feature";
        for (int k = 1; k <= o.k; ++k) coef << ",c" << k;
        coef << ",residual_norm\n";
        for (Eigen::Index j = 0; j < res.coefficients.rows(); ++j) {
          coef << j;
          for (Eigen::Index k = 0; k < res.coefficients.cols(); ++k) coef << ',' << fixed6(res.coefficients(j, k));
          coef << ',' << fixed6(res.residual_norms(j)) << '\n';
        }
        write_file(dir / fmt::format("{}_asgc_k{}_coefficients.csv", name, o.k), coef.str());
      } else {
        throw InvalidArgument("filter: --method must be sgc or asgc, got '" + method + "'");
      }
      const auto path = dir / fmt::format("{}_{}_k{}_features.csv", name, method, o.k);
      save_dataset(filtered, dir / fmt::format("{}_edges.tsv", name), path,
                   dir / fmt::format("{}_labels.txt", name));
      std::cerr << "wrote " << path.string() << '\n';
    }
  }
  return kOk;
}

int run_classify(const Options& o) {
  const auto manifest = Manifest::load(o.manifest);
  const auto methods = parse_methods(o.methods.empty() ? std::vector<std::string>{"combo"} : o.methods);
  const auto dir = output_dir(o);
  const auto cfg = classify_config(o);
  for (const auto& name : o.datasets) {
    const auto ds = load_named(manifest, name);
    const auto results = run_trials(ds, methods, o.k, o.trials, o.seed, cfg);
    std::ostringstream csv;
    write_trials_csv(csv, results);
    write_file(dir / fmt::format("classify_{}.csv", name), csv.str());
    for (Method m : methods) {
      double mean = 0.0;
      int count = 0;
      for (const auto& r : results) {
        if (r.method == m) {
          mean += r.test_accuracy;
          ++count;
        }
      }
      std::cout << fmt::format("{} {} K={} mean_test_accuracy={:.6f} over {} trials\n", name,
                               to_string(m), effective_hops(m, o.k), mean / count, count);
    }
  }
  return kOk;
}

int run_sweep_cmd(const Options& o) {
  if (o.k_min < 1 || o.k_max < o.k_min) throw InvalidArgument("sweep: need 1 <= --k-min <= --k-max");
  const auto manifest = Manifest::load(o.manifest);
  const auto methods = parse_methods(o.methods.empty() ? std::vector<std::string>{"raw", "sgc", "asgc", "combo"}
                                                       : o.methods);
  std::vector<int> ks;
  for (int k = o.k_min; k <= o.k_max; ++k) ks.push_back(k);
  const auto dir = output_dir(o);
  for (const auto& name : o.datasets) {
    const auto ds = load_named(manifest, name);
    const auto results = k_sweep(ds, methods, ks, o.trials, o.seed, classify_config(o));
    std::ostringstream csv;
    write_trials_csv(csv, results);
    write_file(dir / fmt::format("sweep_{}.csv", name), csv.str());
    if (o.svg) {
      std::vector<Series> series;
      for (Method m : methods) {
        Series s{std::string(to_string(m)), {}, {}};
        for (int k : ks) {
          double mean = 0.0;
          int count = 0;
          for (const auto& r : results) {
            if (r.method == m && r.k_hops == effective_hops(m, k)) {
              mean += r.test_accuracy;
              ++count;
            }
          }
          s.x.push_back(k);
          s.y.push_back(mean / std::max(count, 1));
        }
        series.push_back(std::move(s));
      }
      write_file(dir / fmt::format("sweep_{}.svg", name),
                 svg_line_chart(series, name, "hops K", "mean test accuracy"));
    }
  }
  return kOk;
}

int run_aggregate(const Options& o) {
  std::vector<TrialResult> results;
  for (const auto& in : o.inputs) {
    auto part = read_trials_csv(in);
    results.insert(results.end(), part.begin(), part.end());
  }
  const ExternalBaselines baselines = o.baselines.empty() ? ExternalBaselines{} : read_baselines_csv(o.baselines);
  const auto rep = aggregate(results, baselines);
  std::ostringstream csv;
  write_aggregate_csv(csv, rep);
  write_file(output_dir(o) / "aggregate.csv", csv.str());
  for (const auto& m : rep.methods) {
    std::cout << fmt::format("{:<12} mean={:.6f} min={:.6f}{}\n", m.method, m.mean_proportion,
                             m.min_proportion, m.reported ? " (reported, not reproduced)" : "");
  }
  return kOk;
}

int run_homophily(const Options& o) {
  const auto manifest = Manifest::load(o.manifest);
  const auto names = o.datasets.empty() ? manifest.names() : o.datasets;
  for (const auto& name : names) {
    const auto ds = load_named(manifest, name);
    const double h = homophily(ds);
    std::cout << fmt::format("{} {:.6f}\n", name, h);
    if (const auto want = manifest.at(name).homophily; want && std::abs(*want - h) > 0.02) {
      std::cerr << fmt::format("warning: {} homophily {:.6f} differs from expected {:.2f}\n", name, h, *want);
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph feature filtering (SGC / ASGC / combination) and node classification"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "Output directory")->capture_default_str();
    sub->add_option("--seed", o.seed, "Base random seed")->capture_default_str();
    sub->add_option("--threads", o.threads, "Worker threads (0 = all cores)")->capture_default_str();
  };
  auto add_dataset = [&](CLI::App* sub, bool required) {
    sub->add_option("--manifest", o.manifest, "Dataset manifest file")->required();
    auto* opt = sub->add_option("--dataset", o.datasets, "Dataset name(s) from the manifest");
    if (required) opt->required();
  };
  auto add_positive = [](CLI::App* sub, const char* name, int& target, const char* help) {
    sub->add_option(name, target, help)->capture_default_str()->check(CLI::PositiveNumber);
  };

  auto* synth = app.add_subcommand("synth", "Two-block SBM denoising sweep over ln(p/q)");
  add_common(synth);
  add_positive(synth, "--k", o.synth_k, "Hops for both filters");
  add_positive(synth, "--trials", o.trials, "Graphs per grid point");
  synth->add_option("--log-ratio-min", o.log_ratio_min, "Smallest ln(p/q)")->capture_default_str();
  synth->add_option("--log-ratio-max", o.log_ratio_max, "Largest ln(p/q)")->capture_default_str();
  add_positive(synth, "--log-ratio-steps", o.log_ratio_steps, "Grid points");
  synth->add_option("--n-per-block", o.n_per_block, "Nodes per community")->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_option("--expected-degree", o.expected_degree, "Expected node degree")->capture_default_str()->check(CLI::PositiveNumber);
  synth->add_flag("--svg", o.svg, "Also write SVG line charts");

  auto* filter = app.add_subcommand("filter", "Write SGC or ASGC filtered features of a dataset");
  add_common(filter);
  add_dataset(filter, true);
  add_positive(filter, "--k", o.k, "Hops");
  filter->add_option("--method", o.methods, "sgc and/or asgc (default asgc)");

  auto* classify = app.add_subcommand("classify", "Node classification over random splits");
  add_common(classify);
  add_dataset(classify, true);
  add_positive(classify, "--k", o.k, "Hops");
  add_positive(classify, "--resolution", o.resolution, "Combination grid resolution R");
  add_positive(classify, "--trials", o.trials, "Random splits");
  classify->add_option("--method", o.methods, "raw, sgc, sgc1, asgc, combo or all (default combo)");

  auto* sweep = app.add_subcommand("sweep", "Test accuracy versus number of hops");
  add_common(sweep);
  add_dataset(sweep, true);
  add_positive(sweep, "--k-min", o.k_min, "Smallest K");
  add_positive(sweep, "--k-max", o.k_max, "Largest K");
  add_positive(sweep, "--resolution", o.resolution, "Combination grid resolution R");
  add_positive(sweep, "--trials", o.trials, "Random splits per K");
  sweep->add_option("--method", o.methods, "Methods (default raw sgc asgc combo)");
  sweep->add_flag("--svg", o.svg, "Also write an SVG line chart");

  auto* agg = app.add_subcommand("aggregate", "Accuracy as a proportion of the best method per dataset");
  add_common(agg);
  agg->add_option("--input", o.inputs, "classify/sweep CSV files")->required();
  agg->add_option("--baselines", o.baselines, "Reported baseline accuracies (method,dataset,accuracy)");

  auto* homo = app.add_subcommand("homophily", "Neighbor-label homophily H(G)");
  add_dataset(homo, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*synth) return run_synth(o);
    if (*filter) return run_filter(o);
    if (*classify) return run_classify(o);
    if (*sweep) return run_sweep_cmd(o);
    if (*agg) return run_aggregate(o);
    if (*homo) return run_homophily(o);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kMissingFile;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kMalformedInput;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalidArgument;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
