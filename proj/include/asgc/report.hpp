#pragma once

// CSV serialization of experiment outputs (header row, fixed column order,
// six decimals) and minimal SVG line charts.

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "asgc/dataset.hpp"
#include "asgc/error.hpp"
#include "asgc/experiments.hpp"
#include "asgc/synthetic.hpp"

namespace asgc {

inline std::string fixed6(double v) { return fmt::format("{:.6f}", v); }

inline constexpr std::string_view kSynthHeader = "log_ratio,method,metric,value";

/// One row per (log ratio, method, metric).
inline void write_synth_csv(std::ostream& out, std::span<const DenoiseReport> reports) {
  out << kSynthHeader << '\n';
  for (const auto& r : reports) {
    const std::pair<const char*, const DenoiseMetrics*> methods[] = {
        {"raw", &r.raw}, {"sgc", &r.sgc}, {"asgc", &r.asgc}};
    for (const auto& [name, m] : methods) {
      out << fixed6(r.log_ratio) << ',' << name << ",rms_deviation," << fixed6(m->rms_deviation) << '\n';
      out << fixed6(r.log_ratio) << ',' << name << ",sign_error," << fixed6(m->sign_error) << '\n';
    }
  }
}

inline constexpr std::string_view kTrialHeader =
    "dataset,method,k,trial,seed,test_accuracy,std_accuracy,w_raw,w_sgc,w_asgc";

/// One row per trial, followed per (dataset, method, k) by a "summary" row
/// holding the mean and population std of accuracy and the mean combo weights.
inline void write_trials_csv(std::ostream& out, std::span<const TrialResult> results,
                             bool summaries = true) {
  out << kTrialHeader << '\n';
  std::vector<const TrialResult*> sorted;
  for (const auto& r : results) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(), [](const TrialResult* a, const TrialResult* b) {
    return std::tuple(a->dataset, a->k_hops, static_cast<int>(a->method), a->trial) <
           std::tuple(b->dataset, b->k_hops, static_cast<int>(b->method), b->trial);
  });
  auto weights = [](const std::optional<ComboWeights>& w) {
    if (!w) return std::string(",,");
    return fixed6(w->raw()) + ',' + fixed6(w->sgc()) + ',' + fixed6(w->asgc());
  };
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j]->dataset == sorted[i]->dataset &&
           sorted[j]->k_hops == sorted[i]->k_hops && sorted[j]->method == sorted[i]->method) {
      const auto& r = *sorted[j];
      out << r.dataset << ',' << to_string(r.method) << ',' << r.k_hops << ',' << r.trial << ','
          << r.seed << ',' << fixed6(r.test_accuracy) << ",," << weights(r.chosen_weights) << '\n';
      ++j;
    }
    if (summaries) {
      const double count = static_cast<double>(j - i);
      double mean = 0.0;
      double w[3] = {0.0, 0.0, 0.0};
      bool has_w = false;
      for (std::size_t t = i; t < j; ++t) {
        mean += sorted[t]->test_accuracy / count;
        if (const auto& cw = sorted[t]->chosen_weights) {
          has_w = true;
          w[0] += cw->raw() / count;
          w[1] += cw->sgc() / count;
          w[2] += cw->asgc() / count;
        }
      }
      double var = 0.0;
      for (std::size_t t = i; t < j; ++t) {
        var += (sorted[t]->test_accuracy - mean) * (sorted[t]->test_accuracy - mean) / count;
      }
      const auto& r = *sorted[i];
      out << r.dataset << ',' << to_string(r.method) << ',' << r.k_hops << ",summary,,"
          << fixed6(mean) << ',' << fixed6(std::sqrt(var)) << ',';
      if (has_w) out << fixed6(w[0]) << ',' << fixed6(w[1]) << ',' << fixed6(w[2]);
      else out << ",,";
      out << '\n';
    }
    i = j;
  }
}

namespace detail {

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  for (;;) {
    const auto comma = line.find(',');
    out.push_back(trim(line.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace detail

/// Reads the per-trial rows back (summary rows are skipped).
inline std::vector<TrialResult> read_trials_csv(const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  std::vector<TrialResult> out;
  bool header = true;
  detail::for_each_line(text, [&](std::string_view line, std::size_t no) {
    const auto cols = detail::split_csv(line);
    if (header) {
      header = false;
      if (line != kTrialHeader) throw ParseError(path.string() + ": unexpected header");
      return;
    }
    if (cols.size() != 10) {
      throw ParseError(path.string() + ":" + std::to_string(no) + ": expected 10 columns");
    }
    if (cols[3] == "summary") return;
    TrialResult r;
    r.dataset = std::string(cols[0]);
    try {
      r.method = parse_method(cols[1]);
    } catch (const InvalidArgument& e) {
      throw ParseError(path.string() + ":" + std::to_string(no) + ": " + e.what());
    }
    r.k_hops = detail::parse_number<int>(cols[2], path, no);
    r.trial = detail::parse_number<int>(cols[3], path, no);
    r.seed = detail::parse_number<std::uint64_t>(cols[4], path, no);
    r.test_accuracy = detail::parse_number<double>(cols[5], path, no);
    out.push_back(std::move(r));
  });
  return out;
}

/// Baseline table with header "method,dataset,accuracy"; accuracies are
/// fractions in [0, 1].
inline ExternalBaselines read_baselines_csv(const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  ExternalBaselines out;
  bool header = true;
  detail::for_each_line(text, [&](std::string_view line, std::size_t no) {
    if (header) {
      header = false;
      if (line != "method,dataset,accuracy") throw ParseError(path.string() + ": unexpected header");
      return;
    }
    const auto cols = detail::split_csv(line);
    if (cols.size() != 3) throw ParseError(path.string() + ":" + std::to_string(no) + ": expected 3 columns");
    out[std::string(cols[0])][std::string(cols[1])] = detail::parse_number<double>(cols[2], path, no);
  });
  return out;
}

inline constexpr std::string_view kAggregateHeader =
    "method,source,dataset,mean_accuracy,std_accuracy,proportion";

/// Per (method, dataset) rows, then per method rows with dataset "mean" and
/// "min" carrying the aggregated proportions. Reported baselines are marked
/// "reported, not reproduced" in the source column.
inline void write_aggregate_csv(std::ostream& out, const AggregateReport& rep) {
  out << kAggregateHeader << '\n';
  for (const auto& m : rep.methods) {
    const char* source = m.reported ? "reported, not reproduced" : "measured";
    for (const auto& d : rep.datasets) {
      out << m.method << ',' << '"' << source << '"' << ',' << d << ',' << fixed6(m.mean_accuracy.at(d)) << ',';
      if (!m.reported) out << fixed6(m.std_accuracy.at(d));
      out << ',' << fixed6(m.proportion.at(d)) << '\n';
    }
    out << m.method << ',' << '"' << source << '"' << ",mean,,," << fixed6(m.mean_proportion) << '\n';
    out << m.method << ',' << '"' << source << '"' << ",min,,," << fixed6(m.min_proportion) << '\n';
  }
}

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// Line chart with one polyline per series and labeled axes.
inline std::string svg_line_chart(std::span<const Series> series, const std::string& title,
                                  const std::string& x_label, const std::string& y_label) {
  constexpr double W = 640, H = 420, L = 70, R = 130, T = 40, B = 60;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (double v : s.x) { x0 = std::min(x0, v); x1 = std::max(x1, v); }
    for (double v : s.y) { y0 = std::min(y0, v); y1 = std::max(y1, v); }
  }
  if (!(x1 > x0)) { x0 -= 1; x1 += 1; }
  if (!(y1 > y0)) { y0 -= 1; y1 += 1; }
  auto px = [&](double v) { return L + (v - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double v) { return H - B - (v - y0) / (y1 - y0) * (H - T - B); };
  static constexpr const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

  std::ostringstream o;
  o << fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="12">)", W, H) << '\n';
  o << fmt::format(R"(<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>)", W / 2, title) << '\n';
  o << fmt::format(R"(<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>)", L, H - B, W - R, H - B) << '\n';
  o << fmt::format(R"(<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>)", L, T, L, H - B) << '\n';
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0;
    const double yv = y0 + (y1 - y0) * i / 4.0;
    o << fmt::format(R"(<text x="{:.1f}" y="{}" text-anchor="middle">{:.2f}</text>)", px(xv), H - B + 16, xv) << '\n';
    o << fmt::format(R"(<text x="{}" y="{:.1f}" text-anchor="end">{:.2f}</text>)", L - 6, py(yv) + 4, yv) << '\n';
  }
  o << fmt::format(R"(<text x="{}" y="{}" text-anchor="middle">{}</text>)", (L + W - R) / 2, H - 15, x_label) << '\n';
  o << fmt::format(R"svg(<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>)svg",
                   (T + H - B) / 2, (T + H - B) / 2, y_label) << '\n';
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = colors[s % std::size(colors)];
    o << R"(<polyline fill="none" stroke=")" << color << R"(" stroke-width="2" points=")";
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      o << fmt::format("{:.1f},{:.1f} ", px(series[s].x[i]), py(series[s].y[i]));
    }
    o << "\"/>\n";
    o << fmt::format(R"(<text x="{}" y="{}" fill="{}">{}</text>)", W - R + 10, T + 18 * (s + 1), color,
                     series[s].name) << '\n';
  }
  o << "</svg>\n";
  return o.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("error writing " + path.string());
}

}  // namespace asgc
