#pragma once

// Labeled graph datasets on disk, train/validation/test splits, and the
// neighbor-label homophily statistic.
//
// File formats (all plain text, UTF-8, '#' starts a comment line):
//   edges     one "u<TAB>v" pair of 0-based node ids per line (any
//             whitespace accepted when reading)
//   features  one node per line, values separated by commas; row i is node i
//   labels    one integer class id per line, classes are 0..L-1
//   manifest  "name.key = value" lines with keys edges, features, labels
//             (paths, relative to the manifest) and optional nodes, edges_count,
//             features_count, classes, homophily (expected values)

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "asgc/error.hpp"
#include "asgc/graph.hpp"
#include "asgc/logistic.hpp"
#include "asgc/rng.hpp"

namespace asgc {

struct LabeledDataset {
  std::string name;
  Graph graph;
  FeatureMatrix features;
  std::vector<Label> labels;

  std::size_t num_nodes() const { return graph.num_nodes(); }
  int num_classes() const {
    return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  }
};

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + path.string());
  return std::move(ss).str();
}

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// Calls fn(line, line_number) for each non-blank, non-comment line.
template <class Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto end = text.find('\n');
    const auto raw = text.substr(0, end);
    ++line_no;
    const auto line = trim(raw);
    if (!line.empty() && line.front() != '#') fn(line, line_no);
    if (end == std::string_view::npos) break;
    text.remove_prefix(end + 1);
  }
}

template <class T>
T parse_number(std::string_view token, const std::filesystem::path& path, std::size_t line) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  T value{};
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(path.string() + ":" + std::to_string(line) + ": invalid number '" +
                     std::string(token) + "'");
  }
  return value;
}

}  // namespace detail

inline std::vector<Edge> read_edge_list(const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  std::vector<Edge> edges;
  detail::for_each_line(text, [&](std::string_view line, std::size_t no) {
    const auto split = line.find_first_of(" \t,");
    if (split == std::string_view::npos) {
      throw ParseError(path.string() + ":" + std::to_string(no) + ": expected two node ids");
    }
    const auto u = detail::parse_number<NodeId>(line.substr(0, split), path, no);
    const auto v = detail::parse_number<NodeId>(detail::trim(line.substr(split + 1)), path, no);
    edges.emplace_back(u, v);
  });
  return edges;
}

inline FeatureMatrix read_feature_matrix(const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t width = 0;
  detail::for_each_line(text, [&](std::string_view line, std::size_t no) {
    std::size_t count = 0;
    for (;;) {
      const auto comma = line.find(',');
      values.push_back(detail::parse_number<double>(line.substr(0, comma), path, no));
      ++count;
      if (comma == std::string_view::npos) break;
      line.remove_prefix(comma + 1);
    }
    if (rows == 0) width = count;
    if (count != width) {
      throw ParseError(path.string() + ":" + std::to_string(no) + ": expected " +
                       std::to_string(width) + " values, found " + std::to_string(count));
    }
    ++rows;
  });
  if (rows == 0) throw ParseError(path.string() + ": no feature rows");
  FeatureMatrix x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < width; ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * width + j];
    }
  }
  if (!x.allFinite()) throw ParseError(path.string() + ": non-finite feature value");
  return x;
}

inline std::vector<Label> read_labels(const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  std::vector<Label> labels;
  detail::for_each_line(text, [&](std::string_view line, std::size_t no) {
    labels.push_back(detail::parse_number<Label>(line, path, no));
  });
  return labels;
}

/// Checks labels are 0..L-1 with every class present.
inline void validate_labels(std::span<const Label> labels) {
  if (labels.empty()) throw ParseError("labels: empty");
  const auto [lo, hi] = std::minmax_element(labels.begin(), labels.end());
  if (*lo < 0) throw ParseError("labels: negative class id " + std::to_string(*lo));
  std::vector<bool> seen(static_cast<std::size_t>(*hi) + 1, false);
  for (Label l : labels) seen[static_cast<std::size_t>(l)] = true;
  for (std::size_t c = 0; c < seen.size(); ++c) {
    if (!seen[c]) throw ParseError("labels: class " + std::to_string(c) + " has no nodes (label gap)");
  }
}

/// Loads a dataset; the node count is the number of feature rows. Edges are
/// symmetrized and deduplicated and self-loops dropped.
inline LabeledDataset load_dataset(const std::filesystem::path& edge_path,
                                   const std::filesystem::path& feature_path,
                                   const std::filesystem::path& label_path,
                                   std::string name = {}) {
  LabeledDataset ds;
  ds.name = std::move(name);
  ds.features = read_feature_matrix(feature_path);
  const auto n = static_cast<std::size_t>(ds.features.rows());
  const auto edges = read_edge_list(edge_path);
  for (const auto& [u, v] : edges) {
    if (u >= n || v >= n) {
      throw ParseError(edge_path.string() + ": node id " + std::to_string(std::max(u, v)) +
                       " out of range for " + std::to_string(n) + " nodes");
    }
  }
  ds.graph = Graph::from_edges(n, edges);
  ds.labels = read_labels(label_path);
  if (ds.labels.size() != n) {
    throw ParseError(label_path.string() + ": " + std::to_string(ds.labels.size()) +
                     " labels for " + std::to_string(n) + " nodes");
  }
  validate_labels(ds.labels);
  return ds;
}

/// Writes the three files in the formats load_dataset reads; values are
/// printed with round-trip precision.
inline void save_dataset(const LabeledDataset& ds, const std::filesystem::path& edge_path,
                         const std::filesystem::path& feature_path,
                         const std::filesystem::path& label_path) {
  auto open = [](const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot write " + p.string());
    return out;
  };
  {
    auto out = open(edge_path);
    for (const auto& [u, v] : ds.graph.edge_list()) out << u << '\t' << v << '\n';
  }
  {
    auto out = open(feature_path);
    char buf[64];
    for (Eigen::Index i = 0; i < ds.features.rows(); ++i) {
      for (Eigen::Index j = 0; j < ds.features.cols(); ++j) {
        if (j) out << ',';
        const auto res = std::to_chars(buf, buf + sizeof buf, ds.features(i, j));
        out.write(buf, res.ptr - buf);
      }
      out << '\n';
    }
  }
  {
    auto out = open(label_path);
    for (Label l : ds.labels) out << l << '\n';
  }
}

/// Mean over non-isolated nodes of the fraction of neighbors sharing the
/// node's label.
inline double homophily(const Graph& g, std::span<const Label> labels) {
  detail::require_same(g.num_nodes(), labels.size(), "homophily: labels");
  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    const auto nb = g.neighbors(i);
    if (nb.empty()) continue;
    std::size_t same = 0;
    for (NodeId j : nb) same += labels[j] == labels[i] ? 1 : 0;
    total += static_cast<double>(same) / static_cast<double>(nb.size());
    ++counted;
  }
  if (counted == 0) throw InvalidArgument("homophily: every node is isolated");
  return total / static_cast<double>(counted);
}

inline double homophily(const LabeledDataset& ds) { return homophily(ds.graph, ds.labels); }

/// Disjoint index sets, each sorted ascending.
struct SplitSpec {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;

  /// train ∪ validation, sorted.
  std::vector<std::size_t> non_test() const {
    std::vector<std::size_t> out;
    out.reserve(train.size() + validation.size());
    std::merge(train.begin(), train.end(), validation.begin(), validation.end(),
               std::back_inserter(out));
    return out;
  }

  friend bool operator==(const SplitSpec&, const SplitSpec&) = default;
};

/// Random 80/20 non-test/test split with a third of the non-test nodes held
/// out for validation: |test| = ⌊0.2n⌋, |validation| = ⌊(n − |test|)/3⌋.
inline SplitSpec make_splits(std::size_t n, std::uint64_t seed) {
  if (n < 10) throw InvalidArgument("make_splits: need at least 10 nodes");
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  Rng rng = Rng::derive(seed, {0x5911});
  rng.shuffle(perm);
  const std::size_t n_test = n / 5;
  const std::size_t n_val = (n - n_test) / 3;
  SplitSpec s;
  s.seed = seed;
  s.test.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.validation.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_test),
                      perm.begin() + static_cast<std::ptrdiff_t>(n_test + n_val));
  s.train.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_test + n_val), perm.end());
  std::sort(s.test.begin(), s.test.end());
  std::sort(s.validation.begin(), s.validation.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

/// Dataset entry of a manifest file.
struct ManifestEntry {
  std::string name;
  std::filesystem::path edges;
  std::filesystem::path features;
  std::filesystem::path labels;
  std::optional<std::size_t> nodes;
  std::optional<std::size_t> edges_count;
  std::optional<std::size_t> features_count;
  std::optional<int> classes;
  std::optional<double> homophily;
};

class Manifest {
 public:
  static Manifest parse(std::string_view text, const std::filesystem::path& base_dir,
                        const std::string& origin = "manifest") {
    Manifest m;
    const std::filesystem::path origin_path(origin);
    detail::for_each_line(text, [&](std::string_view line, std::size_t no) {
      const auto where = origin + ":" + std::to_string(no);
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ParseError(where + ": expected 'name.key = value'");
      const auto key = detail::trim(line.substr(0, eq));
      const auto value = detail::trim(line.substr(eq + 1));
      const auto dot = key.rfind('.');
      if (dot == std::string_view::npos || dot == 0 || value.empty()) {
        throw ParseError(where + ": expected 'name.key = value'");
      }
      const std::string name(key.substr(0, dot));
      const auto field = key.substr(dot + 1);
      auto& e = m.entries_[name];
      e.name = name;
      auto path = [&] {
        std::filesystem::path p{std::string(value)};
        return p.is_absolute() ? p : base_dir / p;
      };
      if (field == "edges") e.edges = path();
      else if (field == "features") e.features = path();
      else if (field == "labels") e.labels = path();
      else if (field == "nodes") e.nodes = detail::parse_number<std::size_t>(value, origin_path, no);
      else if (field == "edges_count")
        e.edges_count = detail::parse_number<std::size_t>(value, origin_path, no);
      else if (field == "features_count")
        e.features_count = detail::parse_number<std::size_t>(value, origin_path, no);
      else if (field == "classes") e.classes = detail::parse_number<int>(value, origin_path, no);
      else if (field == "homophily")
        e.homophily = detail::parse_number<double>(value, origin_path, no);
      else throw ParseError(where + ": unknown key '" + std::string(field) + "'");
    });
    for (const auto& [name, e] : m.entries_) {
      if (e.edges.empty() || e.features.empty() || e.labels.empty()) {
        throw ParseError(origin + ": dataset '" + name + "' needs edges, features and labels");
      }
    }
    return m;
  }

  static Manifest load(const std::filesystem::path& path) {
    return parse(detail::read_file(path), path.parent_path(), path.string());
  }

  const ManifestEntry& at(const std::string& name) const {
    const auto it = entries_.find(name);
    if (it == entries_.end()) throw InvalidArgument("manifest has no dataset '" + name + "'");
    return it->second;
  }
  bool contains(const std::string& name) const { return entries_.contains(name); }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [name, e] : entries_) out.push_back(name);
    return out;
  }

 private:
  std::map<std::string, ManifestEntry> entries_;
};

inline LabeledDataset load_dataset(const ManifestEntry& e) {
  return load_dataset(e.edges, e.features, e.labels, e.name);
}

/// Differences between a loaded dataset and the manifest's expected counts.
inline std::vector<std::string> check_expected(const LabeledDataset& ds, const ManifestEntry& e) {
  std::vector<std::string> out;
  auto check = [&](const char* what, std::optional<std::size_t> want, std::size_t got) {
    if (want && *want != got) {
      out.push_back(ds.name + ": expected " + std::to_string(*want) + " " + what + ", found " +
                    std::to_string(got));
    }
  };
  check("nodes", e.nodes, ds.num_nodes());
  check("edges", e.edges_count, ds.graph.num_edges());
  check("features", e.features_count, static_cast<std::size_t>(ds.features.cols()));
  if (e.classes) check("classes", static_cast<std::size_t>(*e.classes),
                       static_cast<std::size_t>(ds.num_classes()));
  return out;
}

}  // namespace asgc
