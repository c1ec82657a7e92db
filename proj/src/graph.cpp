#include "attrembed/graph.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "attrembed/rng.hpp"

namespace attrembed {

namespace {

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open file: " + path);
  }
  return in;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

}  // namespace

int AttributedGraph::degree(int v) const {
  if (v < 0 || v >= n) {
    throw std::invalid_argument("degree: node id out of range");
  }
  return static_cast<int>(adjacency[v].size());
}

bool AttributedGraph::has_edge(int u, int v) const {
  if (u < 0 || u >= n || v < 0 || v >= n) {
    return false;
  }
  const auto& nbrs = adjacency[u];
  return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

bool AttributedGraph::has_labels() const {
  return std::any_of(labels.begin(), labels.end(),
                     [](int l) { return l >= 0; });
}

std::vector<int> AttributedGraph::degrees() const {
  std::vector<int> d(n);
  for (int v = 0; v < n; ++v) {
    d[v] = static_cast<int>(adjacency[v].size());
  }
  return d;
}

std::vector<int> AttributedGraph::labeled_nodes() const {
  std::vector<int> out;
  for (int v = 0; v < n; ++v) {
    if (labels[v] >= 0) {
      out.push_back(v);
    }
  }
  return out;
}

std::vector<int> AttributedGraph::component_ids() const {
  std::vector<int> comp(n, -1);
  int next = 0;
  std::vector<int> stack;
  for (int s = 0; s < n; ++s) {
    if (comp[s] >= 0) {
      continue;
    }
    comp[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int w : adjacency[u]) {
        if (comp[w] < 0) {
          comp[w] = next;
          stack.push_back(w);
        }
      }
    }
    ++next;
  }
  return comp;
}

int AttributedGraph::num_components() const {
  auto comp = component_ids();
  return comp.empty() ? 0 : 1 + *std::max_element(comp.begin(), comp.end());
}

AttributedGraph make_graph(int n, std::vector<std::pair<int, int>> raw_edges,
                           Mat attributes, std::vector<int> labels,
                           std::vector<std::string> class_names) {
  if (n <= 0) {
    throw std::invalid_argument("graph needs at least one node");
  }
  if (attributes.rows() != n) {
    throw std::invalid_argument("attribute matrix must have one row per node");
  }
  if (!labels.empty() && static_cast<int>(labels.size()) != n) {
    throw std::invalid_argument("label vector must have one entry per node");
  }

  AttributedGraph g;
  g.n = n;
  g.attributes = std::move(attributes);
  g.labels = labels.empty() ? std::vector<int>(n, -1) : std::move(labels);
  g.class_names = std::move(class_names);

  std::set<std::pair<int, int>> seen;
  for (auto [u, v] : raw_edges) {
    if (u < 0 || u >= n || v < 0 || v >= n) {
      throw std::invalid_argument("edge endpoint out of range: (" +
                                  std::to_string(u) + ", " +
                                  std::to_string(v) + ")");
    }
    if (u == v) {
      ++g.dropped_self_loops;
      continue;
    }
    if (u > v) {
      std::swap(u, v);
    }
    if (!seen.insert({u, v}).second) {
      ++g.dropped_duplicate_edges;
    }
  }
  g.edges.assign(seen.begin(), seen.end());

  g.adjacency.assign(n, {});
  for (auto [u, v] : g.edges) {
    g.adjacency[u].push_back(v);
    g.adjacency[v].push_back(u);
  }
  for (auto& nbrs : g.adjacency) {
    std::sort(nbrs.begin(), nbrs.end());
  }

  if (g.original_ids.empty()) {
    g.original_ids.resize(n);
    for (int v = 0; v < n; ++v) {
      g.original_ids[v] = std::to_string(v);
    }
  }
  return g;
}

namespace {

Mat read_attribute_matrix(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) {
      continue;
    }
    std::istringstream ss(line);
    std::vector<double> row;
    double v;
    while (ss >> v) {
      row.push_back(v);
    }
    if (!ss.eof()) {
      throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                               ": non-numeric attribute value");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::runtime_error(
          path + ": line " + std::to_string(line_no) +
          ": attribute row length " + std::to_string(row.size()) +
          " does not match first row length " +
          std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw std::runtime_error(path + ": no attribute rows");
  }
  Mat X(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows.front().size(); ++j) {
      X(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    }
  }
  return X;
}

}  // namespace

AttributedGraph load_edge_list(const std::string& edge_path,
                               const std::string& attr_path,
                               const std::string& label_path) {
  Mat X = read_attribute_matrix(attr_path);
  const int n = static_cast<int>(X.rows());

  std::ifstream in = open_or_throw(edge_path);
  std::vector<std::pair<int, int>> raw;
  std::string line;
  int line_no = 0;
  int raw_lines = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) {
      continue;
    }
    std::istringstream ss(line);
    long long u, v;
    if (!(ss >> u >> v)) {
      throw std::runtime_error(edge_path + ": line " +
                               std::to_string(line_no) +
                               ": expected \"u v\"");
    }
    if (u < 0 || u >= n || v < 0 || v >= n) {
      throw std::runtime_error(edge_path + ": line " +
                               std::to_string(line_no) + ": node id out of range [0, " +
                               std::to_string(n) + ")");
    }
    raw.emplace_back(static_cast<int>(u), static_cast<int>(v));
    ++raw_lines;
  }

  std::vector<int> labels;
  std::vector<std::string> class_names;
  if (!label_path.empty()) {
    std::ifstream lin = open_or_throw(label_path);
    std::map<int, std::string> by_node;
    int lno = 0;
    while (std::getline(lin, line)) {
      ++lno;
      if (blank(line)) {
        continue;
      }
      std::istringstream ss(line);
      long long node;
      std::string cls;
      if (!(ss >> node >> cls)) {
        throw std::runtime_error(label_path + ": line " +
                                 std::to_string(lno) +
                                 ": expected \"node_id class\"");
      }
      if (node < 0 || node >= n) {
        throw std::runtime_error(label_path + ": line " +
                                 std::to_string(lno) + ": node id out of range");
      }
      if (!by_node.emplace(static_cast<int>(node), cls).second) {
        throw std::runtime_error(label_path + ": node " +
                                 std::to_string(node) + " labeled twice");
      }
    }
    std::set<std::string> names;
    for (const auto& [node, cls] : by_node) {
      names.insert(cls);
    }
    class_names.assign(names.begin(), names.end());
    std::map<std::string, int> class_id;
    for (std::size_t i = 0; i < class_names.size(); ++i) {
      class_id[class_names[i]] = static_cast<int>(i);
    }
    labels.assign(n, -1);
    for (const auto& [node, cls] : by_node) {
      labels[node] = class_id[cls];
    }
  }

  AttributedGraph g = make_graph(n, std::move(raw), std::move(X),
                                 std::move(labels), std::move(class_names));
  g.raw_edge_lines = raw_lines;
  return g;
}

AttributedGraph load_cora_format(const std::string& content_path,
                                 const std::string& cites_path) {
  std::ifstream cin = open_or_throw(content_path);
  struct Row {
    std::string id;
    std::vector<double> words;
    std::string label;
  };
  std::vector<Row> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(cin, line)) {
    ++line_no;
    if (blank(line)) {
      continue;
    }
    std::istringstream ss(line);
    std::vector<std::string> tokens;
    std::string tok;
    while (ss >> tok) {
      tokens.push_back(tok);
    }
    if (tokens.size() < 3) {
      throw std::runtime_error(content_path + ": line " +
                               std::to_string(line_no) +
                               ": expected \"id w1 ... wm label\"");
    }
    Row r;
    r.id = tokens.front();
    r.label = tokens.back();
    r.words.reserve(tokens.size() - 2);
    for (std::size_t i = 1; i + 1 < tokens.size(); ++i) {
      char* end = nullptr;
      double v = std::strtod(tokens[i].c_str(), &end);
      if (end == tokens[i].c_str() || *end != '\0') {
        throw std::runtime_error(content_path + ": line " +
                                 std::to_string(line_no) +
                                 ": non-numeric attribute value");
      }
      r.words.push_back(v);
    }
    if (!rows.empty() && r.words.size() != rows.front().words.size()) {
      throw std::runtime_error(content_path + ": line " +
                               std::to_string(line_no) +
                               ": attribute row length mismatch");
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) {
    throw std::runtime_error(content_path + ": empty content file");
  }

  std::map<std::string, int> node_id;  // sorted original id -> dense id
  for (const auto& r : rows) {
    if (!node_id.emplace(r.id, 0).second) {
      throw std::runtime_error(content_path + ": duplicate node id " + r.id);
    }
  }
  int next = 0;
  for (auto& [orig, id] : node_id) {
    id = next++;
  }

  const int n = static_cast<int>(rows.size());
  const int m = static_cast<int>(rows.front().words.size());
  Mat X(n, m);
  std::vector<int> labels(n, -1);
  std::vector<std::string> original_ids(n);

  std::set<std::string> label_names;
  for (const auto& r : rows) {
    label_names.insert(r.label);
  }
  std::vector<std::string> class_names(label_names.begin(), label_names.end());
  std::map<std::string, int> class_id;
  for (std::size_t i = 0; i < class_names.size(); ++i) {
    class_id[class_names[i]] = static_cast<int>(i);
  }

  for (const auto& r : rows) {
    const int v = node_id[r.id];
    original_ids[v] = r.id;
    for (int j = 0; j < m; ++j) {
      X(v, j) = r.words[j];
    }
    labels[v] = class_id[r.label];
  }

  std::ifstream ein = open_or_throw(cites_path);
  std::vector<std::pair<int, int>> raw;
  int dropped = 0;
  int raw_lines = 0;
  line_no = 0;
  while (std::getline(ein, line)) {
    ++line_no;
    if (blank(line)) {
      continue;
    }
    std::istringstream ss(line);
    std::string a, b;
    if (!(ss >> a >> b)) {
      throw std::runtime_error(cites_path + ": line " +
                               std::to_string(line_no) +
                               ": expected \"cited citing\"");
    }
    ++raw_lines;
    auto ia = node_id.find(a);
    auto ib = node_id.find(b);
    if (ia == node_id.end() || ib == node_id.end()) {
      ++dropped;
      continue;
    }
    raw.emplace_back(ia->second, ib->second);
  }

  AttributedGraph g = make_graph(n, std::move(raw), std::move(X),
                                 std::move(labels), std::move(class_names));
  g.original_ids = std::move(original_ids);
  g.dropped_unknown_refs = dropped;
  g.raw_edge_lines = raw_lines;
  return g;
}

AttributedGraph generate_sbm_attributed(int n_per_block, int n_blocks,
                                        double p_in, double p_out,
                                        int attr_dim, double attr_noise,
                                        std::uint64_t seed) {
  if (n_per_block <= 0 || n_blocks <= 0) {
    throw std::invalid_argument("sbm: block sizes must be positive");
  }
  if (p_in < 0 || p_in > 1 || p_out < 0 || p_out > 1 || attr_noise < 0 ||
      attr_noise > 1) {
    throw std::invalid_argument("sbm: probabilities must be in [0, 1]");
  }
  if (attr_dim < n_blocks) {
    throw std::invalid_argument("sbm: attr_dim must be >= n_blocks");
  }

  const int n = n_per_block * n_blocks;
  auto block_of = [&](int v) { return v / n_per_block; };

  Rng edge_rng(mix_seed(seed, 0xed6e5));
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < n; ++u) {
    for (int v = u + 1; v < n; ++v) {
      double p = block_of(u) == block_of(v) ? p_in : p_out;
      if (edge_rng.bernoulli(p)) {
        edges.emplace_back(u, v);
      }
    }
  }

  // Block indicator pattern: attr_dim is cut into n_blocks contiguous
  // groups, block b owns group b.
  Rng attr_rng(mix_seed(seed, 0xa7712));
  Mat X = Mat::Zero(n, attr_dim);
  const int group = attr_dim / n_blocks;
  for (int v = 0; v < n; ++v) {
    const int b = block_of(v);
    for (int j = 0; j < attr_dim; ++j) {
      const bool in_group = j >= b * group && j < (b + 1) * group;
      bool bit = in_group;
      if (attr_rng.bernoulli(attr_noise)) {
        bit = !bit;
      }
      X(v, j) = bit ? 1.0 : 0.0;
    }
  }

  std::vector<int> labels(n);
  std::vector<std::string> class_names;
  for (int b = 0; b < n_blocks; ++b) {
    class_names.push_back(std::to_string(b));
  }
  for (int v = 0; v < n; ++v) {
    labels[v] = block_of(v);
  }
  return make_graph(n, std::move(edges), std::move(X), std::move(labels),
                    std::move(class_names));
}

void ensure_parent_dir(const std::string& path) {
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::filesystem::create_directories(parent);
  }
}

void save_graph(const AttributedGraph& g, const std::string& prefix) {
  ensure_parent_dir(prefix);
  {
    std::ofstream out(prefix + ".edges");
    if (!out) {
      throw std::runtime_error("cannot write " + prefix + ".edges");
    }
    for (auto [u, v] : g.edges) {
      out << u << ' ' << v << '\n';
    }
  }
  {
    std::ofstream out(prefix + ".attrs");
    if (!out) {
      throw std::runtime_error("cannot write " + prefix + ".attrs");
    }
    char buf[32];
    for (int i = 0; i < g.n; ++i) {
      for (int j = 0; j < g.attr_dim(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", g.attributes(i, j));
        out << (j ? " " : "") << buf;
      }
      out << '\n';
    }
  }
  if (g.has_labels()) {
    std::ofstream out(prefix + ".labels");
    if (!out) {
      throw std::runtime_error("cannot write " + prefix + ".labels");
    }
    for (int v = 0; v < g.n; ++v) {
      if (g.labels[v] >= 0) {
        out << v << ' ' << g.class_names[g.labels[v]] << '\n';
      }
    }
  }
}

}  // namespace attrembed
