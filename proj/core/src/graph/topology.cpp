#include "dstgat/graph/topology.hpp"

#include <deque>
#include <sstream>

#include "dstgat/data/text.hpp"

namespace dstgat::graph {

std::string_view to_string(GraphType type) {
  switch (type) {
    case GraphType::kNoGraph: return "NoGraph";
    case GraphType::kDSGraph: return "DSGraph";
    case GraphType::kDSVGraph: return "DSVGraph";
  }
  return "?";
}

GraphType parse_graph_type(std::string_view name) {
  if (name == "NoGraph") return GraphType::kNoGraph;
  if (name == "DSGraph") return GraphType::kDSGraph;
  if (name == "DSVGraph") return GraphType::kDSVGraph;
  throw data::DataError("unknown graph type '" + std::string(name) +
                        "' (expected NoGraph, DSGraph or DSVGraph)");
}

GraphTopology::GraphTopology(std::vector<NodeKind> kinds, std::vector<std::string> labels,
                             Matrix adjacency)
    : kinds_(std::move(kinds)), labels_(std::move(labels)), adjacency_(std::move(adjacency)) {
  const std::size_t n = kinds_.size();
  if (labels_.size() != n || adjacency_.rows() != n || adjacency_.cols() != n) {
    throw TopologyError("topology: " + std::to_string(n) + " nodes, " +
                        std::to_string(labels_.size()) + " labels, adjacency " +
                        adjacency_.shape_string());
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (adjacency_(i, i) != 0.0) throw TopologyError("topology: self loop at node " + std::to_string(i));
    for (std::size_t j = 0; j < n; ++j) {
      const double a = adjacency_(i, j);
      if (a != 0.0 && a != 1.0) throw TopologyError("topology: adjacency must be binary");
      if (a != adjacency_(j, i)) throw TopologyError("topology: adjacency must be symmetric");
    }
  }
}

std::size_t GraphTopology::slot_count() const {
  std::size_t n = 0;
  while (n < kinds_.size() && kinds_[n] == NodeKind::kSlot) ++n;
  return n;
}

std::size_t GraphTopology::degree(std::size_t i) const {
  std::size_t d = 0;
  for (std::size_t j = 0; j < node_count(); ++j) d += connected(i, j);
  return d;
}

std::size_t GraphTopology::directed_edge_count() const {
  std::size_t e = 0;
  for (double v : adjacency_.values()) e += v != 0.0;
  return e;
}

GraphTopology build_ds_graph(const data::Ontology& ontology) {
  const std::size_t n = ontology.slot_count();
  if (n == 0) throw data::DataError("build_ds_graph: ontology has no slots");
  Matrix s = Matrix::ones(n, n);
  for (std::size_t i = 0; i < n; ++i) s(i, i) = 0.0;
  return GraphTopology(std::vector<NodeKind>(n, NodeKind::kSlot), ontology.slot_keys(), std::move(s));
}

GraphTopology build_dsv_graph(const data::Ontology& ontology) {
  const std::size_t ns = ontology.slot_count();
  const std::size_t nv = ontology.value_count();
  if (ns == 0) throw data::DataError("build_dsv_graph: ontology has no slots");
  if (nv == 0) throw data::DataError("build_dsv_graph: ontology has no values");
  std::vector<NodeKind> kinds(ns, NodeKind::kSlot);
  kinds.insert(kinds.end(), nv, NodeKind::kValue);
  std::vector<std::string> labels = ontology.slot_keys();
  labels.insert(labels.end(), ontology.values().begin(), ontology.values().end());
  Matrix s(ns + nv, ns + nv);
  for (std::size_t i = 0; i < ns; ++i) {
    for (std::size_t v : ontology.slot(i).candidates) {
      if (v >= nv) throw data::DataError("build_dsv_graph: dangling candidate");
      s(i, ns + v) = 1.0;
      s(ns + v, i) = 1.0;
    }
  }
  return GraphTopology(std::move(kinds), std::move(labels), std::move(s));
}

std::string serialize_topology(const GraphTopology& t) {
  std::ostringstream os;
  os << "dstgat-graph 1\n";
  os << "nodes " << t.node_count() << "\n";
  for (std::size_t i = 0; i < t.node_count(); ++i) {
    os << (t.kinds()[i] == NodeKind::kSlot ? "slot" : "value") << ' ' << t.labels()[i] << "\n";
  }
  os << "edges " << t.directed_edge_count() / 2 << "\n";
  for (std::size_t i = 0; i < t.node_count(); ++i)
    for (std::size_t j = i + 1; j < t.node_count(); ++j)
      if (t.connected(i, j)) os << i << ' ' << j << "\n";
  return os.str();
}

GraphTopology parse_topology(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  auto next = [&]() -> std::string {
    if (!std::getline(in, line)) throw data::ParseError("graph: unexpected end of input", line_no + 1);
    ++line_no;
    return line;
  };
  if (data::normalize_whitespace(next()) != "dstgat-graph 1") {
    throw data::ParseError("graph: expected header 'dstgat-graph 1'", line_no);
  }
  auto read_count = [&](const char* keyword) {
    const auto words = data::split_whitespace(next());
    if (words.size() != 2 || words[0] != keyword) {
      throw data::ParseError(std::string("graph: expected '") + keyword + " <count>'", line_no);
    }
    try {
      return static_cast<std::size_t>(std::stoull(words[1]));
    } catch (const std::exception&) {
      throw data::ParseError("graph: bad count", line_no);
    }
  };
  const std::size_t n = read_count("nodes");
  std::vector<NodeKind> kinds;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string l = next();
    const auto space = l.find(' ');
    const std::string kind = l.substr(0, space);
    if (space == std::string::npos || (kind != "slot" && kind != "value")) {
      throw data::ParseError("graph: expected '<slot|value> <label>'", line_no);
    }
    kinds.push_back(kind == "slot" ? NodeKind::kSlot : NodeKind::kValue);
    labels.push_back(l.substr(space + 1));
  }
  const std::size_t m = read_count("edges");
  Matrix s(n, n);
  for (std::size_t e = 0; e < m; ++e) {
    const auto words = data::split_whitespace(next());
    std::size_t i = 0, j = 0;
    try {
      if (words.size() != 2) throw std::invalid_argument("arity");
      i = std::stoull(words[0]);
      j = std::stoull(words[1]);
    } catch (const std::exception&) {
      throw data::ParseError("graph: expected 'i j'", line_no);
    }
    if (i >= j || j >= n) throw data::ParseError("graph: edge needs i < j < nodes", line_no);
    s(i, j) = s(j, i) = 1.0;
  }
  return GraphTopology(std::move(kinds), std::move(labels), std::move(s));
}

std::vector<std::vector<std::size_t>> shortest_paths(const GraphTopology& t) {
  const std::size_t n = t.node_count();
  std::vector<std::vector<std::size_t>> dist(n, std::vector<std::size_t>(n, n));
  for (std::size_t src = 0; src < n; ++src) {
    std::deque<std::size_t> q{src};
    dist[src][src] = 0;
    while (!q.empty()) {
      const std::size_t u = q.front();
      q.pop_front();
      for (std::size_t v = 0; v < n; ++v) {
        if (t.connected(u, v) && dist[src][v] == n) {
          dist[src][v] = dist[src][u] + 1;
          q.push_back(v);
        }
      }
    }
  }
  return dist;
}

}  // namespace dstgat::graph
