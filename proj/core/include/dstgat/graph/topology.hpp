#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "dstgat/data/ontology.hpp"
#include "dstgat/numeric/matrix.hpp"

namespace dstgat::graph {

enum class NodeKind { kSlot, kValue };
enum class GraphType { kNoGraph, kDSGraph, kDSVGraph };

std::string_view to_string(GraphType type);
/// Accepts "NoGraph", "DSGraph", "DSVGraph".
GraphType parse_graph_type(std::string_view name);

class TopologyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Undirected simple graph over slot nodes followed by value nodes. The
/// adjacency is binary, symmetric and has a zero diagonal.
class GraphTopology {
 public:
  GraphTopology() = default;
  GraphTopology(std::vector<NodeKind> kinds, std::vector<std::string> labels, Matrix adjacency);

  std::size_t node_count() const { return kinds_.size(); }
  /// Length of the leading run of slot nodes.
  std::size_t slot_count() const;
  const std::vector<NodeKind>& kinds() const { return kinds_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const Matrix& adjacency() const { return adjacency_; }
  bool connected(std::size_t i, std::size_t j) const { return adjacency_(i, j) != 0.0; }
  std::size_t degree(std::size_t i) const;
  std::size_t directed_edge_count() const;

  friend bool operator==(const GraphTopology&, const GraphTopology&) = default;

 private:
  std::vector<NodeKind> kinds_;
  std::vector<std::string> labels_;
  Matrix adjacency_;
};

/// Complete graph over the slots, in ontology order.
GraphTopology build_ds_graph(const data::Ontology& ontology);
/// Bipartite graph: slot s is linked to value v iff v is a candidate of s.
GraphTopology build_dsv_graph(const data::Ontology& ontology);

/// Versioned text format:
///   dstgat-graph 1
///   nodes N
///   <slot|value> <label>      (N lines)
///   edges M
///   i j                       (M lines, i < j)
std::string serialize_topology(const GraphTopology& topology);
GraphTopology parse_topology(std::string_view text);

/// Hop distances by BFS; unreachable pairs get node_count().
std::vector<std::vector<std::size_t>> shortest_paths(const GraphTopology& topology);

}  // namespace dstgat::graph
