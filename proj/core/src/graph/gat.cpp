#include "dstgat/graph/gat.hpp"

#include <atomic>
#include <cmath>
#include <random>

namespace dstgat::graph {
namespace {

std::atomic<bool> g_attention_fault{false};

Matrix normal_matrix(std::size_t rows, std::size_t cols, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Matrix m(rows, cols);
  for (double& v : m.values()) v = dist(rng);
  return m;
}

Var activate(Var x, Activation a, double slope) {
  switch (a) {
    case Activation::kIdentity: return x;
    case Activation::kLeakyRelu: return ad::leaky_relu(x, slope);
    case Activation::kTanh: return ad::tanh(x);
  }
  return x;
}

}  // namespace

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::kIdentity: return "identity";
    case Activation::kLeakyRelu: return "leaky_relu";
    case Activation::kTanh: return "tanh";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  if (name == "identity") return Activation::kIdentity;
  if (name == "leaky_relu") return Activation::kLeakyRelu;
  if (name == "tanh") return Activation::kTanh;
  throw data::DataError("unknown activation '" + std::string(name) + "'");
}

void set_attention_sign_fault(bool enabled) { g_attention_fault = enabled; }

void GatConfig::validate() const {
  if (type == GraphType::kNoGraph) {
    if (layers != 0 || heads != 0 || hops != 0) {
      throw data::DataError("NoGraph requires L = P = K = 0, got " + name());
    }
    return;
  }
  if (layers < 1 || heads < 1 || hops < 1) {
    throw data::DataError(std::string(to_string(type)) + " requires L, P, K >= 1, got " + name());
  }
  if (activation_slope < 0.0 || attention_slope < 0.0) {
    throw data::DataError("LeakyReLU slopes must be >= 0");
  }
}

std::string GatConfig::name() const {
  return "L" + std::to_string(layers) + "P" + std::to_string(heads) + "K" + std::to_string(hops) +
         "-" + std::string(to_string(type));
}

GatStack::GatStack(const GatConfig& config, std::size_t feature_dim, std::uint64_t seed)
    : config_(config), feature_dim_(feature_dim) {
  config_.validate();
  std::mt19937_64 rng(seed);
  const double f = static_cast<double>(feature_dim);
  for (std::size_t l = 0; l < config_.layers; ++l) {
    GatLayerParams layer;
    layer.activation = config_.activation;
    layer.activation_slope = config_.activation_slope;
    layer.attention_slope = config_.attention_slope;
    for (std::size_t p = 0; p < config_.heads; ++p) {
      GatHeadParams head;
      const std::string prefix = "gat.l" + std::to_string(l) + ".p" + std::to_string(p);
      for (std::size_t k = 0; k < config_.hops; ++k) {
        head.hops.emplace_back(prefix + ".hop" + std::to_string(k),
                               normal_matrix(feature_dim, feature_dim, 1.0 / std::sqrt(f), rng));
      }
      head.attention =
          Parameter(prefix + ".attn", normal_matrix(feature_dim, feature_dim, 0.1 / std::sqrt(f), rng));
      layer.heads.push_back(std::move(head));
    }
    layers_.push_back(std::move(layer));
  }
}

std::vector<Parameter*> GatStack::parameters() {
  std::vector<Parameter*> out;
  for (auto& layer : layers_) {
    for (auto& head : layer.heads) {
      for (auto& a : head.hops) out.push_back(&a);
      out.push_back(&head.attention);
    }
  }
  return out;
}

std::size_t GatStack::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_)
    for (const auto& head : layer.heads) {
      for (const auto& a : head.hops) n += a.value.size();
      n += head.attention.value.size();
    }
  return n;
}

Var attention_matrix(Var x, const Matrix& adjacency, GatHeadParams& head, double leaky_slope) {
  Tape& tape = *x.tape();
  const std::size_t n = x.rows();
  if (adjacency.rows() != n || adjacency.cols() != n) {
    throw DimensionError("attention_matrix: adjacency " + shape_of(adjacency) + " for " +
                         std::to_string(n) + " nodes");
  }
  Var q = tape.parameter(head.attention);
  Var logits = ad::matmul_nt(ad::matmul(x, q), x);
  if (g_attention_fault) logits = ad::scale(logits, -1.0);
  return ad::masked_row_softmax(ad::leaky_relu(logits, leaky_slope), adjacency);
}

Var head_aggregate(Var x, const Matrix& adjacency, Var attention, GatHeadParams& head) {
  if (head.hops.empty()) throw ContractViolation("head_aggregate: a head needs K >= 1 hops");
  Tape& tape = *x.tape();
  Var weights = ad::hadamard(attention, adjacency);
  Var propagated = x;
  Var out = ad::matmul(x, tape.parameter(head.hops[0]));
  for (std::size_t k = 1; k < head.hops.size(); ++k) {
    propagated = ad::matmul(weights, propagated);
    out = out + ad::matmul(propagated, tape.parameter(head.hops[k]));
  }
  return out;
}

Var gat_layer_forward(Var x, const GraphTopology& topology, GatLayerParams& layer) {
  if (layer.heads.empty()) throw ContractViolation("gat_layer_forward: layer has no heads");
  const std::size_t k = layer.heads.front().hop_count();
  for (const auto& h : layer.heads) {
    if (h.hop_count() != k || h.attention.value.rows() != x.cols() ||
        h.attention.value.cols() != x.cols()) {
      throw DimensionError("gat_layer_forward: head shapes disagree");
    }
    for (const auto& a : h.hops) {
      if (a.value.rows() != x.cols() || a.value.cols() != x.cols()) {
        throw DimensionError("gat_layer_forward: hop transform " + shape_of(a.value) +
                             " for features " + shape_of(x.value()));
      }
    }
  }
  Var total;
  for (auto& head : layer.heads) {
    Var e = attention_matrix(x, topology.adjacency(), head, layer.attention_slope);
    Var h = activate(head_aggregate(x, topology.adjacency(), e, head), layer.activation,
                     layer.activation_slope);
    total = total.valid() ? total + h : h;
  }
  return ad::scale(total, 1.0 / static_cast<double>(layer.heads.size()));
}

Var gat_stack_forward(Var x, const GraphTopology& topology, GatStack& stack) {
  if (x.rows() != topology.node_count()) {
    throw DimensionError("gat_stack_forward: " + shape_of(x.value()) + " features for " +
                         std::to_string(topology.node_count()) + " nodes");
  }
  if (!stack.layers().empty() && x.cols() != stack.feature_dim()) {
    throw DimensionError("gat_stack_forward: feature dim " + std::to_string(x.cols()) +
                         " but stack expects " + std::to_string(stack.feature_dim()));
  }
  for (auto& layer : stack.layers()) x = gat_layer_forward(x, topology, layer);
  return x;
}

Var slice_slot_outputs(Var x, const GraphTopology& topology) {
  const std::size_t ns = topology.slot_count();
  for (std::size_t i = ns; i < topology.node_count(); ++i) {
    if (topology.kinds()[i] == NodeKind::kSlot) {
      throw TopologyError("slice_slot_outputs: slot node " + std::to_string(i) +
                          " follows a value node");
    }
  }
  return ad::slice_rows(x, 0, ns);
}

Matrix message_passing_oracle(const Matrix& x, const Matrix& adjacency, const Matrix& attention,
                              std::size_t k) {
  const std::size_t n = x.rows();
  Matrix current = x;
  for (std::size_t round = 0; round < k; ++round) {
    Matrix next(n, x.cols());
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (adjacency(i, j) == 0.0) continue;
        const double w = attention(i, j);
        for (std::size_t f = 0; f < x.cols(); ++f) next(i, f) += w * current(j, f);
      }
    }
    current = std::move(next);
  }
  return current;
}

}  // namespace dstgat::graph
