#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dstgat/graph/topology.hpp"
#include "dstgat/numeric/autodiff.hpp"

namespace dstgat::graph {

enum class Activation { kIdentity, kLeakyRelu, kTanh };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

/// One attention head: hop transforms A_0..A_{K-1} (F x G) and the attention
/// bilinear form Q (F x F).
struct GatHeadParams {
  std::vector<Parameter> hops;
  Parameter attention;

  std::size_t hop_count() const { return hops.size(); }
};

struct GatLayerParams {
  std::vector<GatHeadParams> heads;
  Activation activation = Activation::kLeakyRelu;
  double activation_slope = 0.2;
  /// Slope of the LeakyReLU applied to attention logits.
  double attention_slope = 0.2;
};

struct GatConfig {
  GraphType type = GraphType::kNoGraph;
  std::size_t layers = 0;
  std::size_t heads = 0;
  std::size_t hops = 0;
  Activation activation = Activation::kLeakyRelu;
  double activation_slope = 0.2;
  double attention_slope = 0.2;

  /// NoGraph requires L = P = K = 0; graph types require all three >= 1.
  void validate() const;
  /// e.g. "L1P1K2-DSVGraph".
  std::string name() const;
};

/// Cascade of GAT layers with G = F throughout. Zero layers is the NoGraph
/// baseline.
class GatStack {
 public:
  GatStack() = default;
  /// Scaled-normal initialization: hop transforms N(0, 1/F), attention N(0, 0.01/F).
  GatStack(const GatConfig& config, std::size_t feature_dim, std::uint64_t seed);

  const GatConfig& config() const { return config_; }
  std::string config_name() const { return config_.name(); }
  std::size_t feature_dim() const { return feature_dim_; }
  std::vector<GatLayerParams>& layers() { return layers_; }
  const std::vector<GatLayerParams>& layers() const { return layers_; }
  std::vector<Parameter*> parameters();
  std::size_t parameter_count() const;

 private:
  GatConfig config_;
  std::size_t feature_dim_ = 0;
  std::vector<GatLayerParams> layers_;
};

/// Per-head attention: e_ij = x_iᵀ Q x_j, then a row softmax of
/// LeakyReLU(e_ij) over the neighbours of i. Isolated rows are zero.
Var attention_matrix(Var x, const Matrix& adjacency, GatHeadParams& head, double leaky_slope);

/// Σ_k (E ⊙ S)^k X A_k, evaluated right to left without forming matrix powers.
Var head_aggregate(Var x, const Matrix& adjacency, Var attention, GatHeadParams& head);

/// (1/P) Σ_p σ(head_aggregate_p).
Var gat_layer_forward(Var x, const GraphTopology& topology, GatLayerParams& layer);

Var gat_stack_forward(Var x, const GraphTopology& topology, GatStack& stack);

/// First slot_count() rows. Throws TopologyError if value nodes precede slots.
Var slice_slot_outputs(Var x, const GraphTopology& topology);

/// (E ⊙ S)^k X by k explicit rounds of per-node neighbour sums.
Matrix message_passing_oracle(const Matrix& x, const Matrix& adjacency, const Matrix& attention,
                              std::size_t k);

/// Test hook: negates attention logits inside attention_matrix so that oracle
/// comparisons can be shown to catch the fault.
void set_attention_sign_fault(bool enabled);

}  // namespace dstgat::graph
