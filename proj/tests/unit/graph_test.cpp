#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "dstgat/graph/gat.hpp"
#include "dstgat/numeric/gradcheck.hpp"
#include "oracles.hpp"

using namespace dstgat;
using namespace dstgat::graph;

namespace {

data::Ontology two_domains() {
  using data::SlotSpec;
  return data::Ontology({"hotel", "restaurant"},
                        {SlotSpec{"hotel", "area", "", {0, 1}}, SlotSpec{"hotel", "stars", "", {2}},
                         SlotSpec{"restaurant", "area", "", {0, 1}}},
                        {"north", "south", "4"});
}

GatStack stack_for(std::size_t layers, std::size_t heads, std::size_t hops, std::size_t f,
                   std::uint64_t seed, double attention_scale = 1.0) {
  GatStack s({GraphType::kDSGraph, layers, heads, hops}, f, seed);
  oracle::Rng rng(seed + 100);
  for (auto& layer : s.layers())
    for (auto& head : layer.heads) head.attention.value = oracle::random_matrix(rng, f, f, attention_scale);
  return s;
}

}  // namespace

TEST_CASE("topology validation") {
  CHECK_THROWS_AS(oracle::topology_from(Matrix{{1, 0}, {0, 0}}), TopologyError);
  CHECK_THROWS_AS(oracle::topology_from(Matrix{{0, 1}, {0, 0}}), TopologyError);
  CHECK_THROWS_AS(oracle::topology_from(Matrix{{0, 2}, {2, 0}}), TopologyError);
}

TEST_CASE("slot graphs") {
  const data::Ontology o = two_domains();
  const GraphTopology ds = build_ds_graph(o);
  CHECK(ds.node_count() == 3);
  CHECK(ds.directed_edge_count() == 6);
  for (std::size_t i = 0; i < 3; ++i) CHECK(ds.degree(i) == 2);

  const GraphTopology dsv = build_dsv_graph(o);
  CHECK(dsv.node_count() == 6);
  CHECK(dsv.slot_count() == 3);
  CHECK(dsv.connected(0, 3));
  CHECK(dsv.connected(2, 4));
  CHECK_FALSE(dsv.connected(0, 2));
  CHECK_FALSE(dsv.connected(1, 3));
  CHECK(dsv.degree(5) == 1);
  const auto d = shortest_paths(dsv);
  CHECK(d[0][2] == 2);
  CHECK(d[0][1] == dsv.node_count());
}

TEST_CASE("graph text format") {
  const GraphTopology g = build_dsv_graph(two_domains());
  const std::string text = serialize_topology(g);
  CHECK(text.rfind("dstgat-graph 1\n", 0) == 0);
  CHECK(parse_topology(text) == g);
  CHECK_THROWS_AS(parse_topology("dstgat-graph 2\nnodes 0\nedges 0\n"), data::DataError);
  CHECK_THROWS_AS(parse_topology("dstgat-graph 1\nnodes 2\nslot a\nslot b\nedges 1\n0 5\n"), std::exception);
}

TEST_CASE("config names and validation") {
  CHECK(GatConfig{GraphType::kDSVGraph, 1, 1, 2}.name() == "L1P1K2-DSVGraph");
  CHECK(GatConfig{}.name() == "L0P0K0-NoGraph");
  CHECK_THROWS_AS(GatConfig({GraphType::kNoGraph, 1, 0, 0}).validate(), data::DataError);
  CHECK_THROWS_AS(GatConfig({GraphType::kDSGraph, 1, 0, 2}).validate(), data::DataError);
  CHECK(parse_graph_type("DSVGraph") == GraphType::kDSVGraph);
  CHECK_THROWS_AS(parse_graph_type("dsv"), data::DataError);
  const GatStack none(GatConfig{}, 8, 0);
  CHECK(none.parameter_count() == 0);
  const GatStack s({GraphType::kDSGraph, 2, 3, 2}, 4, 0);
  CHECK(s.parameter_count() == 2 * 3 * (2 * 16 + 16));
}

TEST_CASE("same seed gives identical parameters") {
  GatStack a({GraphType::kDSGraph, 1, 2, 2}, 4, 5), b({GraphType::kDSGraph, 1, 2, 2}, 4, 5),
      c({GraphType::kDSGraph, 1, 2, 2}, 4, 6);
  CHECK(a.layers()[0].heads[1].hops[1].value == b.layers()[0].heads[1].hops[1].value);
  CHECK_FALSE(a.layers()[0].heads[1].hops[1].value == c.layers()[0].heads[1].hops[1].value);
}

TEST_CASE("attention follows its definition") {
  oracle::Rng rng(2);
  for (int t = 0; t < 25; ++t) {
    const std::size_t n = oracle::uniform(rng, 1, 6), f = oracle::uniform(rng, 1, 4);
    const GraphTopology g = oracle::random_topology(rng, n);
    GatStack s = stack_for(1, 1, 1, f, rng());
    const Matrix x = oracle::random_matrix(rng, n, f);
    Tape tape(false);
    const Matrix e = attention_matrix(tape.constant(x), g.adjacency(), s.layers()[0].heads[0], 0.2).value();
    CHECK(oracle::max_abs(e, oracle::attention(x, g.adjacency(), s.layers()[0].heads[0].attention.value, 0.2)) < 1e-12);
  }
}

TEST_CASE("sign fault is visible to the direct formula") {
  oracle::Rng rng(4);
  const GraphTopology g = oracle::topology_from(Matrix{{0, 1, 1}, {1, 0, 1}, {1, 1, 0}});
  GatStack s = stack_for(1, 1, 1, 3, 9);
  const Matrix x = oracle::random_matrix(rng, 3, 3);
  const Matrix want = oracle::attention(x, g.adjacency(), s.layers()[0].heads[0].attention.value, 0.2);
  set_attention_sign_fault(true);
  Tape tape(false);
  const Matrix e = attention_matrix(tape.constant(x), g.adjacency(), s.layers()[0].heads[0], 0.2).value();
  set_attention_sign_fault(false);
  CHECK(oracle::max_abs(e, want) > 1e-6);
}

TEST_CASE("hop aggregation matches explicit matrix powers") {
  oracle::Rng rng(3);
  for (int t = 0; t < 25; ++t) {
    const std::size_t n = oracle::uniform(rng, 1, 6), f = oracle::uniform(rng, 1, 4),
                      k = oracle::uniform(rng, 1, 3);
    const GraphTopology g = oracle::random_topology(rng, n);
    GatStack s = stack_for(1, 1, k, f, rng());
    auto& head = s.layers()[0].heads[0];
    const Matrix x = oracle::random_matrix(rng, n, f);
    const Matrix e = oracle::attention(x, g.adjacency(), head.attention.value, 0.2);
    std::vector<Matrix> hops;
    for (auto& a : head.hops) hops.push_back(a.value);
    Tape tape(false);
    const Matrix got = head_aggregate(tape.constant(x), g.adjacency(), tape.constant(e), head).value();
    CHECK(oracle::max_abs(got, oracle::head_sum(x, g.adjacency(), e, hops)) < 1e-10);
    for (std::size_t h = 0; h < k; ++h) {
      Matrix es(n, n);
      for (std::size_t i = 0; i < es.size(); ++i) es[i] = e[i] * g.adjacency()[i];
      Matrix p = x;
      for (std::size_t r = 0; r < h; ++r) p = oracle::triple_loop_matmul(es, p);
      CHECK(oracle::max_abs(message_passing_oracle(x, g.adjacency(), e, h), p) < 1e-12);
    }
  }
}

TEST_CASE("layer averages activated heads") {
  oracle::Rng rng(8);
  const GraphTopology g = oracle::random_topology(rng, 4, 0.7);
  GatStack s = stack_for(1, 2, 2, 3, 21);
  const Matrix x = oracle::random_matrix(rng, 4, 3);
  Matrix want(4, 3);
  for (auto& head : s.layers()[0].heads) {
    const Matrix e = oracle::attention(x, g.adjacency(), head.attention.value, 0.2);
    std::vector<Matrix> hops{head.hops[0].value, head.hops[1].value};
    const Matrix h = oracle::head_sum(x, g.adjacency(), e, hops);
    for (std::size_t i = 0; i < want.size(); ++i) want[i] += 0.5 * oracle::leaky(h[i], 0.2);
  }
  Tape tape(false);
  CHECK(oracle::max_abs(gat_layer_forward(tape.constant(x), g, s.layers()[0]).value(), want) < 1e-12);
}

TEST_CASE("gradients of the stack") {
  oracle::Rng rng(5);
  for (int t = 0; t < 4; ++t) {
    const std::size_t n = oracle::uniform(rng, 2, 5), f = 3;
    const GraphTopology g = oracle::random_topology(rng, n);
    GatStack s = stack_for(2, 2, 2, f, rng(), 0.5);
    const Matrix x = oracle::random_matrix(rng, n, f), w = oracle::random_matrix(rng, n, f);
    auto params = s.parameters();
    const auto r = gradient_check(
        [&](Tape& tape) { return ad::sum(ad::hadamard(gat_stack_forward(tape.constant(x), g, s), w)); },
        params);
    CHECK_MESSAGE(r.passed, r.summary());
  }
}

TEST_CASE("stack input checks") {
  GatStack s = stack_for(1, 1, 1, 3, 1);
  oracle::Rng rng(1);
  const GraphTopology g = oracle::random_topology(rng, 3);
  Tape tape(false);
  CHECK_THROWS_AS(gat_stack_forward(tape.constant(Matrix(4, 3)), g, s), DimensionError);
  CHECK_THROWS_AS(gat_stack_forward(tape.constant(Matrix(3, 2)), g, s), DimensionError);
  GatHeadParams empty;
  CHECK_THROWS_AS(head_aggregate(tape.constant(Matrix(3, 3)), g.adjacency(), tape.constant(Matrix(3, 3)), empty),
                  ContractViolation);
}

TEST_CASE("slot outputs are the leading rows") {
  const GraphTopology dsv = build_dsv_graph(two_domains());
  Tape tape(false);
  Matrix x(6, 2);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);
  const Matrix out = slice_slot_outputs(tape.constant(x), dsv).value();
  CHECK(out.rows() == 3);
  CHECK(out(2, 1) == 5.0);
  const GraphTopology bad({NodeKind::kValue, NodeKind::kSlot}, {"v", "s"}, Matrix(2, 2));
  CHECK_THROWS_AS(slice_slot_outputs(tape.constant(Matrix(2, 2)), bad), TopologyError);
}
