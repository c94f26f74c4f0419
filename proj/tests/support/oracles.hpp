#pragma once

// Reference computations written independently of the library kernels.

#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "dstgat/data/ontology.hpp"
#include "dstgat/graph/topology.hpp"
#include "dstgat/numeric/matrix.hpp"

namespace oracle {

using dstgat::Matrix;
using Rng = std::mt19937_64;

inline Matrix triple_loop_matmul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

inline Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  Matrix m(r, c);
  for (double& v : m.values()) v = d(rng);
  return m;
}

inline std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline dstgat::graph::GraphTopology topology_from(const Matrix& adj) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < adj.rows(); ++i) labels.push_back("n" + std::to_string(i));
  return {std::vector<dstgat::graph::NodeKind>(adj.rows(), dstgat::graph::NodeKind::kSlot), labels,
          adj};
}

inline dstgat::graph::GraphTopology random_topology(Rng& rng, std::size_t n, double p = 0.5) {
  Matrix adj(n, n);
  std::bernoulli_distribution edge(p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (edge(rng)) adj(i, j) = adj(j, i) = 1.0;
  return topology_from(adj);
}

inline dstgat::graph::GraphTopology path_topology(std::size_t n) {
  Matrix adj(n, n);
  for (std::size_t i = 0; i + 1 < n; ++i) adj(i, i + 1) = adj(i + 1, i) = 1.0;
  return topology_from(adj);
}

inline double leaky(double x, double slope) { return x > 0.0 ? x : slope * x; }

/// E_ij = exp(l_ij) / sum over neighbours k of exp(l_ik), l_ij = LeakyReLU(x_i^T Q x_j).
inline Matrix attention(const Matrix& x, const Matrix& adj, const Matrix& q, double slope) {
  const std::size_t n = x.rows(), f = x.cols();
  Matrix e(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double denom = 0.0;
    std::vector<double> w(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (adj(i, j) == 0.0) continue;
      double s = 0.0;
      for (std::size_t a = 0; a < f; ++a)
        for (std::size_t b = 0; b < f; ++b) s += x(i, a) * q(a, b) * x(j, b);
      w[j] = std::exp(leaky(s, slope));
      denom += w[j];
    }
    for (std::size_t j = 0; j < n; ++j)
      if (adj(i, j) != 0.0) e(i, j) = w[j] / denom;
  }
  return e;
}

/// Σ_k ((E⊙S)^k X) A_k with the power built as an explicit matrix product.
inline Matrix head_sum(const Matrix& x, const Matrix& adj, const Matrix& e,
                       const std::vector<Matrix>& hops) {
  const std::size_t n = x.rows();
  Matrix es(n, n);
  for (std::size_t i = 0; i < es.size(); ++i) es[i] = e[i] * adj[i];
  Matrix power = Matrix::identity(n);
  Matrix out(n, hops.front().cols());
  for (const Matrix& a : hops) {
    const Matrix term = triple_loop_matmul(triple_loop_matmul(power, x), a);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += term[i];
    power = triple_loop_matmul(es, power);
  }
  return out;
}

inline double max_abs(const Matrix& a, const Matrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Two slots with the values from the worked pricerange example.
inline dstgat::data::Ontology pricerange_ontology() {
  using dstgat::data::SlotSpec;
  return dstgat::data::Ontology({"restaurant", "hotel"},
                                {SlotSpec{"restaurant", "pricerange", "restaurant pricerange", {0, 1, 2}},
                                 SlotSpec{"hotel", "pricerange", "hotel pricerange", {0, 1, 2}}},
                                {"cheap", "moderate", "expensive"});
}

}  // namespace oracle
