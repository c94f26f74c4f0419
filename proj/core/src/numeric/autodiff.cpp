#include "dstgat/numeric/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace dstgat {

Parameter::Parameter(std::string name, Matrix v)
    : value(std::move(v)), grad(value.rows(), value.cols()), name_(std::move(name)) {}

const Matrix& Var::value() const { return tape_->value(*this); }

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, false, nullptr, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::variable(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, record_, nullptr, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Parameter& p) {
  if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var(this, it->second);
  // The value is copied so that later optimizer updates never alias a live tape.
  nodes_.push_back(Node{p.value, {}, record_, &p, {}});
  param_nodes_.emplace(&p, nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Tape::push(Matrix value, std::span<const Var> inputs, BackwardFn backward) {
  bool needs = false;
  if (record_) {
    for (const Var& in : inputs) {
      if (in.tape() != this) throw ContractViolation("Tape::push: input belongs to another tape");
      needs = needs || nodes_[in.id()].requires_grad;
    }
  }
  Node node;
  node.value = std::move(value);
  node.requires_grad = needs;
  if (needs) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Matrix& Tape::grad_buffer(Var v) {
  Node& n = nodes_[v.id()];
  if (n.grad.empty() && !n.value.empty()) n.grad = Matrix(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::accumulate(Var v, const Matrix& g) {
  if (!nodes_[v.id()].requires_grad) return;
  Matrix& buf = grad_buffer(v);
  require_same_shape(buf, g, "Tape::accumulate");
  for (std::size_t i = 0; i < g.size(); ++i) buf[i] += g[i];
}

Matrix Tape::grad(Var v) const {
  const Node& n = nodes_[v.id()];
  if (n.grad.empty()) return Matrix(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(Var loss) {
  if (loss.rows() != 1 || loss.cols() != 1) {
    throw ContractViolation("backward: loss must be scalar, got " + shape_of(loss.value()));
  }
  backward(loss, Matrix(1, 1, 1.0));
}

void Tape::backward(Var output, const Matrix& seed) {
  if (!record_) throw ContractViolation("backward: tape was created without recording");
  require_same_shape(output.value(), seed, "backward seed");
  for (Node& n : nodes_) n.grad = Matrix();
  backward_done_ = false;
  if (!nodes_[output.id()].requires_grad) {
    backward_done_ = true;
    return;
  }
  nodes_[output.id()].grad = seed;
  for (std::size_t i = output.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.backward) n.backward(*this, n.value, n.grad);
    if (n.parameter != nullptr) {
      Matrix& pg = n.parameter->grad;
      require_same_shape(pg, n.grad, "parameter gradient");
      for (std::size_t k = 0; k < pg.size(); ++k) pg[k] += n.grad[k];
    }
  }
  backward_done_ = true;
}

namespace ad {
namespace {

Matrix map(const Matrix& m, auto&& f) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = f(m[i]);
  return out;
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = *a.tape();
  const Var in[] = {a, b};
  return t.push(dstgat::matmul(a.value(), b.value()), in,
                [a, b](Tape& tp, const Matrix&, const Matrix& g) {
                  if (tp.requires_grad(a)) tp.accumulate(a, matmul_transposed(g, b.value()));
                  if (tp.requires_grad(b)) tp.accumulate(b, transposed_matmul(a.value(), g));
                });
}

Var matmul_nt(Var a, Var b) {
  Tape& t = *a.tape();
  const Var in[] = {a, b};
  return t.push(matmul_transposed(a.value(), b.value()), in,
                [a, b](Tape& tp, const Matrix&, const Matrix& g) {
                  if (tp.requires_grad(a)) tp.accumulate(a, dstgat::matmul(g, b.value()));
                  if (tp.requires_grad(b)) tp.accumulate(b, transposed_matmul(g, a.value()));
                });
}

Var transpose(Var a) {
  const Var in[] = {a};
  return a.tape()->push(dstgat::transpose(a.value()), in,
                        [a](Tape& tp, const Matrix&, const Matrix& g) {
                          tp.accumulate(a, dstgat::transpose(g));
                        });
}

Var add(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "add");
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  const Var in[] = {a, b};
  return a.tape()->push(std::move(out), in, [a, b](Tape& tp, const Matrix&, const Matrix& g) {
    tp.accumulate(a, g);
    tp.accumulate(b, g);
  });
}

Var sub(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "sub");
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  const Var in[] = {a, b};
  return a.tape()->push(std::move(out), in, [a, b](Tape& tp, const Matrix&, const Matrix& g) {
    tp.accumulate(a, g);
    if (tp.requires_grad(b)) tp.accumulate(b, map(g, [](double v) { return -v; }));
  });
}

Var hadamard(Var a, Var b) {
  const Var in[] = {a, b};
  return a.tape()->push(dstgat::hadamard(a.value(), b.value()), in,
                        [a, b](Tape& tp, const Matrix&, const Matrix& g) {
                          if (tp.requires_grad(a)) tp.accumulate(a, dstgat::hadamard(g, b.value()));
                          if (tp.requires_grad(b)) tp.accumulate(b, dstgat::hadamard(g, a.value()));
                        });
}

Var hadamard(Var a, const Matrix& constant) {
  const Var in[] = {a};
  return a.tape()->push(dstgat::hadamard(a.value(), constant), in,
                        [a, constant](Tape& tp, const Matrix&, const Matrix& g) {
                          tp.accumulate(a, dstgat::hadamard(g, constant));
                        });
}

Var scale(Var a, double s) {
  const Var in[] = {a};
  return a.tape()->push(map(a.value(), [s](double v) { return v * s; }), in,
                        [a, s](Tape& tp, const Matrix&, const Matrix& g) {
                          tp.accumulate(a, map(g, [s](double v) { return v * s; }));
                        });
}

Var add_row(Var a, Var row) {
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw DimensionError("add_row: cannot broadcast " + shape_of(row.value()) + " over " +
                         shape_of(a.value()));
  }
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += row.value()(0, j);
  const Var in[] = {a, row};
  return a.tape()->push(std::move(out), in, [a, row](Tape& tp, const Matrix&, const Matrix& g) {
    tp.accumulate(a, g);
    if (tp.requires_grad(row)) {
      Matrix r(1, g.cols());
      for (std::size_t i = 0; i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j) r(0, j) += g(i, j);
      tp.accumulate(row, r);
    }
  });
}

Var sum(Var a) {
  double total = 0.0;
  for (double v : a.value().values()) total += v;
  const Var in[] = {a};
  return a.tape()->push(Matrix(1, 1, total), in, [a](Tape& tp, const Matrix&, const Matrix& g) {
    tp.accumulate(a, Matrix(a.rows(), a.cols(), g[0]));
  });
}

Var leaky_relu(Var x, double slope) {
  if (slope < 0.0) throw ContractViolation("leaky_relu: slope must be >= 0");
  const Var in[] = {x};
  return x.tape()->push(map(x.value(), [slope](double v) { return v > 0.0 ? v : slope * v; }), in,
                        [x, slope](Tape& tp, const Matrix&, const Matrix& g) {
                          Matrix d = g;
                          const Matrix& xv = x.value();
                          for (std::size_t i = 0; i < d.size(); ++i)
                            if (!(xv[i] > 0.0)) d[i] *= slope;
                          tp.accumulate(x, d);
                        });
}

Var gelu(Var x) {
  constexpr double kC = 0.7978845608028654;  // sqrt(2/pi)
  constexpr double kA = 0.044715;
  const Var in[] = {x};
  return x.tape()->push(
      map(x.value(),
          [](double v) { return 0.5 * v * (1.0 + std::tanh(kC * (v + kA * v * v * v))); }),
      in, [x](Tape& tp, const Matrix&, const Matrix& g) {
        Matrix d = g;
        const Matrix& xv = x.value();
        for (std::size_t i = 0; i < d.size(); ++i) {
          const double v = xv[i];
          const double t = std::tanh(kC * (v + kA * v * v * v));
          const double dt = (1.0 - t * t) * kC * (1.0 + 3.0 * kA * v * v);
          d[i] *= 0.5 * (1.0 + t) + 0.5 * v * dt;
        }
        tp.accumulate(x, d);
      });
}

Var tanh(Var x) {
  const Var in[] = {x};
  return x.tape()->push(map(x.value(), [](double v) { return std::tanh(v); }), in,
                        [x](Tape& tp, const Matrix& y, const Matrix& g) {
                          Matrix d = g;
                          for (std::size_t i = 0; i < d.size(); ++i) d[i] *= 1.0 - y[i] * y[i];
                          tp.accumulate(x, d);
                        });
}

Var masked_row_softmax(Var scores, const Matrix& mask) {
  const Var in[] = {scores};
  return scores.tape()->push(
      dstgat::masked_row_softmax(scores.value(), mask), in,
      [scores](Tape& tp, const Matrix& y, const Matrix& g) {
        Matrix d(y.rows(), y.cols());
        for (std::size_t i = 0; i < y.rows(); ++i) {
          double dot = 0.0;
          for (std::size_t j = 0; j < y.cols(); ++j) dot += y(i, j) * g(i, j);
          for (std::size_t j = 0; j < y.cols(); ++j) d(i, j) = y(i, j) * (g(i, j) - dot);
        }
        tp.accumulate(scores, d);
      });
}

Var concat(Var a, Var b, Axis axis) {
  const std::size_t first = axis == Axis::kRows ? a.rows() : a.cols();
  const Var in[] = {a, b};
  return a.tape()->push(dstgat::concat(a.value(), b.value(), axis), in,
                        [a, b, first, axis](Tape& tp, const Matrix&, const Matrix& g) {
                          auto [ga, gb] = split(g, first, axis);
                          tp.accumulate(a, ga);
                          tp.accumulate(b, gb);
                        });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw ContractViolation("concat_cols: no inputs");
  const std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  for (const Var& p : parts) {
    if (p.rows() != rows) {
      throw DimensionError("concat_cols: row mismatch " + shape_of(parts.front().value()) + " vs " +
                           shape_of(p.value()));
    }
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Matrix& v = p.value();
    for (std::size_t i = 0; i < rows; ++i)
      std::copy(v.row(i).begin(), v.row(i).end(), out.row(i).begin() + static_cast<long>(offset));
    offset += v.cols();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return parts.front().tape()->push(
      std::move(out), parts, [inputs](Tape& tp, const Matrix&, const Matrix& g) {
        std::size_t off = 0;
        for (const Var& p : inputs) {
          const std::size_t c = p.cols();
          if (tp.requires_grad(p)) {
            Matrix& buf = tp.grad_buffer(p);
            for (std::size_t i = 0; i < g.rows(); ++i)
              for (std::size_t j = 0; j < c; ++j) buf(i, j) += g(i, off + j);
          }
          off += c;
        }
      });
}

Var slice_rows(Var a, std::size_t begin, std::size_t end) {
  const Var in[] = {a};
  return a.tape()->push(dstgat::slice_rows(a.value(), begin, end), in,
                        [a, begin](Tape& tp, const Matrix&, const Matrix& g) {
                          Matrix& buf = tp.grad_buffer(a);
                          const std::size_t c = g.cols();
                          for (std::size_t i = 0; i < g.size(); ++i) buf[begin * c + i] += g[i];
                        });
}

Var gather_rows(Var table, std::span<const std::size_t> ids) {
  const Matrix& t = table.value();
  Matrix out(ids.size(), t.cols());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] >= t.rows()) {
      throw DimensionError("gather_rows: row " + std::to_string(ids[r]) + " outside " + shape_of(t));
    }
    std::copy(t.row(ids[r]).begin(), t.row(ids[r]).end(), out.row(r).begin());
  }
  std::vector<std::size_t> idx(ids.begin(), ids.end());
  const Var in[] = {table};
  return table.tape()->push(std::move(out), in,
                            [table, idx](Tape& tp, const Matrix&, const Matrix& g) {
                              Matrix& buf = tp.grad_buffer(table);
                              for (std::size_t r = 0; r < idx.size(); ++r) {
                                auto dst = buf.row(idx[r]);
                                auto src = g.row(r);
                                for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
                              }
                            });
}

Var gather_rows_or_zero(Var table, std::span<const std::optional<std::size_t>> ids) {
  const Matrix& t = table.value();
  Matrix out(ids.size(), t.cols());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (!ids[r]) continue;
    if (*ids[r] >= t.rows()) {
      throw DimensionError("gather_rows_or_zero: row " + std::to_string(*ids[r]) + " outside " +
                           shape_of(t));
    }
    std::copy(t.row(*ids[r]).begin(), t.row(*ids[r]).end(), out.row(r).begin());
  }
  std::vector<std::optional<std::size_t>> idx(ids.begin(), ids.end());
  const Var in[] = {table};
  return table.tape()->push(std::move(out), in,
                            [table, idx](Tape& tp, const Matrix&, const Matrix& g) {
                              Matrix& buf = tp.grad_buffer(table);
                              for (std::size_t r = 0; r < idx.size(); ++r) {
                                if (!idx[r]) continue;
                                auto dst = buf.row(*idx[r]);
                                auto src = g.row(r);
                                for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
                              }
                            });
}

Var mean_of_rows(Var table, const std::vector<std::vector<std::size_t>>& groups) {
  const Matrix& t = table.value();
  Matrix out(groups.size(), t.cols());
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    if (groups[gi].empty()) throw ContractViolation("mean_of_rows: empty group");
    const double w = 1.0 / static_cast<double>(groups[gi].size());
    for (std::size_t id : groups[gi]) {
      if (id >= t.rows()) throw DimensionError("mean_of_rows: row outside " + shape_of(t));
      for (std::size_t j = 0; j < t.cols(); ++j) out(gi, j) += w * t(id, j);
    }
  }
  const Var in[] = {table};
  return table.tape()->push(std::move(out), in,
                            [table, groups](Tape& tp, const Matrix&, const Matrix& g) {
                              Matrix& buf = tp.grad_buffer(table);
                              for (std::size_t gi = 0; gi < groups.size(); ++gi) {
                                const double w = 1.0 / static_cast<double>(groups[gi].size());
                                for (std::size_t id : groups[gi])
                                  for (std::size_t j = 0; j < g.cols(); ++j)
                                    buf(id, j) += w * g(gi, j);
                              }
                            });
}

Var layer_norm_rows(Var x, Var gain, Var bias, double eps) {
  const Matrix& xv = x.value();
  const std::size_t n = xv.cols();
  if (gain.rows() != 1 || gain.cols() != n || bias.rows() != 1 || bias.cols() != n) {
    throw DimensionError("layer_norm_rows: gain/bias must be 1x" + std::to_string(n));
  }
  Matrix xhat(xv.rows(), n);
  std::vector<double> inv_std(xv.rows());
  Matrix out(xv.rows(), n);
  for (std::size_t i = 0; i < xv.rows(); ++i) {
    double mean = 0.0;
    for (double v : xv.row(i)) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : xv.row(i)) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < n; ++j) {
      xhat(i, j) = (xv(i, j) - mean) * inv_std[i];
      out(i, j) = xhat(i, j) * gain.value()(0, j) + bias.value()(0, j);
    }
  }
  const Var in[] = {x, gain, bias};
  return x.tape()->push(
      std::move(out), in,
      [x, gain, bias, xhat, inv_std, n](Tape& tp, const Matrix&, const Matrix& g) {
        const Matrix& gv = gain.value();
        if (tp.requires_grad(x)) {
          Matrix dx(g.rows(), n);
          for (std::size_t i = 0; i < g.rows(); ++i) {
            double mean_d = 0.0;
            double mean_dx = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
              const double d = g(i, j) * gv(0, j);
              mean_d += d;
              mean_dx += d * xhat(i, j);
            }
            mean_d /= static_cast<double>(n);
            mean_dx /= static_cast<double>(n);
            for (std::size_t j = 0; j < n; ++j) {
              const double d = g(i, j) * gv(0, j);
              dx(i, j) = inv_std[i] * (d - mean_d - xhat(i, j) * mean_dx);
            }
          }
          tp.accumulate(x, dx);
        }
        if (tp.requires_grad(gain) || tp.requires_grad(bias)) {
          Matrix dg(1, n);
          Matrix db(1, n);
          for (std::size_t i = 0; i < g.rows(); ++i) {
            for (std::size_t j = 0; j < n; ++j) {
              dg(0, j) += g(i, j) * xhat(i, j);
              db(0, j) += g(i, j);
            }
          }
          tp.accumulate(gain, dg);
          tp.accumulate(bias, db);
        }
      });
}

Var cross_entropy(Var logits, std::span<const std::size_t> targets) {
  const Matrix& z = logits.value();
  if (targets.size() != z.rows()) {
    throw DimensionError("cross_entropy: " + std::to_string(targets.size()) + " targets for " +
                         shape_of(z));
  }
  if (z.rows() == 0) throw ContractViolation("cross_entropy: no rows");
  Matrix probs(z.rows(), z.cols());
  double total = 0.0;
  for (std::size_t i = 0; i < z.rows(); ++i) {
    if (targets[i] >= z.cols()) throw DimensionError("cross_entropy: target outside vocabulary");
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : z.row(i)) mx = std::max(mx, v);
    double s = 0.0;
    for (std::size_t j = 0; j < z.cols(); ++j) {
      probs(i, j) = std::exp(z(i, j) - mx);
      s += probs(i, j);
    }
    for (std::size_t j = 0; j < z.cols(); ++j) probs(i, j) /= s;
    total += (mx + std::log(s)) - z(i, targets[i]);
  }
  const double n = static_cast<double>(z.rows());
  std::vector<std::size_t> tg(targets.begin(), targets.end());
  const Var in[] = {logits};
  return logits.tape()->push(Matrix(1, 1, total / n), in,
                             [logits, probs, tg, n](Tape& tp, const Matrix&, const Matrix& g) {
                               Matrix d = probs;
                               for (std::size_t i = 0; i < tg.size(); ++i) d(i, tg[i]) -= 1.0;
                               const double s = g[0] / n;
                               for (std::size_t k = 0; k < d.size(); ++k) d[k] *= s;
                               tp.accumulate(logits, d);
                             });
}

}  // namespace ad
}  // namespace dstgat
