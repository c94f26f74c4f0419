#include "dstgat/model/lm.hpp"

#include <cmath>
#include <random>
#include <string>

#include "dstgat/data/ontology.hpp"

namespace dstgat::model {
namespace {

class Init {
 public:
  Init(std::uint64_t seed, double scale) : rng_(seed), dist_(0.0, scale) {}
  Parameter normal(std::string name, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (double& v : m.values()) v = dist_(rng_);
    return Parameter(std::move(name), std::move(m));
  }
  static Parameter constant(std::string name, std::size_t cols, double v) {
    return Parameter(std::move(name), Matrix(1, cols, v));
  }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> dist_;
};

}  // namespace

void LmConfig::validate() const {
  if (layers < 1 || heads < 1 || hidden < 1 || context < 2 || ff_mult < 1) {
    throw data::DataError("model config: layers, heads, hidden, ff_mult >= 1 and context >= 2");
  }
  if (hidden % heads != 0) {
    throw data::DataError("model config: hidden " + std::to_string(hidden) +
                          " not divisible by heads " + std::to_string(heads));
  }
  if (!(init_scale > 0.0)) throw data::DataError("model config: init_scale must be > 0");
}

TrackerModel::TrackerModel(const LmConfig& config, std::size_t vocab_size)
    : config_(config), vocab_size_(vocab_size) {
  config_.validate();
  const std::size_t h = config_.hidden;
  const std::size_t dh = h / config_.heads;
  Init init(config_.seed, config_.init_scale);
  token_embedding = init.normal("lm.tok_emb", vocab_size, h);
  position_embedding = init.normal("lm.pos_emb", config_.context, h);
  for (std::size_t l = 0; l < config_.layers; ++l) {
    const std::string p = "lm.block" + std::to_string(l);
    Block b;
    b.ln1_gain = Init::constant(p + ".ln1.gain", h, 1.0);
    b.ln1_bias = Init::constant(p + ".ln1.bias", h, 0.0);
    for (std::size_t a = 0; a < config_.heads; ++a) {
      const std::string hp = p + ".attn" + std::to_string(a);
      b.heads.push_back({init.normal(hp + ".q", h, dh), init.normal(hp + ".k", h, dh),
                         init.normal(hp + ".v", h, dh)});
    }
    b.proj = init.normal(p + ".proj", h, h);
    b.proj_bias = Init::constant(p + ".proj.bias", h, 0.0);
    b.ln2_gain = Init::constant(p + ".ln2.gain", h, 1.0);
    b.ln2_bias = Init::constant(p + ".ln2.bias", h, 0.0);
    b.ff_in = init.normal(p + ".ff_in", h, h * config_.ff_mult);
    b.ff_in_bias = Init::constant(p + ".ff_in.bias", h * config_.ff_mult, 0.0);
    b.ff_out = init.normal(p + ".ff_out", h * config_.ff_mult, h);
    b.ff_out_bias = Init::constant(p + ".ff_out.bias", h, 0.0);
    blocks.push_back(std::move(b));
  }
  final_gain = Init::constant("lm.final.gain", h, 1.0);
  final_bias = Init::constant("lm.final.bias", h, 0.0);
  head_weight = init.normal("lm.head", 2 * h, vocab_size);
  head_bias = Init::constant("lm.head.bias", vocab_size, 0.0);
}

std::vector<Parameter*> TrackerModel::parameters() {
  std::vector<Parameter*> out{&token_embedding, &position_embedding};
  for (Block& b : blocks) {
    out.insert(out.end(), {&b.ln1_gain, &b.ln1_bias});
    for (AttentionHead& a : b.heads) out.insert(out.end(), {&a.query, &a.key, &a.value});
    out.insert(out.end(), {&b.proj, &b.proj_bias, &b.ln2_gain, &b.ln2_bias, &b.ff_in,
                           &b.ff_in_bias, &b.ff_out, &b.ff_out_bias});
  }
  out.insert(out.end(), {&final_gain, &final_bias, &head_weight, &head_bias});
  return out;
}

Var causal_forward(Tape& tape, TrackerModel& model, std::span<const data::TokenId> tokens) {
  const std::size_t len = tokens.size();
  if (len == 0) throw ContractViolation("causal_forward: empty input");
  if (len > model.config().context) {
    throw ContractViolation("causal_forward: " + std::to_string(len) +
                            " tokens exceed context length " +
                            std::to_string(model.config().context));
  }
  std::vector<std::size_t> positions(len);
  for (std::size_t i = 0; i < len; ++i) positions[i] = i;
  Var x = ad::gather_rows(tape.parameter(model.token_embedding), tokens) +
          ad::gather_rows(tape.parameter(model.position_embedding), positions);

  Matrix causal(len, len);
  for (std::size_t i = 0; i < len; ++i)
    for (std::size_t j = 0; j <= i; ++j) causal(i, j) = 1.0;
  const double inv_sqrt_dh =
      1.0 / std::sqrt(static_cast<double>(model.hidden() / model.config().heads));

  for (Block& b : model.blocks) {
    Var a = ad::layer_norm_rows(x, tape.parameter(b.ln1_gain), tape.parameter(b.ln1_bias));
    std::vector<Var> head_out;
    for (AttentionHead& h : b.heads) {
      Var q = ad::matmul(a, tape.parameter(h.query));
      Var k = ad::matmul(a, tape.parameter(h.key));
      Var v = ad::matmul(a, tape.parameter(h.value));
      Var w = ad::masked_row_softmax(ad::scale(ad::matmul_nt(q, k), inv_sqrt_dh), causal);
      head_out.push_back(ad::matmul(w, v));
    }
    Var attn = head_out.size() == 1 ? head_out.front() : ad::concat_cols(head_out);
    x = x + ad::add_row(ad::matmul(attn, tape.parameter(b.proj)), tape.parameter(b.proj_bias));
    Var m = ad::layer_norm_rows(x, tape.parameter(b.ln2_gain), tape.parameter(b.ln2_bias));
    Var f = ad::gelu(ad::add_row(ad::matmul(m, tape.parameter(b.ff_in)), tape.parameter(b.ff_in_bias)));
    x = x + ad::add_row(ad::matmul(f, tape.parameter(b.ff_out)), tape.parameter(b.ff_out_bias));
  }
  return ad::layer_norm_rows(x, tape.parameter(model.final_gain), tape.parameter(model.final_bias));
}

}  // namespace dstgat::model
