#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "dstgat/data/synth.hpp"
#include "dstgat/model/checkpoint.hpp"
#include "dstgat/numeric/gradcheck.hpp"
#include "oracles.hpp"

using namespace dstgat;
using namespace dstgat::model;

namespace {

data::Ontology demo_ontology() {
  using data::SlotSpec;
  return data::Ontology({"hotel", "taxi"},
                        {SlotSpec{"hotel", "name", "hotel name", {0, 1}},
                         SlotSpec{"taxi", "departure", "taxi departure", {2}}},
                        {"Demo Hotel", "Old Mill", "18 : 00"});
}

data::Dialogue demo_dialogue() {
  data::Dialogue d{"demo", {}};
  data::BeliefState s(2);
  s.set(0, "Demo Hotel");
  d.turns.push_back({"i want the Demo Hotel", "ok", s});
  s.set(1, "18 : 00");
  d.turns.push_back({"a taxi at 18 : 00", "done", s});
  return d;
}

LmConfig small_lm(std::size_t hidden = 8) {
  LmConfig c;
  c.layers = 1;
  c.heads = 2;
  c.hidden = hidden;
  c.context = 64;
  c.ff_mult = 2;
  c.seed = 3;
  return c;
}

std::vector<std::string> aligned_words(const InjectionAlignment& a, const data::TokenSequence& y,
                                       const data::Tokenizer& tok, std::size_t slot) {
  std::vector<std::string> out;
  for (std::size_t p = 0; p < a.size(); ++p)
    if (a.slot_at[p] == slot) out.push_back(tok.token(y[p]));
  return out;
}

struct Fixture {
  data::Ontology ontology = demo_ontology();
  data::Dialogue dialogue = demo_dialogue();
  data::Tokenizer tokenizer = data::build_vocab({dialogue}, ontology);
};

}  // namespace

TEST_CASE("lm config validation") {
  LmConfig c;
  c.hidden = 10;
  c.heads = 3;
  CHECK_THROWS(c.validate());
  c.heads = 2;
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("initialization shapes and determinism") {
  LmConfig c = small_lm(64);
  c.heads = 4;
  TrackerModel a(c, 100), b(c, 100);
  CHECK(a.token_embedding.value.rows() == 100);
  CHECK(a.token_embedding.value.cols() == 64);
  CHECK(a.head_weight.value.rows() == 128);
  CHECK(a.head_weight.value.cols() == 100);
  auto pa = a.parameters(), pb = b.parameters();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->value == pb[i]->value);
  c.seed = 4;
  TrackerModel other(c, 100);
  CHECK_FALSE(other.token_embedding.value == a.token_embedding.value);
}

TEST_CASE("causal forward") {
  TrackerModel m(small_lm(), 20);
  const std::vector<data::TokenId> seq = {8, 9, 10, 11, 12, 13};
  Tape t(false);
  const Matrix h = causal_forward(t, m, seq).value();
  CHECK(h.rows() == 6);
  CHECK(h.all_finite());
  for (std::size_t p = 0; p + 1 < seq.size(); ++p) {
    auto changed = seq;
    changed[p + 1] = 19;
    Tape t2(false);
    const Matrix h2 = causal_forward(t2, m, changed).value();
    for (std::size_t r = 0; r <= p; ++r)
      for (std::size_t c = 0; c < h.cols(); ++c) CHECK(h2(r, c) == h(r, c));
  }
  Tape t3(false);
  CHECK(causal_forward(t3, m, std::vector<data::TokenId>{5}).rows() == 1);
  CHECK_THROWS_AS(causal_forward(t3, m, std::vector<data::TokenId>(65, 8)), ContractViolation);
}

TEST_CASE("injection alignment") {
  Fixture f;
  data::BeliefState s(2);
  s.set(1, "18 : 00");
  const auto y = data::serialize_state(s, f.ontology, f.tokenizer);
  const InjectionAlignment a = build_injection_alignment(y, f.ontology, f.tokenizer);
  REQUIRE(a.size() == y.size());
  // A 'none' value is one token; the closing <SEP> step also carries the slot.
  CHECK(aligned_words(a, y, f.tokenizer, 0) == std::vector<std::string>{"none", "<SEP>"});
  CHECK(aligned_words(a, y, f.tokenizer, 1) == std::vector<std::string>{"18", ":", "00", "<SEP>"});
  for (std::size_t p = 0; p < y.size(); ++p) {
    const std::string& w = f.tokenizer.token(y[p]);
    if (w == "hotel" || w == "name" || w == "taxi" || w == "departure" || w == "<EOS>") {
      CHECK_FALSE(a.slot_at[p].has_value());
    }
  }
  auto broken = y;
  broken.pop_back();
  CHECK_THROWS_AS(build_injection_alignment(broken, f.ontology, f.tokenizer), data::DataError);
  broken = y;
  broken[0] = f.tokenizer.id("taxi");
  CHECK_THROWS_AS(build_injection_alignment(broken, f.ontology, f.tokenizer), data::DataError);
}

TEST_CASE("decode injection is position local") {
  TrackerModel m(small_lm(), 20);
  oracle::Rng rng(1);
  InjectionAlignment a{{std::nullopt, 0, 0, 1, std::nullopt}};
  Tape t(false);
  Var hidden = t.constant(oracle::random_matrix(rng, 5, 8));
  const Matrix g = oracle::random_matrix(rng, 2, 8);
  const Matrix base = decode_with_injection(m, hidden, t.constant(g), a).value();
  CHECK(base.rows() == 5);
  CHECK(base.cols() == 20);

  Matrix g2 = g;
  g2(0, 3) += 1.0;
  const Matrix moved = decode_with_injection(m, hidden, t.constant(g2), a).value();
  for (std::size_t p = 0; p < 5; ++p) {
    bool same = true;
    for (std::size_t c = 0; c < 20; ++c) same = same && moved(p, c) == base(p, c);
    CHECK(same == (a.slot_at[p] != 0u));
  }

  const Matrix zero_g = decode_with_injection(m, hidden, t.constant(Matrix(2, 8)), a).value();
  const InjectionAlignment none{std::vector<std::optional<std::size_t>>(5)};
  CHECK(decode_with_injection(m, hidden, t.constant(g), none).value() == zero_g);
  CHECK_THROWS_AS(decode_with_injection(m, hidden, t.constant(Matrix(1, 8)), a), DimensionError);
}

TEST_CASE("value embeddings average token rows") {
  Fixture f;
  Tracker tr(small_lm(), {graph::GraphType::kDSVGraph, 1, 1, 1}, f.ontology, f.tokenizer);
  Tape t(false);
  const Matrix v = compute_value_embeddings(t, tr).value();
  const Matrix& emb = tr.lm().token_embedding.value;
  const auto demo = f.tokenizer.id("Demo"), hotel = f.tokenizer.id("Hotel");
  for (std::size_t c = 0; c < 8; ++c)
    CHECK(v(0, c) == doctest::Approx((emb(demo, c) + emb(hotel, c)) / 2).epsilon(1e-15));
}

TEST_CASE("slot features come from the slot-token positions") {
  Fixture f;
  Tracker tr(small_lm(), {graph::GraphType::kDSGraph, 1, 1, 1}, f.ontology, f.tokenizer);
  Tape t(false);
  const Matrix xs = pre_extract_slot_features(t, tr, f.dialogue, 2).value();
  CHECK(xs.rows() == 2);
  auto seq = data::serialize_history(f.dialogue, 2, f.tokenizer);
  const std::size_t offset = seq.size() + 1;
  seq.push_back(f.tokenizer.boc());
  seq.insert(seq.end(), tr.prompt().tokens.begin(), tr.prompt().tokens.end());
  const Matrix h = causal_forward(t, tr.lm(), seq).value();
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t c = 0; c < 8; ++c) CHECK(xs(i, c) == h(offset + tr.prompt().slot_positions[i], c));
}

TEST_CASE("loss covers the state tokens only") {
  Fixture f;
  Tracker tr(small_lm(), {}, f.ontology, f.tokenizer);
  CHECK(tr.gat().parameters().empty());
  Tape t(false);
  const double loss = sample_loss(t, tr, f.dialogue, 2)->value()[0];
  CHECK(loss > 0.0);

  const auto y = data::serialize_state(f.dialogue.turns[1].state, f.ontology, f.tokenizer);
  auto seq = data::serialize_history(f.dialogue, 2, f.tokenizer);
  const std::size_t start = seq.size();
  seq.push_back(f.tokenizer.bos());
  seq.insert(seq.end(), y.begin(), y.end() - 1);
  Tape t2(false);
  const Matrix h = causal_forward(t2, tr.lm(), seq).value();
  double want = 0.0;
  for (std::size_t p = 0; p < y.size(); ++p) {
    std::vector<double> logits(f.tokenizer.size());
    double mx = -INFINITY;
    for (std::size_t v = 0; v < logits.size(); ++v) {
      double s = tr.lm().head_bias.value(0, v);
      for (std::size_t c = 0; c < 8; ++c) s += h(start + p, c) * tr.lm().head_weight.value(c, v);
      logits[v] = s;
      mx = std::max(mx, s);
    }
    double z = 0.0;
    for (double l : logits) z += std::exp(l - mx);
    want += -(logits[y[p]] - mx - std::log(z));
  }
  CHECK(loss == doctest::Approx(want / static_cast<double>(y.size())).epsilon(1e-12));
}

TEST_CASE("end-to-end gradients") {
  Fixture f;
  LmConfig c = small_lm();
  c.init_scale = 0.3;
  for (auto type : {graph::GraphType::kDSGraph, graph::GraphType::kDSVGraph}) {
    Tracker tr(c, {type, 1, 1, 2}, f.ontology, f.tokenizer);
    std::vector<Parameter*> params = tr.gat().parameters();
    params.push_back(&tr.lm().head_weight);
    params.push_back(&tr.lm().head_bias);
    const auto r = gradient_check([&](Tape& t) { return *sample_loss(t, tr, f.dialogue, 2); },
                                  params, 1e-5, 1e-3);
    CHECK_MESSAGE(r.passed, r.summary());
  }
}

TEST_CASE("untrained decoding is well formed") {
  Fixture f;
  Tracker tr(small_lm(), {graph::GraphType::kDSVGraph, 1, 1, 2}, f.ontology, f.tokenizer);
  const Prediction p = predict_state(tr, f.dialogue, 2);
  CHECK(p.state.size() == 2);
  CHECK(p.warnings.empty());
  CHECK(p.generated.back() == f.tokenizer.eos());
}

TEST_CASE("training reduces loss and is deterministic") {
  data::SynthConfig sc;
  sc.dialogue_count = 12;
  sc.domain_count = 2;
  sc.slots_per_domain = 2;
  sc.seed = 5;
  const auto syn = data::generate_synthetic_corpus(sc);
  const auto tok = data::build_vocab(syn.corpus, syn.ontology);
  TrainConfig tc;
  tc.regime = Regime::kLastTurn;
  tc.epochs = 3;
  tc.lr_lm = tc.lr_gat = 3e-3;
  auto run = [&] {
    auto tr = std::make_unique<Tracker>(small_lm(16), graph::GatConfig{graph::GraphType::kDSVGraph, 1, 1, 2},
                                        syn.ontology, tok);
    const TrainLog log = train(*tr, syn.corpus, {}, tc);
    return std::pair{std::move(tr), log};
  };
  auto [a, la] = run();
  auto [b, lb] = run();
  CHECK(la.epochs.back().train_loss < la.initial_train_loss);
  for (const EpochLog& e : la.epochs) CHECK(e.samples == syn.corpus.size());
  CHECK(la.epochs.back().train_loss == lb.epochs.back().train_loss);
  auto pa = a->parameters(), pb = b->parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->value == pb[i]->value);
  CHECK(TrainConfig{}.resolved_epochs() == 8);
  TrainConfig last;
  last.regime = Regime::kLastTurn;
  CHECK(last.resolved_epochs() == 36);
}

TEST_CASE("checkpoints round-trip and reject mismatches") {
  Fixture f;
  Tracker tr(small_lm(), {graph::GraphType::kDSVGraph, 1, 2, 2}, f.ontology, f.tokenizer);
  const auto dir = std::filesystem::temp_directory_path() / "dstgat_ckpt_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "m.ckpt";
  save_checkpoint(tr, path);
  auto back = load_checkpoint(path);
  CHECK(back->ontology() == f.ontology);
  CHECK(back->tokenizer() == f.tokenizer);
  CHECK(back->gat_config().name() == "L1P2K2-DSVGraph");
  auto pa = tr.parameters(), pb = back->parameters();
  REQUIRE(pa.size() == pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->value == pb[i]->value);
  CHECK(predict_state(*back, f.dialogue, 2).generated == predict_state(tr, f.dialogue, 2).generated);

  // Corrupt the row count of the first parameter record.
  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  const std::string first = pa.front()->name();
  const auto pos = bytes.find(first, 20);
  REQUIRE(pos != std::string::npos);
  bytes[pos + first.size()] ^= 1;
  {
    std::ofstream out(dir / "bad.ckpt", std::ios::binary);
    out << bytes;
  }
  CHECK_THROWS_AS(load_checkpoint(dir / "bad.ckpt"), data::DataError);
  {
    std::ofstream out(dir / "junk.ckpt", std::ios::binary);
    out << "not a checkpoint";
  }
  CHECK_THROWS_AS(load_checkpoint(dir / "junk.ckpt"), data::DataError);
  std::filesystem::remove_all(dir);
}
