#include <cmath>
#include <cstdio>
#include <random>

#include "dstgat/app/commands.hpp"
#include "dstgat/data/serialization.hpp"
#include "dstgat/data/synth.hpp"
#include "dstgat/data/tokenizer.hpp"
#include "dstgat/eval/dependency.hpp"
#include "dstgat/numeric/gradcheck.hpp"

namespace dstgat::app {

namespace {

using Rng = std::mt19937_64;

graph::GraphTopology random_topology(Rng& rng, std::size_t n) {
  Matrix adj(n, n);
  std::bernoulli_distribution edge(0.5);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (edge(rng)) adj(i, j) = adj(j, i) = 1.0;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back("n" + std::to_string(i));
  return {std::vector<graph::NodeKind>(n, graph::NodeKind::kSlot), labels, adj};
}

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  Matrix m(r, c);
  for (double& v : m.values()) v = d(rng);
  return m;
}

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Outcome {
  bool ok = true;
  std::string detail;
  void fail(std::string why) {
    if (ok) detail = std::move(why);
    ok = false;
  }
};

Outcome gradient_suite(Rng& rng) {
  Outcome out;
  double worst = 0.0;
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t n = pick(rng, 2, 5), f = pick(rng, 2, 4);
    graph::GatConfig cfg{graph::GraphType::kDSGraph, pick(rng, 1, 2), pick(rng, 1, 2),
                         pick(rng, 1, 3)};
    graph::GatStack stack(cfg, f, rng());
    const graph::GraphTopology topo = random_topology(rng, n);
    const Matrix x = random_matrix(rng, n, f);
    const Matrix w = random_matrix(rng, n, f);
    auto params = stack.parameters();
    const GradCheckReport r = gradient_check(
        [&](Tape& t) { return ad::sum(ad::hadamard(graph::gat_stack_forward(t.constant(x), topo, stack), w)); },
        params);
    worst = std::max(worst, r.max_relative_error);
    if (!r.passed) out.fail("GAT " + cfg.name() + ": " + r.summary());
  }

  data::SynthConfig sc;
  sc.domain_count = 2;
  sc.slots_per_domain = 2;
  sc.values_per_pool = 2;
  sc.dialogue_count = 1;
  sc.min_turns = sc.max_turns = 2;
  sc.seed = rng();
  const data::SynthCorpus syn = data::generate_synthetic_corpus(sc);
  model::LmConfig lm;
  lm.layers = 1;
  lm.heads = 1;
  lm.hidden = 8;
  lm.context = 128;
  lm.ff_mult = 2;
  lm.init_scale = 0.3;
  lm.seed = rng();
  model::Tracker tracker(lm, {graph::GraphType::kDSVGraph, 1, 1, 2}, syn.ontology,
                         data::build_vocab(syn.corpus, syn.ontology));
  auto params = tracker.parameters();
  const GradCheckReport r = gradient_check(
      [&](Tape& t) { return *model::sample_loss(t, tracker, syn.corpus[0], 2); }, params, 1e-5,
      1e-3);
  worst = std::max(worst, r.max_relative_error);
  if (!r.passed) out.fail("end-to-end: " + r.summary());
  if (out.ok) out.detail = "max relative error " + sci(worst);
  return out;
}

// Attention written out from the definition, independent of the library path.
Matrix direct_attention(const Matrix& x, const Matrix& adj, const Matrix& q, double slope) {
  const std::size_t n = x.rows(), f = x.cols();
  Matrix e(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> logits(n, 0.0);
    double mx = -INFINITY;
    for (std::size_t j = 0; j < n; ++j) {
      if (adj(i, j) == 0.0) continue;
      double s = 0.0;
      for (std::size_t a = 0; a < f; ++a)
        for (std::size_t b = 0; b < f; ++b) s += x(i, a) * q(a, b) * x(j, b);
      logits[j] = s > 0 ? s : slope * s;
      mx = std::max(mx, logits[j]);
    }
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (adj(i, j) != 0.0) z += std::exp(logits[j] - mx);
    for (std::size_t j = 0; j < n; ++j)
      if (adj(i, j) != 0.0) e(i, j) = std::exp(logits[j] - mx) / z;
  }
  return e;
}

Outcome oracle_suite(Rng& rng) {
  Outcome out;
  double worst = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = pick(rng, 2, 6), f = pick(rng, 2, 4), k = pick(rng, 1, 3);
    graph::GatConfig cfg{graph::GraphType::kDSGraph, 1, 1, k};
    graph::GatStack stack(cfg, f, rng());
    graph::GatHeadParams& head = stack.layers()[0].heads[0];
    head.attention.value = random_matrix(rng, f, f);
    const graph::GraphTopology topo = random_topology(rng, n);
    const Matrix x = random_matrix(rng, n, f);

    Tape tape(false);
    Var xv = tape.constant(x);
    Var e = graph::attention_matrix(xv, topo.adjacency(), head, 0.2);
    const Matrix expected_e = direct_attention(x, topo.adjacency(), head.attention.value, 0.2);
    const double de = max_abs_diff(e.value(), expected_e);
    worst = std::max(worst, de);
    if (!(de < 1e-10)) out.fail("attention differs from the direct formula by " + sci(de));

    const Matrix got = graph::head_aggregate(xv, topo.adjacency(), tape.constant(expected_e), head).value();
    Matrix want(n, f);
    for (std::size_t h = 0; h < k; ++h) {
      const Matrix msg = graph::message_passing_oracle(x, topo.adjacency(), expected_e, h);
      const Matrix term = matmul(msg, head.hops[h].value);
      for (std::size_t i = 0; i < want.size(); ++i) want[i] += term[i];
    }
    const double da = max_abs_diff(got, want);
    worst = std::max(worst, da);
    if (!(da < 1e-10)) out.fail("hop aggregation differs from message passing by " + sci(da));
  }
  if (out.ok) out.detail = "max abs difference " + sci(worst);
  return out;
}

Outcome round_trip_suite(Rng& rng) {
  Outcome out;
  data::SynthConfig sc;
  sc.dialogue_count = 20;
  sc.seed = rng();
  const data::SynthCorpus syn = data::generate_synthetic_corpus(sc);
  const data::Tokenizer tok = data::build_vocab(syn.corpus, syn.ontology);
  const data::Ontology& ont = syn.ontology;
  for (int trial = 0; trial < 200; ++trial) {
    data::BeliefState s(ont.slot_count());
    for (std::size_t i = 0; i < ont.slot_count(); ++i) {
      const auto& c = ont.slot(i).candidates;
      const std::size_t v = pick(rng, 0, c.size());
      if (v < c.size()) s.set(i, ont.values()[c[v]]);
    }
    const data::ParsedState p = data::parse_state(data::serialize_state(s, ont, tok), ont, tok);
    if (!(p.state == s) || !p.warnings.empty()) {
      out.fail("state serialization does not round-trip");
      break;
    }
  }
  for (const auto& topo : {graph::build_ds_graph(ont), graph::build_dsv_graph(ont)}) {
    if (!(graph::parse_topology(graph::serialize_topology(topo)) == topo)) {
      out.fail("graph text format does not round-trip");
    }
  }
  if (!(data::parse_corpus(data::dump_corpus(syn.corpus, ont), ont).size() == syn.corpus.size())) {
    out.fail("corpus does not round-trip");
  }
  if (!(data::parse_ontology(data::dump_ontology(ont)) == ont)) out.fail("ontology does not round-trip");
  if (out.ok) out.detail = "200 states, graphs, corpus, ontology";
  return out;
}

Outcome metric_suite(Rng& rng) {
  Outcome out;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t slots = pick(rng, 1, 5), turns = pick(rng, 1, 20);
    std::vector<eval::TurnPrediction> preds;
    std::size_t joint = 0, slot_ok = 0;
    for (std::size_t t = 0; t < turns; ++t) {
      eval::TurnPrediction p{"d", 1, 1, data::BeliefState(slots), data::BeliefState(slots)};
      bool all = true;
      for (std::size_t i = 0; i < slots; ++i) {
        const std::size_t g = pick(rng, 0, 2), q = pick(rng, 0, 2);
        if (g) p.gold.set(i, "v" + std::to_string(g));
        if (q) p.predicted.set(i, "v" + std::to_string(q));
        slot_ok += g == q;
        all = all && g == q;
      }
      joint += all;
      preds.push_back(std::move(p));
    }
    const double j = eval::joint_accuracy(preds), s = eval::slot_accuracy(preds);
    if (j != static_cast<double>(joint) / turns ||
        std::abs(s - static_cast<double>(slot_ok) / (turns * slots)) > 1e-12 || s < j) {
      out.fail("accuracy disagrees with direct counting");
      break;
    }
  }
  // Five turn-level samples for restaurant/hotel pricerange.
  const char* restaurant[] = {"none", "expensive", "moderate", "expensive", "moderate"};
  const char* hotel[] = {"none", "moderate", "expensive", "expensive", "cheap"};
  std::vector<data::BeliefState> samples;
  for (int i = 0; i < 5; ++i) {
    data::BeliefState s(2);
    s.set(0, restaurant[i]);
    s.set(1, hotel[i]);
    samples.push_back(s);
  }
  const auto entry = eval::jaccard_score(samples, 0, "expensive", 1, "expensive");
  if (!entry || entry->score != 0.5 || entry->support != 4) out.fail("pricerange fixture is not 2/4");
  if (out.ok) out.detail = "50 random sets, pricerange fixture 2/4";
  return out;
}

}  // namespace

bool run_selftest(const SelftestOptions& options, std::ostream& log) {
  graph::set_attention_sign_fault(options.attention_sign_fault);
  struct Suite {
    const char* name;
    Outcome (*run)(Rng&);
  };
  const Suite suites[] = {{"gradient", gradient_suite},
                          {"oracle", oracle_suite},
                          {"round-trip", round_trip_suite},
                          {"metrics", metric_suite}};
  bool all = true;
  Rng rng(options.seed);
  for (const Suite& s : suites) {
    Outcome o;
    try {
      o = s.run(rng);
    } catch (const std::exception& e) {
      o.fail(std::string("threw: ") + e.what());
    }
    log << (o.ok ? "PASS " : "FAIL ") << s.name << ": " << o.detail << "\n";
    all = all && o.ok;
  }
  graph::set_attention_sign_fault(false);
  log << (all ? "selftest passed" : "selftest FAILED") << "\n";
  return all;
}

}  // namespace dstgat::app
