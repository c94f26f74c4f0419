#include <algorithm>
#include <set>

#include "doctest.h"
#include "dstgat/data/serialization.hpp"
#include "dstgat/data/synth.hpp"
#include "dstgat/data/text.hpp"
#include "dstgat/data/tokenizer.hpp"
#include "oracles.hpp"

using namespace dstgat;
using namespace dstgat::data;

namespace {

Ontology demo_ontology() {
  return Ontology({"hotel", "taxi"},
                  {SlotSpec{"hotel", "name", "hotel name", {0, 1}},
                   SlotSpec{"taxi", "departure", "taxi departure", {2}}},
                  {"Demo Hotel", "Old Mill", "18 : 00"});
}

Dialogue three_turns(std::size_t slots) {
  Dialogue d{"d1", {}};
  for (int i = 1; i <= 3; ++i) {
    d.turns.push_back({"user says u" + std::to_string(i), "system says s" + std::to_string(i),
                       BeliefState(slots)});
  }
  return d;
}

std::vector<std::string> words(const Tokenizer& tok, const TokenSequence& ids) {
  std::vector<std::string> out;
  for (TokenId id : ids) out.push_back(tok.token(id));
  return out;
}

bool contains_phrase(const std::string& text, const std::string& phrase) {
  const auto t = split_whitespace(text), p = split_whitespace(phrase);
  return std::search(t.begin(), t.end(), p.begin(), p.end()) != t.end();
}

}  // namespace

TEST_CASE("ontology validation") {
  CHECK_THROWS_AS(Ontology({"hotel"}, {SlotSpec{"hotel", "area", "", {0}}}, {"none"}), DataError);
  CHECK_THROWS_AS(Ontology({"hotel"}, {SlotSpec{"taxi", "area", "", {}}}, {}), DataError);
  CHECK_THROWS_AS(Ontology({"hotel"}, {SlotSpec{"hotel", "area", "", {3}}}, {"x"}), DataError);
  CHECK_THROWS_AS(Ontology({"hotel"},
                           {SlotSpec{"hotel", "area", "", {}}, SlotSpec{"hotel", "area", "", {}}},
                           {}),
                  DataError);
  const Ontology o({"hotel"}, {SlotSpec{"hotel", "area", "", {}}}, {});
  CHECK(o.slot(0).description == "hotel area");
  CHECK(o.slot(0).token() == "<hotel-area>");
}

TEST_CASE("ontology parse errors carry a line number") {
  try {
    parse_ontology("{\n \"domains\": [\"hotel\"],\n \"slots\": [\n oops ]}");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
  }
  CHECK_THROWS_AS(parse_ontology(R"({"domains":["hotel"],"slots":[{"domain":"hotel","slot":"area","candidates":["north"]}],"values":[]})"),
                  DataError);
  const Ontology o = demo_ontology();
  CHECK(parse_ontology(dump_ontology(o)) == o);
}

TEST_CASE("corpus round-trips and rejects unknown slots") {
  const Ontology o = demo_ontology();
  Dialogue d = three_turns(2);
  d.turns[1].state.set(0, "Demo Hotel");
  d.turns[2].state.set(0, "Demo Hotel");
  d.turns[2].state.set(1, "18 : 00");
  const Corpus c{d};
  const Corpus back = parse_corpus(dump_corpus(c, o), o);
  REQUIRE(back.size() == 1);
  CHECK(back[0].turns[2].state == d.turns[2].state);
  CHECK(back[0].turns[0].user == d.turns[0].user);
  CHECK_THROWS_AS(parse_corpus(R"({"id":"x","turns":[{"user":"a","system":"b","state":{"bus-day":"monday"}}]})", o),
                  DataError);
}

TEST_CASE("belief states normalize values") {
  BeliefState s(2);
  CHECK(s.value(0) == "none");
  s.set(0, "  Demo   Hotel ");
  CHECK(s.value(0) == "Demo Hotel");
  s.set(1, "   ");
  CHECK_FALSE(s.filled(1));
  CHECK(s.filled_count() == 1);
}

TEST_CASE("tokenizer layout") {
  const Ontology o = demo_ontology();
  const Tokenizer tok = build_vocab({three_turns(2)}, o);
  CHECK(tok.token(0) == "<PAD>");
  CHECK(tok.token(7) == "<EOS>");
  CHECK(tok.token(8) == "<hotel-name>");
  CHECK(tok.token(9) == "<taxi-departure>");
  CHECK(tok.is_special(tok.id("<hotel-name>")));
  CHECK_FALSE(tok.is_special(tok.id("hotel")));
  CHECK(tok.id("never-seen") == tok.unk());
  CHECK(tok.decode(tok.encode("hotel  name Demo Hotel")) == "hotel name Demo Hotel");
  CHECK_THROWS_AS(Tokenizer({"<UNK>", "<PAD>"}), DataError);
}

TEST_CASE("history is most recent first and truncates whole blocks") {
  const Ontology o = demo_ontology();
  const Dialogue d = three_turns(2);
  const Tokenizer tok = build_vocab({d}, o);
  const auto h = words(tok, serialize_history(d, 3, tok));
  const std::vector<std::string> want = {"user", "says", "u3", "<SYS>", "system", "says", "s2",
                                         "<USR>", "user", "says", "u2", "<SYS>", "system", "says",
                                         "s1", "<USR>", "user", "says", "u1"};
  CHECK(h == want);
  CHECK(words(tok, serialize_history(d, 1, tok)) == std::vector<std::string>{"user", "says", "u1"});
  // Budget for u3 plus one block.
  const auto cut = words(tok, serialize_history(d, 3, tok, 12));
  CHECK(cut == std::vector<std::string>(want.begin(), want.begin() + 11));
  CHECK(serialize_history(d, 3, tok, 2).size() == 2);
  CHECK_THROWS_AS(serialize_history(d, 4, tok), DataError);
}

TEST_CASE("slot prompt records the slot-token positions") {
  const Ontology o = demo_ontology();
  const Tokenizer tok = build_vocab({}, o);
  const SlotPrompt p = slot_prompt_string(o, tok);
  CHECK(words(tok, p.tokens) == std::vector<std::string>{"hotel", "name", "<hotel-name>", "taxi",
                                                         "departure", "<taxi-departure>"});
  CHECK(p.slot_positions == std::vector<std::size_t>{2, 5});
}

TEST_CASE("state string of the worked example") {
  const Ontology o = demo_ontology();
  const Tokenizer tok = build_vocab({}, o);
  BeliefState s(2);
  s.set(0, "Demo Hotel");
  s.set(1, "18 : 00");
  CHECK(tok.decode(serialize_state(s, o, tok)) ==
        "hotel name Demo Hotel <SEP> taxi departure 18 : 00 <SEP> <EOS>");
  const ParsedState p = parse_state(serialize_state(s, o, tok), o, tok);
  CHECK(p.state == s);
  CHECK(p.warnings.empty());
}

TEST_CASE("parse_state repairs malformed output") {
  const Ontology o = demo_ontology();
  const Tokenizer tok = build_vocab({}, o);
  auto parse = [&](const std::string& text) { return parse_state(tok.encode(text), o, tok); };

  ParsedState p = parse("taxi departure 18 : 00 <SEP>");
  CHECK(p.state.value(0) == "none");
  CHECK(p.state.value(1) == "18 : 00");
  CHECK_FALSE(p.warnings.empty());

  p = parse("hotel name <SEP> <EOS> taxi");
  CHECK(p.state.value(0) == "none");
  CHECK(p.warnings.size() >= 2);

  p = parse("");
  CHECK(p.state == BeliefState(2));
  CHECK_FALSE(p.warnings.empty());
}

TEST_CASE("sample selection") {
  Corpus c{three_turns(1), three_turns(1)};
  c[1].turns.pop_back();
  CHECK(turn_samples(c).size() == 5);
  const auto last = last_turn_filter(c);
  CHECK(last == std::vector<TurnSample>{{0, 3}, {1, 2}});
}

TEST_CASE("synthetic corpus properties") {
  SynthConfig cfg;
  cfg.dialogue_count = 150;
  cfg.seed = 11;
  const SynthCorpus a = generate_synthetic_corpus(cfg);
  const SynthCorpus b = generate_synthetic_corpus(cfg);
  CHECK(dump_corpus(a.corpus, a.ontology) == dump_corpus(b.corpus, b.ontology));
  CHECK(a.pairs.size() == cfg.slots_per_domain);
  CHECK(last_turn_filter(a.corpus).size() == a.corpus.size());

  for (const Dialogue& d : a.corpus) {
    CHECK(d.turn_count() >= cfg.min_turns);
    CHECK(d.turn_count() <= cfg.max_turns);
    std::string said;
    for (std::size_t t = 0; t < d.turn_count(); ++t) {
      said += " " + d.turns[t].user;
      for (std::size_t i = 0; i < a.ontology.slot_count(); ++i) {
        const std::string& v = d.turns[t].state.value(i);
        if (t > 0 && d.turns[t - 1].state.filled(i)) CHECK(d.turns[t - 1].state.value(i) == v);
        if (v != "none") CHECK(contains_phrase(said, v));
      }
    }
  }

  cfg.seed = 12;
  CHECK(dump_corpus(generate_synthetic_corpus(cfg).corpus, a.ontology) !=
        dump_corpus(a.corpus, a.ontology));
}

TEST_CASE("rho controls agreement of paired slots") {
  SynthConfig cfg;
  cfg.dialogue_count = 1000;
  cfg.rho = 1.0;
  auto agreement = [&](const SynthCorpus& s) {
    std::size_t both = 0, same = 0;
    for (const Dialogue& d : s.corpus) {
      const BeliefState& st = d.turns.back().state;
      for (auto [x, y] : s.pairs) {
        if (!st.filled(x) || !st.filled(y)) continue;
        ++both;
        same += st.value(x) == st.value(y);
      }
    }
    return static_cast<double>(same) / static_cast<double>(both);
  };
  CHECK(agreement(generate_synthetic_corpus(cfg)) == 1.0);
  cfg.rho = 0.0;
  // Independent draws from a pool of 4 agree a quarter of the time.
  CHECK(agreement(generate_synthetic_corpus(cfg)) == doctest::Approx(0.25).epsilon(0.2));
  cfg.rho = 1.5;
  CHECK_THROWS_AS(generate_synthetic_corpus(cfg), DataError);
}
