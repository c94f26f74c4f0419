#include "dstgat/app/config.hpp"

#include "dstgat/data/text.hpp"
#include "json.hpp"

namespace dstgat::app {

using Json = nlohmann::ordered_json;

namespace {

Json to_json(const RunConfig& c) {
  Json pairs = Json::array();
  for (const auto& [a, b] : c.synth.correlated_pairs) pairs.push_back({a, b});
  return Json{
      {"model",
       {{"layers", c.lm.layers},
        {"heads", c.lm.heads},
        {"hidden", c.lm.hidden},
        {"context", c.lm.context},
        {"ff_mult", c.lm.ff_mult},
        {"seed", c.lm.seed},
        {"init_scale", c.lm.init_scale}}},
      {"graph",
       {{"type", graph::to_string(c.gat.type)},
        {"layers", c.gat.layers},
        {"heads", c.gat.heads},
        {"hops", c.gat.hops},
        {"activation", graph::to_string(c.gat.activation)},
        {"activation_slope", c.gat.activation_slope},
        {"attention_slope", c.gat.attention_slope}}},
      {"train",
       {{"regime", model::to_string(c.train.regime)},
        {"epochs", c.train.epochs},
        {"lr_lm", c.train.lr_lm},
        {"lr_gat", c.train.lr_gat},
        {"batch_size", c.train.batch_size},
        {"seed", c.train.seed},
        {"max_steps", c.train.max_steps},
        {"beta1", c.train.adamw.beta1},
        {"beta2", c.train.adamw.beta2},
        {"epsilon", c.train.adamw.epsilon},
        {"weight_decay", c.train.adamw.weight_decay}}},
      {"synth",
       {{"domain_count", c.synth.domain_count},
        {"slots_per_domain", c.synth.slots_per_domain},
        {"values_per_pool", c.synth.values_per_pool},
        {"rho", c.synth.rho},
        {"correlated_pairs", pairs},
        {"dialogue_count", c.synth.dialogue_count},
        {"min_turns", c.synth.min_turns},
        {"max_turns", c.synth.max_turns},
        {"domain_probability", c.synth.domain_probability},
        {"slot_fill_probability", c.synth.slot_fill_probability},
        {"coreference_probability", c.synth.coreference_probability},
        {"seed", c.synth.seed}}},
      {"split",
       {{"validation_fraction", c.split.validation_fraction},
        {"test_fraction", c.split.test_fraction}}},
      {"paths",
       {{"ontology", c.paths.ontology},
        {"train", c.paths.train},
        {"validation", c.paths.validation},
        {"test", c.paths.test},
        {"checkpoint", c.paths.checkpoint}}},
      {"eval",
       {{"progress_buckets", c.eval.progress_buckets},
        {"max_value_tokens", c.eval.max_value_tokens},
        {"baseline_per_slot", c.eval.baseline_per_slot}}},
      {"analyze",
       {{"model_predictions", c.analyze.model_predictions},
        {"baseline_predictions", c.analyze.baseline_predictions},
        {"window", c.analyze.window},
        {"jaccard_mode", eval::to_string(c.analyze.jaccard_mode)}}},
  };
}

RunConfig from_json(const Json& j) {
  RunConfig c;
  const Json& m = j.at("model");
  c.lm.layers = m.at("layers");
  c.lm.heads = m.at("heads");
  c.lm.hidden = m.at("hidden");
  c.lm.context = m.at("context");
  c.lm.ff_mult = m.at("ff_mult");
  c.lm.seed = m.at("seed");
  c.lm.init_scale = m.at("init_scale");

  const Json& g = j.at("graph");
  c.gat.type = graph::parse_graph_type(g.at("type").get<std::string>());
  c.gat.layers = g.at("layers");
  c.gat.heads = g.at("heads");
  c.gat.hops = g.at("hops");
  c.gat.activation = graph::parse_activation(g.at("activation").get<std::string>());
  c.gat.activation_slope = g.at("activation_slope");
  c.gat.attention_slope = g.at("attention_slope");

  const Json& t = j.at("train");
  c.train.regime = model::parse_regime(t.at("regime").get<std::string>());
  c.train.epochs = t.at("epochs");
  c.train.lr_lm = t.at("lr_lm");
  c.train.lr_gat = t.at("lr_gat");
  c.train.batch_size = t.at("batch_size");
  c.train.seed = t.at("seed");
  c.train.max_steps = t.at("max_steps");
  c.train.adamw.beta1 = t.at("beta1");
  c.train.adamw.beta2 = t.at("beta2");
  c.train.adamw.epsilon = t.at("epsilon");
  c.train.adamw.weight_decay = t.at("weight_decay");

  const Json& s = j.at("synth");
  c.synth.domain_count = s.at("domain_count");
  c.synth.slots_per_domain = s.at("slots_per_domain");
  c.synth.values_per_pool = s.at("values_per_pool");
  c.synth.rho = s.at("rho");
  for (const Json& p : s.at("correlated_pairs")) {
    if (!p.is_array() || p.size() != 2) {
      throw data::DataError("synth.correlated_pairs entries must be [slot, slot]");
    }
    c.synth.correlated_pairs.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
  }
  c.synth.dialogue_count = s.at("dialogue_count");
  c.synth.min_turns = s.at("min_turns");
  c.synth.max_turns = s.at("max_turns");
  c.synth.domain_probability = s.at("domain_probability");
  c.synth.slot_fill_probability = s.at("slot_fill_probability");
  c.synth.coreference_probability = s.at("coreference_probability");
  c.synth.seed = s.at("seed");

  const Json& sp = j.at("split");
  c.split.validation_fraction = sp.at("validation_fraction");
  c.split.test_fraction = sp.at("test_fraction");

  const Json& p = j.at("paths");
  c.paths.ontology = p.at("ontology");
  c.paths.train = p.at("train");
  c.paths.validation = p.at("validation");
  c.paths.test = p.at("test");
  c.paths.checkpoint = p.at("checkpoint");

  const Json& e = j.at("eval");
  c.eval.progress_buckets = e.at("progress_buckets");
  c.eval.max_value_tokens = e.at("max_value_tokens");
  c.eval.baseline_per_slot = e.at("baseline_per_slot");

  const Json& a = j.at("analyze");
  c.analyze.model_predictions = a.at("model_predictions");
  c.analyze.baseline_predictions = a.at("baseline_predictions");
  c.analyze.window = a.at("window");
  c.analyze.jaccard_mode = eval::parse_jaccard_mode(a.at("jaccard_mode").get<std::string>());
  return c;
}

// Copies `from` into `into`, refusing keys that `into` does not have.
void merge_strict(Json& into, const Json& from, const std::string& where) {
  if (!from.is_object()) throw data::DataError(where + ": expected an object");
  for (auto it = from.begin(); it != from.end(); ++it) {
    const std::string key = where.empty() ? it.key() : where + "." + it.key();
    if (!into.contains(it.key())) throw data::DataError("unknown config key '" + key + "'");
    Json& target = into[it.key()];
    if (target.is_object()) {
      merge_strict(target, it.value(), key);
    } else {
      target = it.value();
    }
  }
}

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw data::DataError("override '" + assignment + "' is not key=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  Json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (!node->is_object() || !node->contains(key)) {
      throw data::DataError("unknown config key '" + path + "'");
    }
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  if (node->is_object()) throw data::DataError("override '" + path + "' names a section");
  *node = std::move(value);
}

}  // namespace

void RunConfig::validate() const {
  try {
    lm.validate();
  } catch (const std::exception& e) {
    throw data::DataError(std::string("model: ") + e.what());
  }
  try {
    gat.validate();
  } catch (const std::exception& e) {
    throw data::DataError(std::string("graph: ") + e.what());
  }
  data::validate(synth);
  if (train.batch_size == 0) throw data::DataError("train.batch_size must be >= 1");
  if (!(train.lr_lm >= 0.0) || !(train.lr_gat >= 0.0)) {
    throw data::DataError("learning rates must be >= 0");
  }
  const auto frac_ok = [](double f) { return f >= 0.0 && f < 1.0; };
  if (!frac_ok(split.validation_fraction) || !frac_ok(split.test_fraction) ||
      split.validation_fraction + split.test_fraction >= 1.0) {
    throw data::DataError("split fractions must be in [0, 1) and leave training data");
  }
  if (eval.progress_buckets < 2) throw data::DataError("eval.progress_buckets must be >= 2");
  if (eval.max_value_tokens == 0) throw data::DataError("eval.max_value_tokens must be >= 1");
  if (!(analyze.window > 0.0)) throw data::DataError("analyze.window must be > 0");
}

std::string dump_run_config(const RunConfig& config) { return to_json(config).dump(2) + "\n"; }

RunConfig parse_run_config(std::string_view text, std::span<const std::string> overrides,
                           std::optional<std::uint64_t> seed) {
  Json doc = to_json(RunConfig{});
  try {
    if (!data::normalize_whitespace(text).empty()) {
      Json file;
      try {
        file = Json::parse(text);
      } catch (const Json::parse_error& e) {
        throw data::ParseError(std::string("config: ") + e.what(),
                               data::line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0));
      }
      merge_strict(doc, file, "");
    }
    for (const std::string& o : overrides) apply_override(doc, o);
    if (seed) {
      doc["model"]["seed"] = *seed;
      doc["train"]["seed"] = *seed;
      doc["synth"]["seed"] = *seed;
    }
    RunConfig c = from_json(doc);
    c.validate();
    return c;
  } catch (const Json::exception& e) {
    throw data::DataError(std::string("config: ") + e.what());
  }
}

RunConfig load_run_config(const std::string& path, std::span<const std::string> overrides,
                          std::optional<std::uint64_t> seed) {
  return parse_run_config(path.empty() ? std::string() : data::read_file(path), overrides, seed);
}

}  // namespace dstgat::app
