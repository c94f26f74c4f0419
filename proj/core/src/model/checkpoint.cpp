#include "dstgat/model/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>

#include "json.hpp"

namespace dstgat::model {

namespace {

constexpr char kMagic[8] = {'D', 'S', 'T', 'G', 'A', 'T', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

using nlohmann::json;

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& is, const std::string& what) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw data::DataError("checkpoint truncated while reading " + what);
  }
  return v;
}

std::string get_bytes(std::istream& is, std::uint64_t n, const std::string& what) {
  if (n > (1ull << 32)) throw data::DataError("checkpoint: implausible length for " + what);
  std::string s(n, '\0');
  if (n && !is.read(s.data(), static_cast<std::streamsize>(n))) {
    throw data::DataError("checkpoint truncated while reading " + what);
  }
  return s;
}

json header_of(Tracker& t) {
  const LmConfig& lm = t.lm().config();
  const graph::GatConfig& g = t.gat_config();
  return json{
      {"lm",
       {{"layers", lm.layers},
        {"heads", lm.heads},
        {"hidden", lm.hidden},
        {"context", lm.context},
        {"ff_mult", lm.ff_mult},
        {"seed", lm.seed},
        {"init_scale", lm.init_scale}}},
      {"gat",
       {{"type", graph::to_string(g.type)},
        {"layers", g.layers},
        {"heads", g.heads},
        {"hops", g.hops},
        {"activation", graph::to_string(g.activation)},
        {"activation_slope", g.activation_slope},
        {"attention_slope", g.attention_slope}}},
      {"vocabulary", t.tokenizer().vocabulary()},
      {"ontology", data::dump_ontology(t.ontology())},
  };
}

}  // namespace

void save_checkpoint(Tracker& tracker, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw data::DataError("cannot write checkpoint " + path.string());
  const std::string header = header_of(tracker).dump();
  os.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(os, kVersion);
  put<std::uint64_t>(os, header.size());
  os.write(header.data(), static_cast<std::streamsize>(header.size()));
  const auto params = tracker.parameters();
  put<std::uint64_t>(os, params.size());
  for (const Parameter* p : params) {
    put<std::uint64_t>(os, p->name().size());
    os.write(p->name().data(), static_cast<std::streamsize>(p->name().size()));
    put<std::uint64_t>(os, p->value.rows());
    put<std::uint64_t>(os, p->value.cols());
    os.write(reinterpret_cast<const char*>(p->value.data()),
             static_cast<std::streamsize>(p->value.size() * sizeof(double)));
  }
  if (!os) throw data::DataError("failed writing checkpoint " + path.string());
}

std::unique_ptr<Tracker> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw data::DataError("cannot open checkpoint " + path.string());
  char magic[sizeof kMagic];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw data::DataError(path.string() + " is not a checkpoint");
  }
  const auto version = get<std::uint32_t>(is, "version");
  if (version != kVersion) {
    throw data::DataError("unsupported checkpoint version " + std::to_string(version));
  }
  const std::string header_text = get_bytes(is, get<std::uint64_t>(is, "header"), "header");

  std::unique_ptr<Tracker> tracker;
  try {
    const json h = json::parse(header_text);
    LmConfig lm;
    const json& l = h.at("lm");
    lm.layers = l.at("layers");
    lm.heads = l.at("heads");
    lm.hidden = l.at("hidden");
    lm.context = l.at("context");
    lm.ff_mult = l.at("ff_mult");
    lm.seed = l.at("seed");
    lm.init_scale = l.at("init_scale");
    graph::GatConfig gat;
    const json& g = h.at("gat");
    gat.type = graph::parse_graph_type(g.at("type").get<std::string>());
    gat.layers = g.at("layers");
    gat.heads = g.at("heads");
    gat.hops = g.at("hops");
    gat.activation = graph::parse_activation(g.at("activation").get<std::string>());
    gat.activation_slope = g.at("activation_slope");
    gat.attention_slope = g.at("attention_slope");
    tracker = std::make_unique<Tracker>(
        lm, gat, data::parse_ontology(h.at("ontology").get<std::string>()),
        data::Tokenizer(h.at("vocabulary").get<std::vector<std::string>>()));
  } catch (const json::exception& e) {
    throw data::DataError("checkpoint header: " + std::string(e.what()));
  }

  std::map<std::string, Parameter*> by_name;
  for (Parameter* p : tracker->parameters()) by_name[p->name()] = p;
  const auto count = get<std::uint64_t>(is, "parameter count");
  if (count != by_name.size()) {
    throw data::DataError("checkpoint holds " + std::to_string(count) + " parameters, model has " +
                          std::to_string(by_name.size()));
  }
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::string name = get_bytes(is, get<std::uint64_t>(is, "name length"), "name");
    const auto rows = get<std::uint64_t>(is, name + " rows");
    const auto cols = get<std::uint64_t>(is, name + " cols");
    auto it = by_name.find(name);
    if (it == by_name.end()) throw data::DataError("checkpoint: unexpected parameter " + name);
    Matrix& m = it->second->value;
    if (rows != m.rows() || cols != m.cols()) {
      throw data::DataError("checkpoint: " + name + " is " + std::to_string(rows) + "x" +
                            std::to_string(cols) + ", model expects " + m.shape_string());
    }
    if (!is.read(reinterpret_cast<char*>(m.data()),
                 static_cast<std::streamsize>(m.size() * sizeof(double)))) {
      throw data::DataError("checkpoint truncated in " + name);
    }
    by_name.erase(it);
  }
  return tracker;
}

}  // namespace dstgat::model
