#include "dstgat/eval/report.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <map>

namespace dstgat::eval {

namespace {

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void append_row(std::string& out, const std::vector<std::string>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += ',';
    out += quote(row[i]);
  }
  out += '\n';
}

void expect_header(const Table& t, const std::vector<std::string>& header, const char* what) {
  if (t.header != header) throw data::DataError(std::string(what) + ": unexpected header");
}

std::size_t parse_count(std::string_view text) {
  std::size_t v = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw data::DataError("not a count: '" + std::string(text) + "'");
  }
  return v;
}

std::size_t slot_by_key(const data::Ontology& ontology, const std::string& key) {
  auto i = ontology.slot_index(key);
  if (!i) throw data::DataError("unknown slot '" + key + "' in report");
  return *i;
}

}  // namespace

std::string format_csv(const Table& table) {
  std::string out;
  append_row(out, table.header);
  for (const auto& row : table.rows) append_row(out, row);
  return out;
}

Table parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, field_started = false;
  std::size_t line = 1;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_field();
      records.push_back(std::move(row));
      row.clear();
      ++line;
    } else {
      field += c;
      field_started = true;
    }
  }
  if (quoted) throw data::ParseError("unterminated quoted field", line);
  if (field_started || !row.empty()) {
    end_field();
    records.push_back(std::move(row));
  }
  if (records.empty()) throw data::ParseError("empty table", 1);
  Table t;
  t.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.header.size()) {
      throw data::ParseError("row has " + std::to_string(records[r].size()) + " fields, header has " +
                                 std::to_string(t.header.size()),
                             r + 1);
    }
    t.rows.push_back(std::move(records[r]));
  }
  return t;
}

std::string format_number(double v) {
  char buf[64];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

double parse_number(std::string_view text) {
  const std::string s(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw data::DataError("not a number: '" + s + "'");
  }
  return v;
}

Table summary_table(const MetricsReport& report) {
  return {{"metric", "value"},
          {{"joint_accuracy", format_number(report.joint_accuracy)},
           {"slot_accuracy", format_number(report.slot_accuracy)},
           {"turns", std::to_string(report.turns)},
           {"slots", std::to_string(report.slots)}}};
}

Table per_slot_table(const MetricsReport& report, const data::Ontology& ontology,
                     std::span<const double> baseline) {
  if (report.per_slot.size() != ontology.slot_count()) {
    throw data::DataError("per_slot_table: report has " + std::to_string(report.per_slot.size()) +
                          " slots, ontology " + std::to_string(ontology.slot_count()));
  }
  std::vector<double> delta;
  if (!baseline.empty()) delta = per_slot_delta(report.per_slot, baseline);
  Table t{{"slot", "accuracy", "delta"}, {}};
  for (std::size_t i = 0; i < report.per_slot.size(); ++i) {
    t.rows.push_back({ontology.slot(i).key(), format_number(report.per_slot[i]),
                      delta.empty() ? "" : format_number(delta[i])});
  }
  return t;
}

Table progress_table(const MetricsReport& report) {
  Table t{{"bucket_lower", "bucket_upper", "accuracy", "n"}, {}};
  for (const ProgressBucket& b : report.progress) {
    t.rows.push_back({format_number(b.lower), format_number(b.upper), format_number(b.accuracy),
                      std::to_string(b.count)});
  }
  return t;
}

Table jaccard_table(std::span<const JaccardEntry> entries, const data::Ontology& ontology) {
  Table t{{"slot1", "value1", "slot2", "value2", "jaccard", "support"}, {}};
  for (const JaccardEntry& e : entries) {
    t.rows.push_back({ontology.slot(e.slot1).key(), e.value1, ontology.slot(e.slot2).key(),
                      e.value2, format_number(e.score), std::to_string(e.support)});
  }
  return t;
}

Table window_table(std::span<const WindowPoint> curve) {
  Table t{{"jaccard", "mean_delta", "n"}, {}};
  for (const WindowPoint& w : curve) {
    t.rows.push_back({format_number(w.jaccard), format_number(w.mean_delta), std::to_string(w.count)});
  }
  return t;
}

MetricsReport read_metrics_report(const Table& summary, const Table& per_slot,
                                  const Table& progress) {
  expect_header(summary, {"metric", "value"}, "summary table");
  expect_header(per_slot, {"slot", "accuracy", "delta"}, "per-slot table");
  expect_header(progress, {"bucket_lower", "bucket_upper", "accuracy", "n"}, "progress table");
  std::map<std::string, std::string> kv;
  for (const auto& row : summary.rows) kv[row[0]] = row[1];
  for (const char* key : {"joint_accuracy", "slot_accuracy", "turns", "slots"}) {
    if (!kv.count(key)) throw data::DataError(std::string("summary table lacks ") + key);
  }
  MetricsReport r;
  r.joint_accuracy = parse_number(kv["joint_accuracy"]);
  r.slot_accuracy = parse_number(kv["slot_accuracy"]);
  r.turns = parse_count(kv["turns"]);
  r.slots = parse_count(kv["slots"]);
  for (const auto& row : per_slot.rows) r.per_slot.push_back(parse_number(row[1]));
  for (const auto& row : progress.rows) {
    r.progress.push_back({parse_number(row[0]), parse_number(row[1]), parse_number(row[2]),
                          parse_count(row[3])});
  }
  return r;
}

std::vector<JaccardEntry> read_jaccard_table(const Table& table, const data::Ontology& ontology) {
  expect_header(table, {"slot1", "value1", "slot2", "value2", "jaccard", "support"},
                "jaccard table");
  std::vector<JaccardEntry> out;
  for (const auto& row : table.rows) {
    out.push_back({slot_by_key(ontology, row[0]), row[1], slot_by_key(ontology, row[2]), row[3],
                   parse_number(row[4]), parse_count(row[5])});
  }
  return out;
}

std::vector<WindowPoint> read_window_table(const Table& table) {
  expect_header(table, {"jaccard", "mean_delta", "n"}, "window table");
  std::vector<WindowPoint> out;
  for (const auto& row : table.rows) {
    out.push_back({parse_number(row[0]), parse_number(row[1]), parse_count(row[2])});
  }
  return out;
}

}  // namespace dstgat::eval
