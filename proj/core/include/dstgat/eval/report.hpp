#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dstgat/eval/dependency.hpp"
#include "dstgat/eval/metrics.hpp"

namespace dstgat::eval {

/// Comma-separated table with a header row. Fields holding commas, quotes or
/// newlines are double-quoted.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::string format_csv(const Table& table);
/// Throws data::ParseError on unbalanced quotes or ragged rows.
Table parse_csv(std::string_view text);

/// Shortest text that parses back to the same double.
std::string format_number(double v);
double parse_number(std::string_view text);

Table summary_table(const MetricsReport& report);
/// slot, accuracy, delta (delta is empty without a baseline).
Table per_slot_table(const MetricsReport& report, const data::Ontology& ontology,
                     std::span<const double> baseline = {});
Table progress_table(const MetricsReport& report);
Table jaccard_table(std::span<const JaccardEntry> entries, const data::Ontology& ontology);
Table window_table(std::span<const WindowPoint> curve);

/// Rebuilds a report from its three tables.
MetricsReport read_metrics_report(const Table& summary, const Table& per_slot,
                                  const Table& progress);
std::vector<JaccardEntry> read_jaccard_table(const Table& table, const data::Ontology& ontology);
std::vector<WindowPoint> read_window_table(const Table& table);

}  // namespace dstgat::eval
