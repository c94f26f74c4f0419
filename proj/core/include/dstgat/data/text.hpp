#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace dstgat::data {

std::vector<std::string> split_whitespace(std::string_view text);
std::string join(const std::vector<std::string>& words, std::string_view sep = " ");
/// Collapses whitespace runs to single spaces and trims the ends.
std::string normalize_whitespace(std::string_view text);

/// 1-based line number of a byte offset in `text`.
std::size_t line_of_offset(std::string_view text, std::size_t offset);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace dstgat::data
