#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace taxrewire::text {

/// Shortest representation that round-trips to the same double.
std::string format_double(double value);

/// Splits on '\n', stripping a trailing '\r' from each line.
std::vector<std::string_view> split_lines(std::string_view text);

/// Splits on runs of spaces and tabs.
std::vector<std::string_view> split_ws(std::string_view line);

std::string_view trim(std::string_view s);

bool parse_u64(std::string_view token, std::uint64_t& out);
bool parse_double(std::string_view token, double& out);

/// FNV-1a, 64 bit.
std::uint64_t fnv1a(std::string_view bytes);

std::string to_hex(std::uint64_t value);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

} // namespace taxrewire::text
