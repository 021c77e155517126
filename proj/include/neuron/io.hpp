#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace neuron::io {

std::string read_file(const std::string& path);
// Writes via a temporary file and rename so readers never see a partial file.
void write_file(const std::string& path, std::string_view contents);

std::vector<std::string_view> split_tabs(std::string_view line);

// Lines without the trailing newline; '#'-prefixed header lines are skipped
// unless keep_comments is set.
std::vector<std::string_view> lines(std::string_view text, bool keep_comments = false);

std::string base64_encode(std::span<const std::uint8_t> bytes);
// Throws ParseError with the offending character offset (relative to the
// encoded text) on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

// Shortest round-trip decimal form.
std::string format_double(double v);
// Fixed-point with the given number of decimals.
std::string format_fixed(double v, int decimals);

}  // namespace neuron::io
