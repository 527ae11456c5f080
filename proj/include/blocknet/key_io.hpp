// SPDX-License-Identifier: Apache-2.0
//
// Key files. Binary: an 8-byte little-endian count, then that many 8-byte
// little-endian keys (int64 or IEEE-754 double). Text: one key per line,
// blank lines ignored.

#pragma once

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <span>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <vector>

#include "comparators.hpp"
#include "network.hpp"

namespace blocknet {

struct io_error : error {
  using error::error;
};

enum class KeyFormat { Binary, Text };

/// `.bin` selects binary, anything else text.
inline KeyFormat format_for_path(const std::filesystem::path& p) {
  return p.extension() == ".bin" ? KeyFormat::Binary : KeyFormat::Text;
}

template <class K>
concept FileKey = Key<K> && sizeof(K) == 8 && (std::is_same_v<K, std::int64_t> || std::is_same_v<K, double>);

namespace detail {

inline std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(v);
  return v;
}

template <FileKey K>
K parse_key(std::string_view s, const std::string& where) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  K v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    throw io_error(where + ": malformed key '" + std::string(s) + "'");
  if (!is_admissible_key(v)) throw io_error(where + ": non-finite key");
  return v;
}

}  // namespace detail

template <FileKey K>
std::vector<K> read_keys_binary(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw io_error("cannot open " + p.string());
  std::uint64_t count = 0;
  if (!in.read(reinterpret_cast<char*>(&count), 8)) throw io_error(p.string() + ": missing count header");
  count = detail::to_le(count);
  const auto size = std::filesystem::file_size(p);
  if ((size - 8) % 8 != 0 || (size - 8) / 8 != count) throw io_error(p.string() + ": size does not match count header");
  std::vector<K> keys(count);
  for (auto& k : keys) {
    std::uint64_t raw;
    in.read(reinterpret_cast<char*>(&raw), 8);
    k = std::bit_cast<K>(detail::to_le(raw));
    if (!is_admissible_key(k)) throw io_error(p.string() + ": non-finite key");
  }
  if (!in) throw io_error(p.string() + ": truncated");
  return keys;
}

template <FileKey K>
std::vector<K> read_keys_text(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw io_error("cannot open " + p.string());
  std::vector<K> keys;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    keys.push_back(detail::parse_key<K>(line, p.string() + ":" + std::to_string(lineno)));
  }
  return keys;
}

template <FileKey K>
std::vector<K> read_keys(const std::filesystem::path& p, KeyFormat f) {
  return f == KeyFormat::Binary ? read_keys_binary<K>(p) : read_keys_text<K>(p);
}

template <FileKey K>
std::vector<K> read_keys(const std::filesystem::path& p) {
  return read_keys<K>(p, format_for_path(p));
}

template <FileKey K>
void write_keys(const std::filesystem::path& p, std::span<const K> keys, KeyFormat f) {
  std::ofstream out(p, f == KeyFormat::Binary ? std::ios::binary : std::ios::out);
  if (!out) throw io_error("cannot create " + p.string());
  if (f == KeyFormat::Binary) {
    const std::uint64_t count = detail::to_le(keys.size());
    out.write(reinterpret_cast<const char*>(&count), 8);
    for (const auto& k : keys) {
      const std::uint64_t raw = detail::to_le(std::bit_cast<std::uint64_t>(k));
      out.write(reinterpret_cast<const char*>(&raw), 8);
    }
  } else {
    char buf[64];
    for (const auto& k : keys) {
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, k);
      out.write(buf, ptr - buf);
      out.put('\n');
    }
  }
  if (!out) throw io_error("write failed: " + p.string());
}

template <FileKey K>
void write_keys(const std::filesystem::path& p, std::span<const K> keys) {
  write_keys<K>(p, keys, format_for_path(p));
}

}  // namespace blocknet
