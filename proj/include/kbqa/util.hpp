// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace kbqa {

/// 64-bit FNV-1a. Used wherever a digest must be stable across platforms
/// and runs (fingerprints, replay digests, seed derivation).
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string to_hex(std::uint64_t value);

/// Lowercase, ASCII punctuation replaced by spaces, whitespace collapsed and trimmed.
std::string normalize_label(std::string_view text);

std::vector<std::string> tokenize(std::string_view text);

/// Character trigrams of the normalized text padded with one space on each side.
std::set<std::string> char_trigrams(std::string_view text);

template <typename T>
double jaccard(const std::set<T>& a, const std::set<T>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t common = 0;
  for (const auto& x : a) common += b.count(x);
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

std::string trim(std::string_view text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace kbqa
