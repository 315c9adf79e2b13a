/*
 * Copyright (c) dskip contributors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dskip {

// Characters are Unicode scalars throughout (LIKE '_', prefix/suffix
// truncation, Levenshtein). An invalid lead/continuation byte decodes as its
// own scalar so decoding never fails and stays deterministic.

/// Decodes UTF-8 into scalars.
inline std::vector<char32_t> utf8_scalars(std::string_view s) {
  std::vector<char32_t> out;
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char b = static_cast<unsigned char>(s[i]);
    int extra = 0;
    char32_t cp = b;
    if (b < 0x80) {
      extra = 0;
    } else if ((b & 0xE0) == 0xC0) {
      extra = 1;
      cp = b & 0x1F;
    } else if ((b & 0xF0) == 0xE0) {
      extra = 2;
      cp = b & 0x0F;
    } else if ((b & 0xF8) == 0xF0) {
      extra = 3;
      cp = b & 0x07;
    } else {
      out.push_back(b);
      ++i;
      continue;
    }
    if (extra > 0 && i + extra >= s.size()) {
      out.push_back(b);
      ++i;
      continue;
    }
    bool ok = true;
    char32_t acc = cp;
    for (int k = 1; k <= extra; ++k) {
      unsigned char c = static_cast<unsigned char>(s[i + k]);
      if ((c & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      acc = (acc << 6) | (c & 0x3F);
    }
    if (!ok) {
      out.push_back(b);
      ++i;
      continue;
    }
    out.push_back(acc);
    i += extra + 1;
  }
  return out;
}

/// Byte offset just past the first `n` scalars (the whole string if shorter).
inline std::size_t utf8_offset_of_scalar(std::string_view s, std::size_t n) {
  std::size_t i = 0, count = 0;
  while (i < s.size() && count < n) {
    unsigned char b = static_cast<unsigned char>(s[i]);
    std::size_t step = 1;
    if ((b & 0xE0) == 0xC0) step = 2;
    else if ((b & 0xF0) == 0xE0) step = 3;
    else if ((b & 0xF8) == 0xF0) step = 4;
    if (i + step > s.size()) step = 1;
    for (std::size_t k = 1; k < step; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) {
        step = 1;
        break;
      }
    }
    i += step;
    ++count;
  }
  return i;
}

inline std::size_t utf8_length(std::string_view s) {
  return utf8_scalars(s).size();
}

/// First `n` scalars as a UTF-8 string.
inline std::string utf8_prefix(std::string_view s, std::size_t n) {
  return std::string(s.substr(0, utf8_offset_of_scalar(s, n)));
}

/// Last `n` scalars as a UTF-8 string.
inline std::string utf8_suffix(std::string_view s, std::size_t n) {
  std::size_t total = utf8_length(s);
  if (n >= total) return std::string(s);
  std::size_t start = utf8_offset_of_scalar(s, total - n);
  return std::string(s.substr(start));
}

/// Levenshtein edit distance over Unicode scalars.
inline std::int64_t levenshtein(std::string_view a, std::string_view b) {
  std::vector<char32_t> u = utf8_scalars(a), v = utf8_scalars(b);
  if (u.size() < v.size()) std::swap(u, v);
  std::vector<std::int64_t> row(v.size() + 1);
  for (std::size_t j = 0; j <= v.size(); ++j) row[j] = static_cast<std::int64_t>(j);
  for (std::size_t i = 1; i <= u.size(); ++i) {
    std::int64_t prev = row[0];
    row[0] = static_cast<std::int64_t>(i);
    for (std::size_t j = 1; j <= v.size(); ++j) {
      std::int64_t cur = row[j];
      std::int64_t cost = (u[i - 1] == v[j - 1]) ? 0 : 1;
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, prev + cost});
      prev = cur;
    }
  }
  return row[v.size()];
}

}  // namespace dskip
