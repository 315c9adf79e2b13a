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

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "dskip/unicode.hpp"

namespace dskip {

// LIKE dialect: '%' matches any run of characters, '_' matches exactly one,
// backslash escapes the next character. Case-sensitive, whole-string match.

namespace detail {

enum class LikeTokenKind { Percent, Underscore, Char };

struct LikeToken {
  LikeTokenKind kind;
  char32_t ch = 0;
};

inline std::vector<LikeToken> tokenize_like(std::string_view pattern) {
  std::vector<LikeToken> out;
  std::vector<char32_t> scalars = utf8_scalars(pattern);
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    char32_t c = scalars[i];
    if (c == U'\\' && i + 1 < scalars.size()) {
      out.push_back({LikeTokenKind::Char, scalars[i + 1]});
      ++i;
    } else if (c == U'%') {
      out.push_back({LikeTokenKind::Percent, 0});
    } else if (c == U'_') {
      out.push_back({LikeTokenKind::Underscore, 0});
    } else {
      out.push_back({LikeTokenKind::Char, c});
    }
  }
  return out;
}

inline void append_utf8(std::string& out, char32_t c) {
  if (c < 0x80) {
    out += static_cast<char>(c);
  } else if (c < 0x800) {
    out += static_cast<char>(0xC0 | (c >> 6));
    out += static_cast<char>(0x80 | (c & 0x3F));
  } else if (c < 0x10000) {
    out += static_cast<char>(0xE0 | (c >> 12));
    out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (c & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (c >> 18));
    out += static_cast<char>(0x80 | ((c >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (c & 0x3F));
  }
}

}  // namespace detail

/// Whole-string wildcard match. A trailing lone backslash matches a literal
/// backslash (the parser rejects that form upstream).
inline bool match_like(std::string_view pattern, std::string_view value) {
  const std::vector<detail::LikeToken> tokens = detail::tokenize_like(pattern);
  const std::vector<char32_t> text = utf8_scalars(value);

  // Two-pointer match with backtracking to the most recent '%'.
  std::size_t p = 0, t = 0;
  std::size_t star = std::string::npos, star_t = 0;
  while (t < text.size()) {
    if (p < tokens.size() &&
        (tokens[p].kind == detail::LikeTokenKind::Underscore ||
         (tokens[p].kind == detail::LikeTokenKind::Char && tokens[p].ch == text[t]))) {
      ++p;
      ++t;
    } else if (p < tokens.size() && tokens[p].kind == detail::LikeTokenKind::Percent) {
      star = p++;
      star_t = t;
    } else if (star != std::string::npos) {
      p = star + 1;
      t = ++star_t;
    } else {
      return false;
    }
  }
  while (p < tokens.size() && tokens[p].kind == detail::LikeTokenKind::Percent) ++p;
  return p == tokens.size();
}

/// The literal run at the head of a pattern, up to the first wildcard.
/// Escaped characters contribute their literal character.
inline std::string like_literal_prefix(std::string_view pattern) {
  std::string out;
  for (const auto& tok : detail::tokenize_like(pattern)) {
    if (tok.kind != detail::LikeTokenKind::Char) break;
    detail::append_utf8(out, tok.ch);
  }
  return out;
}

/// The literal run at the tail of a pattern, after the last wildcard.
inline std::string like_literal_suffix(std::string_view pattern) {
  auto tokens = detail::tokenize_like(pattern);
  std::size_t start = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].kind != detail::LikeTokenKind::Char) start = i + 1;
  }
  std::string tail;
  for (std::size_t i = start; i < tokens.size(); ++i) detail::append_utf8(tail, tokens[i].ch);
  return tail;
}

/// True when the pattern contains no unescaped wildcard (it can only match
/// one exact string).
inline bool like_is_exact(std::string_view pattern) {
  for (const auto& tok : detail::tokenize_like(pattern)) {
    if (tok.kind != detail::LikeTokenKind::Char) return false;
  }
  return true;
}

}  // namespace dskip
