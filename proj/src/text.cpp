// Copyright 2026 The fleetplan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fleetplan/text.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include "fleetplan/errors.hpp"

namespace fleetplan {

namespace {

struct Codepoint {
  char32_t value;
  std::size_t length;
};

// Malformed bytes decode as U+FFFD, one byte at a time.
Codepoint decode(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) return {b0, 1};
  std::size_t len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) { len = 2; cp = b0 & 0x1F; }
  else if ((b0 & 0xF0) == 0xE0) { len = 3; cp = b0 & 0x0F; }
  else if ((b0 & 0xF8) == 0xF0) { len = 4; cp = b0 & 0x07; }
  else return {0xFFFD, 1};
  if (i + len > s.size()) return {0xFFFD, 1};
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) return {0xFFFD, 1};
    cp = (cp << 6) | (b & 0x3F);
  }
  return {cp, len};
}

bool is_ideographic(char32_t cp) {
  return (cp >= 0x3040 && cp <= 0x30FF) || (cp >= 0x3400 && cp <= 0x4DBF) ||
         (cp >= 0x4E00 && cp <= 0x9FFF) || (cp >= 0xF900 && cp <= 0xFAFF) ||
         (cp >= 0xAC00 && cp <= 0xD7AF);
}

bool is_unicode_punct_or_space(char32_t cp) {
  return (cp >= 0x0080 && cp <= 0x00BF) || cp == 0x00D7 || cp == 0x00F7 ||
         (cp >= 0x2000 && cp <= 0x2BFF) || (cp >= 0x3000 && cp <= 0x303F) ||
         (cp >= 0xFE30 && cp <= 0xFE4F) || (cp >= 0xFF00 && cp <= 0xFF0F) ||
         (cp >= 0xFF1A && cp <= 0xFF20) || (cp >= 0xFF3B && cp <= 0xFF40) ||
         (cp >= 0xFF5B && cp <= 0xFF65) || cp == 0xFFFD;
}

bool is_ascii_word(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_closer(char32_t cp) {
  return cp == '"' || cp == '\'' || cp == ')' || cp == ']' || cp == '}' || cp == 0x2019 ||
         cp == 0x201D || cp == 0x00BB || cp == 0x300D || cp == 0x300F || cp == 0xFF09;
}

bool is_fullwidth_terminator(char32_t cp) {
  return cp == 0x3002 || cp == 0xFF01 || cp == 0xFF1F || cp == 0xFF0E;
}

constexpr std::array<std::string_view, 24> kAbbreviations = {
    "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "vs", "e.g", "i.e", "cf",
    "fig", "figs", "eq", "eqs", "inc", "ltd", "corp", "approx", "dept", "mt", "gen", "col"};

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

// The word immediately before position `dot`, without leading punctuation.
bool is_abbreviation(std::string_view text, std::size_t dot) {
  std::size_t begin = dot;
  while (begin > 0 && !is_space(text[begin - 1])) --begin;
  std::string_view word = text.substr(begin, dot - begin);
  while (!word.empty() && !is_ascii_word(word.front())) word.remove_prefix(1);
  if (word.empty()) return false;
  const std::string lw = lower_ascii(word);
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), lw) != kAbbreviations.end();
}

bool next_word_is_lowercase(std::string_view text, std::size_t pos) {
  while (pos < text.size() && is_space(text[pos])) ++pos;
  return pos < text.size() && text[pos] >= 'a' && text[pos] <= 'z';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace

Tokens estimate_tokens(std::size_t bytes, double bytes_per_token) {
  if (!(bytes_per_token > 0.0)) throw InvalidArgument("bytes per token must be positive");
  if (bytes == 0) return 0;
  return static_cast<Tokens>(std::ceil(static_cast<double>(bytes) / bytes_per_token - 1e-12));
}

std::vector<std::string> tokenize_terms(std::string_view text) {
  std::vector<std::string> terms;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) terms.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < text.size();) {
    const auto [cp, len] = decode(text, i);
    if (cp < 0x80) {
      const char c = static_cast<char>(cp);
      if (is_ascii_word(c)) {
        current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
      } else {
        flush();
      }
    } else if (is_ideographic(cp)) {
      flush();
      terms.emplace_back(text.substr(i, len));
    } else if (is_unicode_punct_or_space(cp)) {
      flush();
    } else {
      current.append(text.substr(i, len));
    }
    i += len;
  }
  flush();
  return terms;
}

std::vector<std::string_view> split_sentence_spans(std::string_view text) {
  std::vector<std::string_view> spans;
  std::size_t start = 0;
  auto emit = [&](std::size_t end) {
    const auto span = trim(text.substr(start, end - start));
    if (!span.empty()) spans.push_back(span);
    start = end;
  };

  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\n') {
      std::size_t j = i + 1;
      while (j < text.size() && (text[j] == ' ' || text[j] == '\t' || text[j] == '\r')) ++j;
      if (j < text.size() && text[j] == '\n') {
        emit(i);
        i = j + 1;
        continue;
      }
      ++i;
      continue;
    }
    const auto [cp, len] = decode(text, i);
    const bool ascii_term = c == '.' || c == '!' || c == '?';
    if (!ascii_term && !is_fullwidth_terminator(cp)) {
      i += len;
      continue;
    }

    // Absorb terminator runs ("?!", "...") and closing quotes or brackets.
    std::size_t j = i + len;
    bool single_period = c == '.';
    while (j < text.size()) {
      const auto [next, nlen] = decode(text, j);
      if (next == '.' || next == '!' || next == '?' || is_fullwidth_terminator(next)) {
        single_period = false;
      } else if (!is_closer(next)) {
        break;
      }
      j += nlen;
    }

    if (ascii_term) {
      if (j < text.size() && !is_space(text[j])) {
        i = j;
        continue;
      }
      if (single_period && (is_abbreviation(text, i) || next_word_is_lowercase(text, j))) {
        i = j;
        continue;
      }
    }
    emit(j);
    i = j;
  }
  emit(text.size());
  return spans;
}

}  // namespace fleetplan
