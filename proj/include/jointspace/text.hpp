// Copyright (c) 2026, the jointspace authors.
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

#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace jointspace {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Tokenization rule shared by corpus statistics and the text encoder:
// lowercase ASCII letters, delete ASCII punctuation, split on whitespace.
// Bytes outside ASCII pass through untouched.
inline std::vector<std::string> normalize_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    const unsigned char c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      if (!cur.empty()) {
        tokens.push_back(cur);
        cur.clear();
      }
    } else if (c < 128 && std::ispunct(c)) {
      // dropped
    } else {
      cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c + 32) : ch);
    }
  }
  if (!cur.empty()) tokens.push_back(cur);
  return tokens;
}

// Fixed English stop-word list, version 1. Frozen so that word-frequency
// outputs stay stable across releases; extend only with a version bump.
inline constexpr int kStopWordsVersion = 1;
inline constexpr std::array<std::string_view, 88> kStopWords = {
    "a",     "about", "after",  "again", "all",   "an",    "and",   "any",
    "are",   "as",    "at",     "be",    "been",  "before", "being", "below",
    "between", "both", "but",   "by",    "can",   "could", "did",   "do",
    "does",  "doing", "down",   "during", "each", "few",   "for",   "from",
    "further", "had", "has",    "have",  "having", "he",   "her",   "here",
    "him",   "his",   "how",    "i",     "if",    "in",    "into",  "is",
    "it",    "its",   "just",   "me",    "more",  "most",  "my",    "no",
    "nor",   "not",   "now",    "of",    "off",   "on",    "once",  "only",
    "or",    "other", "our",    "out",   "over",  "own",   "same",  "she",
    "so",    "some",  "such",   "than",  "that",  "the",   "their", "then",
    "there", "these", "they",   "this",  "to",    "was",   "we",    "with",
};

inline bool is_stop_word(std::string_view word) {
  return std::find(kStopWords.begin(), kStopWords.end(), word) !=
         kStopWords.end();
}

}  // namespace jointspace
