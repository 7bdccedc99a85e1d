/* Copyright 2026 The PICE Authors
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

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace pice {

// Lowercased whitespace words with punctuation removed; words that are
// pure punctuation disappear. This is the tokenization used by ROUGE-L,
// sketch length accounting and the mock backends.
inline std::vector<std::string> normalized_words(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (char ch : text) {
    auto u = static_cast<unsigned char>(ch);
    if (std::isspace(u)) {
      flush();
    } else if (std::ispunct(u)) {
      continue;
    } else {
      cur.push_back(static_cast<char>(std::tolower(u)));
    }
  }
  flush();
  return out;
}

inline std::size_t word_count(std::string_view text) {
  return normalized_words(text).size();
}

inline std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline bool is_sentence_terminator(char ch) {
  return ch == '.' || ch == '!' || ch == '?' || ch == ';' || ch == '\n';
}

// Splits on . ! ? ; and newline. A run of terminators stays with the
// sentence it closes; fragments without any letter or digit are dropped.
inline std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  auto emit = [&](std::string_view frag) {
    frag = trim(frag);
    for (char ch : frag) {
      if (std::isalnum(static_cast<unsigned char>(ch))) {
        out.emplace_back(frag);
        return;
      }
    }
  };
  std::size_t start = 0, i = 0;
  while (i < text.size()) {
    if (is_sentence_terminator(text[i])) {
      while (i < text.size() && is_sentence_terminator(text[i])) ++i;
      emit(text.substr(start, i - start));
      start = i;
    } else {
      ++i;
    }
  }
  emit(text.substr(start));
  return out;
}

}  // namespace pice
