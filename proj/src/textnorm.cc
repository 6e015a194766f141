// Copyright 2026 The nbfix Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nbf/textnorm.h"

#include <fstream>
#include <sstream>
#include <tuple>

#include "json.hpp"
#include "nbf/error.h"
#include "nbf/utf8.h"

namespace nbf {

namespace {

constexpr char32_t kDefaultPunct[] = U".,!?;:\"()[]–—";

bool IsEdgeMark(char32_t cp) {
  return cp == U'\'' || cp == U'’' || cp == U'-';
}

bool Contains(const std::u32string& set, char32_t cp) {
  return set.find(cp) != std::u32string::npos;
}

// Normalization without mappings, as code points.
std::u32string BaseNormalize(std::u32string_view in, const NormRules& rules) {
  std::u32string chars;
  chars.reserve(in.size());
  for (char32_t cp : in) {
    if (rules.lowercase()) cp = utf8::ToLower(cp);
    if (Contains(rules.strip_punct(), cp)) cp = U' ';
    chars.push_back(cp);
  }
  return chars;
}

struct Piece {
  std::u32string space;  // whitespace preceding the word
  std::u32string word;
};

std::vector<Piece> SplitPieces(const std::u32string& s,
                               std::u32string* trailing) {
  std::vector<Piece> pieces;
  Piece cur;
  bool in_word = false;
  for (char32_t cp : s) {
    if (utf8::IsSpace(cp)) {
      if (in_word) {
        pieces.push_back(std::move(cur));
        cur = Piece{};
        in_word = false;
      }
      cur.space.push_back(cp);
    } else {
      in_word = true;
      cur.word.push_back(cp);
    }
  }
  if (in_word) {
    pieces.push_back(std::move(cur));
  } else {
    *trailing = std::move(cur.space);
  }
  return pieces;
}

std::u32string TrimEdges(const std::u32string& w) {
  std::size_t b = 0;
  std::size_t e = w.size();
  while (b < e && IsEdgeMark(w[b])) ++b;
  while (e > b && IsEdgeMark(w[e - 1])) --e;
  return w.substr(b, e - b);
}

std::string Apply(std::string_view text, const NormRules& rules,
                  bool with_mappings) {
  if (!rules.enabled()) return std::string(text);
  std::u32string trailing;
  std::vector<Piece> pieces =
      SplitPieces(BaseNormalize(utf8::Decode(text), rules), &trailing);
  std::string out;
  out.reserve(text.size());
  std::string pending_space;
  bool first = true;
  for (Piece& p : pieces) {
    std::string word = utf8::Encode(TrimEdges(p.word));
    if (with_mappings) {
      for (const auto& [from, to] : rules.mappings()) {
        if (word == from) {
          word = to;
          break;
        }
      }
    }
    if (rules.collapse_ws()) {
      if (word.empty()) continue;
      if (!first) out.push_back(' ');
      out += word;
      first = false;
    } else {
      out += utf8::Encode(p.space);
      out += word;
    }
  }
  if (!rules.collapse_ws()) out += utf8::Encode(trailing);
  return out;
}

}  // namespace

NormRules::NormRules() : strip_punct_(kDefaultPunct) {}

NormRules NormRules::Identity() {
  NormRules r;
  r.enabled_ = false;
  return r;
}

void NormRules::AddMapping(std::string_view from, std::string_view to) {
  const std::string key = Apply(from, *this, false);
  const std::string value = Apply(to, *this, false);
  if (key.empty() || key.find(' ') != std::string::npos) {
    throw Error("mapping source must normalize to a single word: '" +
                std::string(from) + "'");
  }
  auto rewrites = [&](const std::string& text) {
    for (const auto& w : utf8::SplitWords(text)) {
      if (w == key) return true;
      for (const auto& m : mappings_) {
        if (w == m.first) return true;
      }
    }
    return false;
  };
  if (rewrites(value)) {
    throw Error("mapping '" + key + "' -> '" + value +
                "' produces a word that is itself mapped");
  }
  for (const auto& m : mappings_) {
    for (const auto& w : utf8::SplitWords(m.second)) {
      if (w == key) {
        throw Error("mapping source '" + key +
                    "' appears in an earlier replacement");
      }
    }
  }
  mappings_.emplace_back(key, value);
}

NormRules NormRules::Parse(std::string_view text) {
  NormRules rules;
  // Mappings are normalized against the final scalar settings.
  std::vector<std::tuple<std::size_t, std::string, std::string>> maps;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, "<rules>", e.what());
    }
    if (!obj.is_object()) throw ParseError(line_no, "<rules>", "expected object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      const std::string& key = it.key();
      const auto& v = it.value();
      if (key == "lowercase" || key == "collapse_ws" || key == "enabled") {
        if (!v.is_boolean()) throw ParseError(line_no, key, "expected bool");
        (key == "lowercase"     ? rules.lowercase_
         : key == "collapse_ws" ? rules.collapse_ws_
                                : rules.enabled_) = v.get<bool>();
      } else if (key == "strip_punct") {
        if (!v.is_string()) throw ParseError(line_no, key, "expected string");
        rules.strip_punct_ = utf8::Decode(v.get<std::string>());
      } else if (key == "map") {
        if (!v.is_array() || v.size() != 2 || !v[0].is_string() ||
            !v[1].is_string()) {
          throw ParseError(line_no, key, "expected [from, to]");
        }
        maps.emplace_back(line_no, v[0].get<std::string>(),
                          v[1].get<std::string>());
      } else {
        throw ParseError(line_no, key, "unknown rule");
      }
    }
  }
  for (const auto& [n, from, to] : maps) {
    try {
      rules.AddMapping(from, to);
    } catch (const Error& e) {
      throw ParseError(n, "map", e.what());
    }
  }
  return rules;
}

NormRules NormRules::Load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open rules file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return Parse(ss.str());
}

std::string Normalize(std::string_view text, const NormRules& rules) {
  return Apply(text, rules, true);
}

std::vector<std::string> NormalizeWords(std::string_view text,
                                        const NormRules& rules) {
  return utf8::SplitWords(Normalize(text, rules));
}

}  // namespace nbf
