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

#ifndef NBF_TEXTNORM_H_
#define NBF_TEXTNORM_H_

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nbf {

// Normalization ruleset applied to both references and hypotheses before
// any comparison. Processing order: lowercase, punctuation to space, edge
// apostrophe/hyphen trimming per word, whole-word mappings, whitespace.
class NormRules {
 public:
  // Default: lowercase, strip .,!?;:"()[] plus en/em dashes, keep
  // intra-word apostrophes and hyphens, collapse whitespace.
  NormRules();

  // Rules that leave text untouched (used by --no-norm).
  static NormRules Identity();

  // Line-delimited config, one JSON object per line. Recognized keys:
  //   {"lowercase": bool}  {"collapse_ws": bool}  {"enabled": bool}
  //   {"strip_punct": "chars"}  {"map": ["from", "to"]}
  // Later lines override earlier scalars; "map" lines append in order.
  static NormRules Load(const std::string& path);
  static NormRules Parse(std::string_view text);

  bool lowercase() const { return lowercase_; }
  bool collapse_ws() const { return collapse_ws_; }
  bool enabled() const { return enabled_; }
  const std::u32string& strip_punct() const { return strip_punct_; }
  const std::vector<std::pair<std::string, std::string>>& mappings() const {
    return mappings_;
  }

  void set_lowercase(bool v) { lowercase_ = v; }
  void set_collapse_ws(bool v) { collapse_ws_ = v; }
  void set_strip_punct(std::u32string chars) { strip_punct_ = std::move(chars); }

  // Adds a whole-word mapping. Both sides are first normalized under the
  // current rules; throws nbf::Error if the replacement could be rewritten
  // again by a mapping (which would break idempotence).
  void AddMapping(std::string_view from, std::string_view to);

 private:
  bool enabled_ = true;
  bool lowercase_ = true;
  bool collapse_ws_ = true;
  std::u32string strip_punct_;
  std::vector<std::pair<std::string, std::string>> mappings_;
};

std::string Normalize(std::string_view text, const NormRules& rules);

// Normalizes and splits into words.
std::vector<std::string> NormalizeWords(std::string_view text,
                                        const NormRules& rules);

}  // namespace nbf

#endif  // NBF_TEXTNORM_H_
