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

#ifndef NBF_DATAMODEL_H_
#define NBF_DATAMODEL_H_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nbf {

struct TokenProb {
  std::string token;
  double prob = 0.0;

  bool operator==(const TokenProb&) const = default;
};

// One decoded candidate. asr_logprob is a natural-log sequence score as
// returned by the recognizer; it is stored verbatim.
struct Hypothesis {
  std::string text;
  double asr_logprob = 0.0;
  std::optional<std::vector<TokenProb>> token_probs;
  std::optional<std::string> phones;

  bool operator==(const Hypothesis&) const = default;
};

enum class OrderTag { kSorted, kRandomized, kReversed, kUnknown };

std::string_view ToString(OrderTag tag);
std::optional<OrderTag> ParseOrderTag(std::string_view s);

struct NBestList {
  std::vector<Hypothesis> hypotheses;
  OrderTag order_tag = OrderTag::kUnknown;

  std::size_t size() const { return hypotheses.size(); }
  const Hypothesis& operator[](std::size_t i) const { return hypotheses[i]; }
  bool operator==(const NBestList&) const = default;
};

struct UtteranceRecord {
  std::string utt_id;
  NBestList nbest;
  std::optional<std::string> reference;
  std::string source_tag;

  bool operator==(const UtteranceRecord&) const = default;
};

// External scores for one utterance, aligned with the n-best order.
struct ScoreVector {
  std::string utt_id;
  std::string scorer_id;
  std::vector<double> scores;

  bool operator==(const ScoreVector&) const = default;
};

using UtteranceSet = std::vector<UtteranceRecord>;

// Dump I/O. One JSON object per line, UTF-8, LF endings, no BOM.
// `source` may be a filesystem path or an http(s):// URL.
UtteranceSet LoadDump(const std::string& source);
UtteranceSet ParseDump(std::istream& in);
UtteranceSet ParseDump(std::string_view text);
void WriteDump(const UtteranceSet& records, const std::string& dest);
void WriteDump(const UtteranceSet& records, std::ostream& out);
std::string RecordToLine(const UtteranceRecord& record);

// Score vector files use the same line convention:
// {"utt_id": str, "scorer_id": str, "scores": [float]}
std::vector<ScoreVector> LoadScoreVectors(const std::string& path);
void WriteScoreVectors(const std::vector<ScoreVector>& vectors,
                       std::ostream& out);

struct Violation {
  std::string utt_id;
  std::string field;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

struct ValidateOptions {
  // Empty hypothesis text is only accepted when the caller opts in.
  bool allow_empty_text = false;
};

ValidationReport Validate(const UtteranceSet& records,
                          const ValidateOptions& options = {});

// Word pieces grouped into words. A piece starts a new word when it begins
// with a space marker (' ' or U+2581) or follows a piece consisting only of
// markers. Marker-only pieces belong to no word.
struct WordPieces {
  std::string word;
  std::vector<double> probs;
};

std::vector<WordPieces> GroupTokensIntoWords(
    const std::vector<TokenProb>& tokens);

// Remote fetch; plain GET of the whole body.
std::string FetchUrl(const std::string& url);
bool IsUrl(std::string_view source);

}  // namespace nbf

#endif  // NBF_DATAMODEL_H_
