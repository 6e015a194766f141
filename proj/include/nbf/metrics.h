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

#ifndef NBF_METRICS_H_
#define NBF_METRICS_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nbf/datamodel.h"
#include "nbf/textnorm.h"

namespace nbf {

enum class EditOp { kMatch, kSub, kIns, kDel };

struct AlignedPair {
  EditOp op;
  std::optional<std::string> ref_word;
  std::optional<std::string> hyp_word;

  bool operator==(const AlignedPair&) const = default;
};

struct Alignment {
  std::vector<AlignedPair> ops;

  std::size_t Cost() const;
  std::vector<std::string> RefWords() const;
  std::vector<std::string> HypWords() const;
};

// Minimal word-level Levenshtein alignment with unit costs. Among optimal
// alignments the one chosen prefers match > sub > del > ins at every step
// read from the start of both sequences.
Alignment Align(const std::vector<std::string>& ref,
                const std::vector<std::string>& hyp);

// Edit distance only; O(min(n,m)) memory.
std::size_t EditDistance(const std::vector<std::string>& ref,
                         const std::vector<std::string>& hyp);

struct WerBreakdown {
  std::int64_t substitutions = 0;
  std::int64_t insertions = 0;
  std::int64_t deletions = 0;
  std::int64_t ref_len = 0;

  std::int64_t errors() const { return substitutions + insertions + deletions; }
  // (S+I+D)/ref_len. An empty reference gives 0 when the hypothesis is also
  // empty and +inf otherwise.
  double wer() const;

  WerBreakdown& operator+=(const WerBreakdown& o);
  bool operator==(const WerBreakdown&) const = default;
};

WerBreakdown Breakdown(const Alignment& alignment);
WerBreakdown Wer(std::string_view reference, std::string_view hypothesis,
                 const NormRules& rules);

// Pooled corpus WER: sum of errors over sum of reference lengths.
// Utterances whose normalized reference is empty are skipped and counted.
struct CorpusWer {
  WerBreakdown total;
  std::size_t utterances = 0;
  std::size_t skipped = 0;
  // Utterances whose hypothesis equals the reference.
  std::size_t sentences_correct = 0;

  double wer() const { return total.wer(); }
  double ser() const;
};

// Picks the hypothesis text to evaluate for a record.
using HypothesisSelector = std::function<std::string(const UtteranceRecord&)>;

std::string SelectFirstBest(const UtteranceRecord& record);

// Throws MissingReferenceError naming the first record without reference.
CorpusWer ComputeCorpusWer(const UtteranceSet& records,
                           const HypothesisSelector& selector,
                           const NormRules& rules, int threads = 1);

// Same, with hypotheses supplied positionally.
CorpusWer ComputeCorpusWer(const UtteranceSet& records,
                           const std::vector<std::string>& hypotheses,
                           const NormRules& rules, int threads = 1);

// Index of the hypothesis with the fewest word errors (lowest rank on ties).
std::size_t OracleIndex(const UtteranceRecord& record, const NormRules& rules);

// Per hyp-side word: true iff it takes part in a match.
std::vector<bool> WordErrorLabels(const Alignment& alignment);

struct OracleCurve {
  // Index n-1 holds the value for rank n.
  std::vector<double> match_at_rank;
  std::vector<double> contains_in_top;
  // Utterances that have a hypothesis at rank n.
  std::vector<std::size_t> rank_support;
  std::size_t utterances = 0;
};

// Requires references and sorted lists. match_at_rank[n] is over the
// utterances that have an n-th hypothesis; contains_in_top[n] is over all
// utterances (a short list keeps its full-list value at larger n).
OracleCurve ComputeOracleCurves(const UtteranceSet& records, std::size_t max_n,
                                const NormRules& rules);

}  // namespace nbf

#endif  // NBF_METRICS_H_
