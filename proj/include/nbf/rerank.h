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

#ifndef NBF_RERANK_H_
#define NBF_RERANK_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nbf/datamodel.h"
#include "nbf/textnorm.h"

namespace nbf {

enum class RerankMode { kUnconstrained, kConstrained };

struct RerankConfig {
  // Weight of the external score; 0 keeps the ASR ranking.
  double lambda_weight = 0.5;
  RerankMode mode = RerankMode::kConstrained;
  // Divide both log-scores by the hypothesis word count (min 1).
  bool length_norm = false;
  // Ties always go to the lowest original rank.

  void Check() const;
};

struct Selection {
  std::string utt_id;
  std::string chosen_text;
  // 1-based position in the original list; empty when the output is not a
  // list member.
  std::optional<std::size_t> chosen_rank;
  std::vector<double> combined_scores;
  bool in_list = false;
};

// (1 - lambda) * asr + lambda * ec
double Combine(double asr_logprob, double ec_logprob, double lambda);

// argmax over the list of the combined score; ties go to the lower rank.
// Throws if the score vector length differs from the list length.
Selection RerankConstrained(const UtteranceRecord& record,
                            const ScoreVector& scores,
                            const RerankConfig& config);

// Passes a generated correction through, recording whether it matches a
// list member after normalization.
Selection SelectUnconstrained(const UtteranceRecord& record,
                              std::string_view corrected_text,
                              const NormRules& rules);

struct AblationMode {
  enum class Kind { kSorted, kRandomized, kReversed, kTruncate };
  Kind kind = Kind::kSorted;
  std::size_t k = 0;  // kTruncate only

  static AblationMode Parse(std::string_view name, std::size_t k = 0);
};

// Reorders or truncates a list. kSorted sorts by asr_logprob (stable);
// kReversed needs a sorted or reversed list and flips the tag between the
// two; kRandomized needs a sorted list and applies a seeded Fisher-Yates
// shuffle; kTruncate keeps the first k entries (all if k exceeds the size).
NBestList Ablate(const NBestList& nbest, const AblationMode& mode,
                 std::uint64_t seed);

inline constexpr std::string_view kDefaultSeparator = "<sep>";

// First n hypothesis texts joined by the separator; n larger than the list
// emits every hypothesis without padding.
std::string EncodeNBestInput(const NBestList& nbest, std::size_t n,
                             std::string_view separator = kDefaultSeparator);

}  // namespace nbf

#endif  // NBF_RERANK_H_
