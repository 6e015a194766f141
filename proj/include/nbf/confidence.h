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

#ifndef NBF_CONFIDENCE_H_
#define NBF_CONFIDENCE_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nbf/datamodel.h"
#include "nbf/textnorm.h"

namespace nbf {

inline constexpr int kDefaultConfidenceBins = 5;

struct WordConfidence {
  std::string word;
  double score = 0.0;
};

// Mean of the word's token probabilities. Throws on an empty list or a
// probability outside [0,1].
double WordConfidenceScore(std::span<const double> token_probs);

// Equal-width bin on [0,1]: min(floor(score * bins), bins - 1).
int BinIndex(double score, int num_bins);

// Confidences for the normalized words of a hypothesis. Each word-piece
// group is normalized on its own; a group that normalizes to several words
// lends its confidence to each, one that normalizes to nothing is dropped.
std::vector<WordConfidence> HypothesisWordConfidences(
    const std::vector<TokenProb>& token_probs, const NormRules& rules);

struct CalibrationBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t word_count = 0;
  double mean_confidence = 0.0;
  double empirical_accuracy = 0.0;
};

struct CalibrationTable {
  std::vector<CalibrationBin> bins;
  std::size_t total_words = 0;
  std::size_t skipped_utterances = 0;  // 1-best without token_probs
};

// Bins every 1-best word by confidence and compares against its correctness
// label from the alignment with the reference.
CalibrationTable CalibrationReport(const UtteranceSet& records,
                                   const NormRules& rules, int num_bins,
                                   int threads = 1);

// Pairwise (cascade) summation.
double PairwiseSum(std::span<const double> values);

}  // namespace nbf

#endif  // NBF_CONFIDENCE_H_
