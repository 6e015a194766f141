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

#include "nbf/confidence.h"

#include <cmath>

#include <fmt/format.h>

#include "nbf/error.h"
#include "nbf/metrics.h"
#include "nbf/parallel.h"

namespace nbf {

double PairwiseSum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return PairwiseSum(values.first(half)) + PairwiseSum(values.subspan(half));
}

double WordConfidenceScore(std::span<const double> token_probs) {
  if (token_probs.empty()) throw Error("word has no token probabilities");
  for (double p : token_probs) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(fmt::format("token probability {} outside [0,1]", p));
    }
  }
  return PairwiseSum(token_probs) / static_cast<double>(token_probs.size());
}

int BinIndex(double score, int num_bins) {
  if (num_bins <= 0) throw Error("number of bins must be positive");
  if (!(score >= 0.0 && score <= 1.0)) {
    throw Error(fmt::format("confidence {} outside [0,1]", score));
  }
  const int idx = static_cast<int>(std::floor(score * num_bins));
  return std::min(idx, num_bins - 1);
}

std::vector<WordConfidence> HypothesisWordConfidences(
    const std::vector<TokenProb>& token_probs, const NormRules& rules) {
  std::vector<WordConfidence> out;
  for (const auto& group : GroupTokensIntoWords(token_probs)) {
    const double score = WordConfidenceScore(group.probs);
    for (auto& w : NormalizeWords(group.word, rules)) {
      out.push_back({std::move(w), score});
    }
  }
  return out;
}

CalibrationTable CalibrationReport(const UtteranceSet& records,
                                   const NormRules& rules, int num_bins,
                                   int threads) {
  if (num_bins <= 0) throw Error("number of bins must be positive");
  for (const auto& r : records) {
    if (!r.reference) throw MissingReferenceError(r.utt_id);
  }

  struct Scored {
    bool skipped = false;
    std::vector<std::pair<double, bool>> words;
  };
  std::vector<Scored> per(records.size());
  ParallelFor(records.size(), threads, [&](std::size_t i) {
    const auto& hyps = records[i].nbest.hypotheses;
    if (hyps.empty() || !hyps.front().token_probs) {
      per[i].skipped = true;
      return;
    }
    const auto confs =
        HypothesisWordConfidences(*hyps.front().token_probs, rules);
    std::vector<std::string> hyp_words;
    hyp_words.reserve(confs.size());
    for (const auto& c : confs) hyp_words.push_back(c.word);
    const auto labels = WordErrorLabels(
        Align(NormalizeWords(*records[i].reference, rules), hyp_words));
    per[i].words.reserve(confs.size());
    for (std::size_t k = 0; k < confs.size(); ++k) {
      per[i].words.emplace_back(confs[k].score, labels[k]);
    }
  });

  std::vector<std::vector<double>> conf_by_bin(num_bins);
  std::vector<std::size_t> correct_by_bin(num_bins, 0);
  CalibrationTable table;
  for (const auto& s : per) {
    if (s.skipped) {
      ++table.skipped_utterances;
      continue;
    }
    for (const auto& [score, correct] : s.words) {
      const int b = BinIndex(score, num_bins);
      conf_by_bin[b].push_back(score);
      if (correct) ++correct_by_bin[b];
      ++table.total_words;
    }
  }
  table.bins.resize(num_bins);
  for (int b = 0; b < num_bins; ++b) {
    CalibrationBin& bin = table.bins[b];
    bin.lo = static_cast<double>(b) / num_bins;
    bin.hi = static_cast<double>(b + 1) / num_bins;
    bin.word_count = conf_by_bin[b].size();
    if (bin.word_count > 0) {
      const double n = static_cast<double>(bin.word_count);
      bin.mean_confidence = PairwiseSum(conf_by_bin[b]) / n;
      bin.empirical_accuracy = static_cast<double>(correct_by_bin[b]) / n;
    }
  }
  return table;
}

}  // namespace nbf
