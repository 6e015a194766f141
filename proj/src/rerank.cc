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

#include "nbf/rerank.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "nbf/error.h"
#include "nbf/random.h"
#include "nbf/utf8.h"

namespace nbf {

void RerankConfig::Check() const {
  if (!(lambda_weight >= 0.0 && lambda_weight <= 1.0)) {
    throw Error(fmt::format("lambda {} outside [0,1]", lambda_weight));
  }
}

double Combine(double asr_logprob, double ec_logprob, double lambda) {
  return (1.0 - lambda) * asr_logprob + lambda * ec_logprob;
}

Selection RerankConstrained(const UtteranceRecord& record,
                            const ScoreVector& scores,
                            const RerankConfig& config) {
  config.Check();
  const auto& hyps = record.nbest.hypotheses;
  if (scores.scores.size() != hyps.size()) {
    throw Error(fmt::format("'{}': {} external scores for {} hypotheses",
                            record.utt_id, scores.scores.size(), hyps.size()));
  }
  if (hyps.empty()) throw Error("'" + record.utt_id + "': empty n-best list");
  Selection sel;
  sel.utt_id = record.utt_id;
  sel.combined_scores.reserve(hyps.size());
  std::size_t best = 0;
  for (std::size_t k = 0; k < hyps.size(); ++k) {
    double asr = hyps[k].asr_logprob;
    double ec = scores.scores[k];
    if (config.length_norm) {
      const double len = static_cast<double>(
          std::max<std::size_t>(1, utf8::SplitWords(hyps[k].text).size()));
      asr /= len;
      ec /= len;
    }
    sel.combined_scores.push_back(Combine(asr, ec, config.lambda_weight));
    // Strict comparison keeps the earliest rank on ties.
    if (sel.combined_scores[k] > sel.combined_scores[best]) best = k;
  }
  sel.chosen_text = hyps[best].text;
  sel.chosen_rank = best + 1;
  sel.in_list = true;
  return sel;
}

Selection SelectUnconstrained(const UtteranceRecord& record,
                              std::string_view corrected_text,
                              const NormRules& rules) {
  Selection sel;
  sel.utt_id = record.utt_id;
  sel.chosen_text = std::string(corrected_text);
  const std::string target = Normalize(corrected_text, rules);
  const auto& hyps = record.nbest.hypotheses;
  for (std::size_t k = 0; k < hyps.size(); ++k) {
    if (Normalize(hyps[k].text, rules) == target) {
      sel.chosen_rank = k + 1;
      sel.in_list = true;
      break;
    }
  }
  return sel;
}

AblationMode AblationMode::Parse(std::string_view name, std::size_t k) {
  AblationMode m;
  if (name == "sorted") {
    m.kind = Kind::kSorted;
  } else if (name == "randomized") {
    m.kind = Kind::kRandomized;
  } else if (name == "reversed") {
    m.kind = Kind::kReversed;
  } else if (name == "truncate") {
    m.kind = Kind::kTruncate;
    m.k = k;
  } else {
    throw Error("unknown ablation mode '" + std::string(name) + "'");
  }
  return m;
}

NBestList Ablate(const NBestList& nbest, const AblationMode& mode,
                 std::uint64_t seed) {
  NBestList out = nbest;
  auto& hyps = out.hypotheses;
  switch (mode.kind) {
    case AblationMode::Kind::kSorted:
      std::stable_sort(hyps.begin(), hyps.end(),
                       [](const Hypothesis& a, const Hypothesis& b) {
                         return a.asr_logprob > b.asr_logprob;
                       });
      out.order_tag = OrderTag::kSorted;
      break;
    case AblationMode::Kind::kReversed:
      if (nbest.order_tag != OrderTag::kSorted &&
          nbest.order_tag != OrderTag::kReversed) {
        throw Error("reversal needs a sorted or reversed list");
      }
      std::reverse(hyps.begin(), hyps.end());
      out.order_tag = nbest.order_tag == OrderTag::kSorted ? OrderTag::kReversed
                                                           : OrderTag::kSorted;
      break;
    case AblationMode::Kind::kRandomized: {
      if (nbest.order_tag != OrderTag::kSorted) {
        throw Error("randomization needs a sorted list");
      }
      Rng rng(seed);
      for (std::size_t i = hyps.size(); i > 1; --i) {
        std::swap(hyps[i - 1], hyps[rng.Uniform(i)]);
      }
      out.order_tag = OrderTag::kRandomized;
      break;
    }
    case AblationMode::Kind::kTruncate:
      if (mode.k < hyps.size()) hyps.resize(std::max<std::size_t>(mode.k, 1));
      break;
  }
  return out;
}

std::string EncodeNBestInput(const NBestList& nbest, std::size_t n,
                             std::string_view separator) {
  if (n == 0) throw Error("n-best input needs n >= 1");
  std::string out;
  const std::size_t count = std::min(n, nbest.size());
  for (std::size_t k = 0; k < count; ++k) {
    if (k > 0) out.append(separator);
    out += nbest[k].text;
  }
  return out;
}

}  // namespace nbf
