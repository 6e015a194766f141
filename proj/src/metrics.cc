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

#include "nbf/metrics.h"

#include <algorithm>
#include <limits>

#include "nbf/error.h"
#include "nbf/parallel.h"

namespace nbf {

std::size_t Alignment::Cost() const {
  return static_cast<std::size_t>(
      std::count_if(ops.begin(), ops.end(),
                    [](const AlignedPair& p) { return p.op != EditOp::kMatch; }));
}

std::vector<std::string> Alignment::RefWords() const {
  std::vector<std::string> out;
  for (const auto& p : ops) {
    if (p.ref_word) out.push_back(*p.ref_word);
  }
  return out;
}

std::vector<std::string> Alignment::HypWords() const {
  std::vector<std::string> out;
  for (const auto& p : ops) {
    if (p.hyp_word) out.push_back(*p.hyp_word);
  }
  return out;
}

Alignment Align(const std::vector<std::string>& ref,
                const std::vector<std::string>& hyp) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  const std::size_t w = m + 1;
  // cost[i*w+j]: distance between ref[i:] and hyp[j:].
  std::vector<std::uint32_t> cost((n + 1) * w);
  for (std::size_t i = n + 1; i-- > 0;) {
    for (std::size_t j = m + 1; j-- > 0;) {
      std::uint32_t& c = cost[i * w + j];
      if (i == n) {
        c = static_cast<std::uint32_t>(m - j);
      } else if (j == m) {
        c = static_cast<std::uint32_t>(n - i);
      } else {
        const std::uint32_t diag =
            cost[(i + 1) * w + j + 1] + (ref[i] == hyp[j] ? 0 : 1);
        c = std::min({diag, cost[(i + 1) * w + j] + 1, cost[i * w + j + 1] + 1});
      }
    }
  }

  Alignment out;
  out.ops.reserve(std::max(n, m));
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < n || j < m) {
    const std::uint32_t c = cost[i * w + j];
    if (i < n && j < m) {
      const bool same = ref[i] == hyp[j];
      const std::uint32_t diag = cost[(i + 1) * w + j + 1];
      if (same && c == diag) {
        out.ops.push_back({EditOp::kMatch, ref[i], hyp[j]});
        ++i, ++j;
        continue;
      }
      if (!same && c == diag + 1) {
        out.ops.push_back({EditOp::kSub, ref[i], hyp[j]});
        ++i, ++j;
        continue;
      }
    }
    if (i < n && c == cost[(i + 1) * w + j] + 1) {
      out.ops.push_back({EditOp::kDel, ref[i], std::nullopt});
      ++i;
    } else {
      out.ops.push_back({EditOp::kIns, std::nullopt, hyp[j]});
      ++j;
    }
  }
  return out;
}

std::size_t EditDistance(const std::vector<std::string>& ref,
                         const std::vector<std::string>& hyp) {
  std::vector<std::size_t> row(hyp.size() + 1);
  for (std::size_t j = 0; j <= hyp.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    std::size_t prev_diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= hyp.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({prev_diag + (ref[i - 1] == hyp[j - 1] ? 0 : 1),
                         up + 1, row[j - 1] + 1});
      prev_diag = up;
    }
  }
  return row[hyp.size()];
}

double WerBreakdown::wer() const {
  if (ref_len == 0) {
    return errors() == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return static_cast<double>(errors()) / static_cast<double>(ref_len);
}

WerBreakdown& WerBreakdown::operator+=(const WerBreakdown& o) {
  substitutions += o.substitutions;
  insertions += o.insertions;
  deletions += o.deletions;
  ref_len += o.ref_len;
  return *this;
}

WerBreakdown Breakdown(const Alignment& alignment) {
  WerBreakdown b;
  for (const auto& p : alignment.ops) {
    switch (p.op) {
      case EditOp::kMatch: break;
      case EditOp::kSub: ++b.substitutions; break;
      case EditOp::kIns: ++b.insertions; break;
      case EditOp::kDel: ++b.deletions; break;
    }
    if (p.ref_word) ++b.ref_len;
  }
  return b;
}

WerBreakdown Wer(std::string_view reference, std::string_view hypothesis,
                 const NormRules& rules) {
  return Breakdown(Align(NormalizeWords(reference, rules),
                         NormalizeWords(hypothesis, rules)));
}

double CorpusWer::ser() const {
  const std::size_t scored = utterances - skipped;
  if (scored == 0) return 0.0;
  return 1.0 - static_cast<double>(sentences_correct) /
                   static_cast<double>(scored);
}

std::string SelectFirstBest(const UtteranceRecord& record) {
  return record.nbest.hypotheses.empty() ? std::string()
                                         : record.nbest.hypotheses.front().text;
}

namespace {

CorpusWer Pool(const UtteranceSet& records, const NormRules& rules,
               int threads,
               const std::function<std::string(std::size_t)>& hyp_of) {
  for (const auto& r : records) {
    if (!r.reference) throw MissingReferenceError(r.utt_id);
  }
  std::vector<WerBreakdown> per(records.size());
  ParallelFor(records.size(), threads, [&](std::size_t i) {
    per[i] = Wer(*records[i].reference, hyp_of(i), rules);
  });
  CorpusWer out;
  out.utterances = records.size();
  for (const auto& b : per) {
    if (b.ref_len == 0) {
      ++out.skipped;
      continue;
    }
    out.total += b;
    if (b.errors() == 0) ++out.sentences_correct;
  }
  return out;
}

}  // namespace

CorpusWer ComputeCorpusWer(const UtteranceSet& records,
                           const HypothesisSelector& selector,
                           const NormRules& rules, int threads) {
  return Pool(records, rules, threads,
              [&](std::size_t i) { return selector(records[i]); });
}

CorpusWer ComputeCorpusWer(const UtteranceSet& records,
                           const std::vector<std::string>& hypotheses,
                           const NormRules& rules, int threads) {
  if (hypotheses.size() != records.size()) {
    throw Error("hypothesis count does not match record count");
  }
  return Pool(records, rules, threads,
              [&](std::size_t i) { return hypotheses[i]; });
}

std::size_t OracleIndex(const UtteranceRecord& record, const NormRules& rules) {
  if (!record.reference) throw MissingReferenceError(record.utt_id);
  const auto ref = NormalizeWords(*record.reference, rules);
  std::size_t best = 0;
  std::size_t best_cost = std::numeric_limits<std::size_t>::max();
  for (std::size_t k = 0; k < record.nbest.size(); ++k) {
    const std::size_t c =
        EditDistance(ref, NormalizeWords(record.nbest[k].text, rules));
    if (c < best_cost) {
      best_cost = c;
      best = k;
    }
  }
  return best;
}

std::vector<bool> WordErrorLabels(const Alignment& alignment) {
  std::vector<bool> labels;
  for (const auto& p : alignment.ops) {
    if (p.hyp_word) labels.push_back(p.op == EditOp::kMatch);
  }
  return labels;
}

OracleCurve ComputeOracleCurves(const UtteranceSet& records, std::size_t max_n,
                                const NormRules& rules) {
  OracleCurve curve;
  curve.match_at_rank.assign(max_n, 0.0);
  curve.contains_in_top.assign(max_n, 0.0);
  curve.rank_support.assign(max_n, 0);
  curve.utterances = records.size();
  std::vector<std::size_t> match_count(max_n, 0);
  std::vector<std::size_t> contains_count(max_n, 0);
  for (const auto& r : records) {
    if (!r.reference) throw MissingReferenceError(r.utt_id);
    if (r.nbest.order_tag != OrderTag::kSorted) {
      throw Error("oracle curves need sorted lists; '" + r.utt_id +
                  "' is tagged " + std::string(ToString(r.nbest.order_tag)));
    }
    const std::string ref = Normalize(*r.reference, rules);
    bool found = false;
    for (std::size_t n = 0; n < max_n; ++n) {
      if (n < r.nbest.size()) {
        ++curve.rank_support[n];
        if (Normalize(r.nbest[n].text, rules) == ref) {
          ++match_count[n];
          found = true;
        }
      }
      if (found) ++contains_count[n];
    }
  }
  for (std::size_t n = 0; n < max_n; ++n) {
    if (curve.rank_support[n] > 0) {
      curve.match_at_rank[n] = static_cast<double>(match_count[n]) /
                               static_cast<double>(curve.rank_support[n]);
    }
    if (!records.empty()) {
      curve.contains_in_top[n] = static_cast<double>(contains_count[n]) /
                                 static_cast<double>(records.size());
    }
  }
  return curve;
}

}  // namespace nbf
