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

#ifndef NBF_PIPELINE_H_
#define NBF_PIPELINE_H_

#include <optional>
#include <string>
#include <vector>

#include "nbf/datamodel.h"
#include "nbf/metrics.h"
#include "nbf/ngram_lm.h"
#include "nbf/rerank.h"
#include "nbf/scorer.h"
#include "nbf/textnorm.h"

namespace nbf {

// 0.0, 0.1, ..., 1.0
std::vector<double> DefaultLambdaGrid();

struct RequestOptions {
  // Hypotheses placed in the context string.
  std::size_t nbest_input = 10;
  std::string separator{kDefaultSeparator};
  // Candidates and n-best texts are sent normalized when rules are enabled.
  bool attach_phones = true;
  bool attach_confidences = true;
};

// One request per record. Score requests list every hypothesis as a
// candidate; generate requests carry only the context.
std::vector<ScoreRequest> BuildRequests(const UtteranceSet& records,
                                        ScoreTask task, const NormRules& rules,
                                        const RequestOptions& options);

// Score vectors from a scorer, one per record, in record order.
std::vector<ScoreVector> ScoreRecords(Scorer& scorer,
                                      const UtteranceSet& records,
                                      const NormRules& rules,
                                      const RequestOptions& options);

// LM scores of the normalized hypothesis texts.
std::vector<ScoreVector> LmScoreRecords(const NgramModel& model,
                                        const UtteranceSet& records,
                                        const NormRules& rules, int threads);

// Matches score vectors to records by utt_id; throws if one is missing.
std::vector<ScoreVector> AlignScores(const UtteranceSet& records,
                                     const std::vector<ScoreVector>& scores);

std::vector<Selection> RerankAll(const UtteranceSet& records,
                                 const std::vector<ScoreVector>& scores,
                                 const RerankConfig& config, int threads);

struct SweepPoint {
  double lambda = 0.0;
  CorpusWer wer;
};

struct Sweep {
  std::vector<SweepPoint> points;
  // Lowest WER; the smallest lambda wins ties.
  double best_lambda = 0.0;
};

Sweep SweepLambda(const UtteranceSet& records,
                  const std::vector<ScoreVector>& scores,
                  const std::vector<double>& grid, const NormRules& rules,
                  bool length_norm, int threads);

// Deterministic 50/50 split on the utt_id hash (FNV-1a, then a splitmix64
// finalizer).
bool IsDevUtterance(const std::string& utt_id);

// Dump record for a selection: the chosen hypothesis alone, reference and
// source preserved. Output outside the list gets asr_logprob 0.
UtteranceRecord SelectionRecord(const UtteranceRecord& source,
                                const Selection& selection);

struct DemoConfig {
  int lm_order = 3;
  int lm_min_count = 2;
  std::vector<double> lambda_grid = DefaultLambdaGrid();
  RequestOptions requests;
  bool length_norm = false;
  int threads = 1;
  NormRules rules;
};

struct DemoRow {
  std::string method;
  std::optional<double> lambda;
  CorpusWer dev;
  CorpusWer test;
};

struct DemoReport {
  std::vector<SweepPoint> lm_sweep;
  std::vector<SweepPoint> scorer_sweep;
  std::vector<DemoRow> rows;
  std::string scorer_id;
  std::size_t dev_utterances = 0;
  std::size_t test_utterances = 0;
  // oracle <= rescored <= baseline on the test split.
  bool ordering_holds = false;

  const DemoRow& Row(const std::string& method) const;
  std::string ToText() const;
  std::string ToCsv() const;
};

// Trains an n-gram LM on the training sentences, tunes lambda on the dev
// half of the dump and reports dev/test WER for the 1-best baseline, LM
// rescoring, constrained reranking with `scorer` (the same LM through the
// scorer interface when null), unconstrained correction (external scorer
// only) and the oracle. Stage failures are rethrown prefixed by the stage.
DemoReport RunAdaptationDemo(const std::vector<std::string>& train_sentences,
                             const UtteranceSet& test_records,
                             const DemoConfig& config,
                             Scorer* scorer = nullptr);

}  // namespace nbf

#endif  // NBF_PIPELINE_H_
