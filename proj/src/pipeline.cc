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

#include "nbf/pipeline.h"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <fmt/format.h>

#include "nbf/confidence.h"
#include "nbf/error.h"
#include "nbf/parallel.h"
#include "nbf/synth.h"

namespace nbf {

std::vector<double> DefaultLambdaGrid() {
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
  return grid;
}

std::vector<ScoreRequest> BuildRequests(const UtteranceSet& records,
                                        ScoreTask task, const NormRules& rules,
                                        const RequestOptions& options) {
  std::vector<ScoreRequest> out;
  out.reserve(records.size());
  for (const auto& rec : records) {
    ScoreRequest r;
    r.utt_id = rec.utt_id;
    r.task = task;
    NBestList normalized = rec.nbest;
    for (auto& h : normalized.hypotheses) h.text = Normalize(h.text, rules);
    for (const auto& h : normalized.hypotheses) r.n_best_texts.push_back(h.text);
    r.context = EncodeNBestInput(normalized, options.nbest_input, options.separator);
    if (task == ScoreTask::kScore) r.candidates = r.n_best_texts;

    const auto& hyps = rec.nbest.hypotheses;
    if (options.attach_phones &&
        std::all_of(hyps.begin(), hyps.end(),
                    [](const Hypothesis& h) { return h.phones.has_value(); })) {
      std::vector<std::string> phones;
      for (const auto& h : hyps) phones.push_back(*h.phones);
      r.phones = std::move(phones);
    }
    if (options.attach_confidences &&
        std::all_of(hyps.begin(), hyps.end(), [](const Hypothesis& h) {
          return h.token_probs.has_value();
        })) {
      std::vector<std::vector<double>> confs;
      for (const auto& h : hyps) {
        std::vector<double> per_word;
        for (const auto& wc : HypothesisWordConfidences(*h.token_probs, rules)) {
          per_word.push_back(wc.score);
        }
        confs.push_back(std::move(per_word));
      }
      r.word_confidences = std::move(confs);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<ScoreVector> ScoreRecords(Scorer& scorer,
                                      const UtteranceSet& records,
                                      const NormRules& rules,
                                      const RequestOptions& options) {
  const auto requests = BuildRequests(records, ScoreTask::kScore, rules, options);
  const auto responses = scorer.ScoreBatch(requests);
  if (responses.size() != requests.size()) {
    throw ProtocolError(fmt::format("{} responses for {} requests",
                                    responses.size(), requests.size()),
                        "");
  }
  std::vector<ScoreVector> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CheckResponse(requests[i], responses[i], ToLine(responses[i]));
    out.push_back({records[i].utt_id, scorer.id(), *responses[i].scores});
  }
  return out;
}

std::vector<ScoreVector> LmScoreRecords(const NgramModel& model,
                                        const UtteranceSet& records,
                                        const NormRules& rules, int threads) {
  std::vector<ScoreVector> out(records.size());
  ParallelFor(records.size(), threads, [&](std::size_t i) {
    ScoreVector& sv = out[i];
    sv.utt_id = records[i].utt_id;
    sv.scorer_id = "ngram-lm";
    for (const auto& h : records[i].nbest.hypotheses) {
      sv.scores.push_back(model.Score(Normalize(h.text, rules)));
    }
  });
  return out;
}

std::vector<ScoreVector> AlignScores(const UtteranceSet& records,
                                     const std::vector<ScoreVector>& scores) {
  std::unordered_map<std::string, const ScoreVector*> by_id;
  for (const auto& sv : scores) by_id[sv.utt_id] = &sv;
  std::vector<ScoreVector> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    auto it = by_id.find(r.utt_id);
    if (it == by_id.end()) throw Error("no scores for '" + r.utt_id + "'");
    out.push_back(*it->second);
  }
  return out;
}

std::vector<Selection> RerankAll(const UtteranceSet& records,
                                 const std::vector<ScoreVector>& scores,
                                 const RerankConfig& config, int threads) {
  if (scores.size() != records.size()) {
    throw Error("score vector count does not match record count");
  }
  std::vector<Selection> out(records.size());
  ParallelFor(records.size(), threads, [&](std::size_t i) {
    out[i] = RerankConstrained(records[i], scores[i], config);
  });
  return out;
}

Sweep SweepLambda(const UtteranceSet& records,
                  const std::vector<ScoreVector>& scores,
                  const std::vector<double>& grid, const NormRules& rules,
                  bool length_norm, int threads) {
  if (grid.empty()) throw Error("empty lambda grid");
  Sweep sweep;
  std::size_t best = 0;
  for (double lambda : grid) {
    RerankConfig cfg;
    cfg.lambda_weight = lambda;
    cfg.length_norm = length_norm;
    const auto sel = RerankAll(records, scores, cfg, threads);
    std::vector<std::string> texts;
    texts.reserve(sel.size());
    for (const auto& s : sel) texts.push_back(s.chosen_text);
    sweep.points.push_back({lambda, ComputeCorpusWer(records, texts, rules, threads)});
    const auto& cur = sweep.points.back().wer.total;
    const auto& top = sweep.points[best].wer.total;
    // Compare error/length ratios exactly via cross-multiplication.
    if (cur.errors() * top.ref_len < top.errors() * cur.ref_len ||
        (cur.errors() * top.ref_len == top.errors() * cur.ref_len &&
         lambda < sweep.points[best].lambda)) {
      best = sweep.points.size() - 1;
    }
  }
  sweep.best_lambda = sweep.points[best].lambda;
  return sweep;
}

bool IsDevUtterance(const std::string& utt_id) {
  return (MixSeed(Fnv1a(utt_id), 0) & 1) == 0;
}

UtteranceRecord SelectionRecord(const UtteranceRecord& source,
                                const Selection& selection) {
  UtteranceRecord out;
  out.utt_id = source.utt_id;
  out.reference = source.reference;
  out.source_tag = source.source_tag;
  out.nbest.order_tag = OrderTag::kUnknown;
  if (selection.chosen_rank) {
    out.nbest.hypotheses.push_back(
        source.nbest.hypotheses.at(*selection.chosen_rank - 1));
    out.nbest.hypotheses.back().text = selection.chosen_text;
  } else {
    Hypothesis h;
    h.text = selection.chosen_text;
    h.asr_logprob = 0.0;
    out.nbest.hypotheses.push_back(std::move(h));
  }
  return out;
}

const DemoRow& DemoReport::Row(const std::string& method) const {
  for (const auto& r : rows) {
    if (r.method == method) return r;
  }
  throw Error("no demo row '" + method + "'");
}

namespace {

std::string Percent(const CorpusWer& w) {
  return fmt::format("{:.2f}", 100.0 * w.wer());
}

template <typename Fn>
auto Stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const std::exception& e) {
    throw Error(fmt::format("stage '{}': {}", name, e.what()));
  }
}

UtteranceSet Subset(const UtteranceSet& records, bool dev) {
  UtteranceSet out;
  for (const auto& r : records) {
    if (IsDevUtterance(r.utt_id) == dev) out.push_back(r);
  }
  return out;
}

std::vector<ScoreVector> SubsetScores(const UtteranceSet& records,
                                      const std::vector<ScoreVector>& scores,
                                      bool dev) {
  std::vector<ScoreVector> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (IsDevUtterance(records[i].utt_id) == dev) out.push_back(scores[i]);
  }
  return out;
}

CorpusWer EvalLambda(const UtteranceSet& records,
                     const std::vector<ScoreVector>& scores, double lambda,
                     const DemoConfig& config) {
  RerankConfig cfg;
  cfg.lambda_weight = lambda;
  cfg.length_norm = config.length_norm;
  std::vector<std::string> texts;
  for (const auto& s : RerankAll(records, scores, cfg, config.threads)) {
    texts.push_back(s.chosen_text);
  }
  return ComputeCorpusWer(records, texts, config.rules, config.threads);
}

}  // namespace

DemoReport RunAdaptationDemo(const std::vector<std::string>& train_sentences,
                             const UtteranceSet& test_records,
                             const DemoConfig& config, Scorer* scorer) {
  Stage("validate", [&] {
    const auto report = Validate(test_records);
    if (!report.ok()) {
      const auto& v = report.violations.front();
      throw Error(fmt::format("{} violation(s); first: {} {}: {}",
                              report.violations.size(), v.utt_id, v.field,
                              v.message));
    }
    for (const auto& r : test_records) {
      if (!r.reference) throw MissingReferenceError(r.utt_id);
    }
  });

  const NgramModel model = Stage("train-lm", [&] {
    std::vector<std::string> normalized;
    normalized.reserve(train_sentences.size());
    for (const auto& s : train_sentences) {
      normalized.push_back(Normalize(s, config.rules));
    }
    return NgramModel::Train(normalized, config.lm_order, config.lm_min_count);
  });

  const UtteranceSet dev = Subset(test_records, true);
  const UtteranceSet test = Subset(test_records, false);
  if (dev.empty() || test.empty()) {
    throw Error("stage 'split': dump too small for a dev/test split");
  }

  const auto lm_scores = Stage("lm-score", [&] {
    return LmScoreRecords(model, test_records, config.rules, config.threads);
  });

  LmScorer default_scorer(model);
  Scorer& active = scorer ? *scorer : default_scorer;
  const auto ext_scores = Stage("scorer", [&] {
    return ScoreRecords(active, test_records, config.rules, config.requests);
  });

  DemoReport report;
  report.scorer_id = active.id();
  report.dev_utterances = dev.size();
  report.test_utterances = test.size();

  const auto lm_dev = SubsetScores(test_records, lm_scores, true);
  const auto lm_test = SubsetScores(test_records, lm_scores, false);
  const auto ext_dev = SubsetScores(test_records, ext_scores, true);
  const auto ext_test = SubsetScores(test_records, ext_scores, false);

  const Sweep lm_sweep = Stage("sweep", [&] {
    return SweepLambda(dev, lm_dev, config.lambda_grid, config.rules,
                       config.length_norm, config.threads);
  });
  const Sweep ext_sweep = Stage("sweep", [&] {
    return SweepLambda(dev, ext_dev, config.lambda_grid, config.rules,
                       config.length_norm, config.threads);
  });
  report.lm_sweep = lm_sweep.points;
  report.scorer_sweep = ext_sweep.points;

  Stage("evaluate", [&] {
    const auto& rules = config.rules;
    const int th = config.threads;
    auto oracle_of = [&](const UtteranceRecord& r) {
      return r.nbest[OracleIndex(r, rules)].text;
    };
    report.rows.push_back({"Baseline", std::nullopt,
                           ComputeCorpusWer(dev, SelectFirstBest, rules, th),
                           ComputeCorpusWer(test, SelectFirstBest, rules, th)});
    report.rows.push_back({"LM rescoring", lm_sweep.best_lambda,
                           EvalLambda(dev, lm_dev, lm_sweep.best_lambda, config),
                           EvalLambda(test, lm_test, lm_sweep.best_lambda, config)});
    report.rows.push_back(
        {"Constrained", ext_sweep.best_lambda,
         EvalLambda(dev, ext_dev, ext_sweep.best_lambda, config),
         EvalLambda(test, ext_test, ext_sweep.best_lambda, config)});
    if (scorer) {
      auto corrected = [&](const UtteranceSet& set) {
        const auto reqs =
            BuildRequests(set, ScoreTask::kGenerate, rules, config.requests);
        const auto resp = scorer->ScoreBatch(reqs);
        std::vector<std::string> texts;
        for (std::size_t i = 0; i < set.size(); ++i) {
          CheckResponse(reqs[i], resp[i], ToLine(resp[i]));
          texts.push_back(*resp[i].corrected);
        }
        return ComputeCorpusWer(set, texts, rules, th);
      };
      report.rows.push_back(
          {"Unconstrained", std::nullopt, corrected(dev), corrected(test)});
    }
    report.rows.push_back({"Oracle", std::nullopt,
                           ComputeCorpusWer(dev, oracle_of, rules, th),
                           ComputeCorpusWer(test, oracle_of, rules, th)});
  });

  const double base = report.Row("Baseline").test.wer();
  const double resc = report.Row("LM rescoring").test.wer();
  const double orac = report.Row("Oracle").test.wer();
  report.ordering_holds = orac <= resc && resc <= base;
  return report;
}

std::string DemoReport::ToText() const {
  std::string out;
  out += fmt::format("Scorer: {}\n", scorer_id);
  out += fmt::format("Split: {} dev / {} test utterances\n\n", dev_utterances,
                     test_utterances);
  out += "Lambda sweep (dev WER %)\n";
  out += fmt::format("{:>8} {:>12} {:>12}\n", "lambda", "LM", "scorer");
  for (std::size_t i = 0; i < lm_sweep.size(); ++i) {
    out += fmt::format("{:>8.2f} {:>12} {:>12}\n", lm_sweep[i].lambda,
                       Percent(lm_sweep[i].wer), Percent(scorer_sweep[i].wer));
  }
  out += "\n";
  out += fmt::format("{:<16} {:>8} {:>10} {:>10}\n", "Method", "lambda",
                     "Dev WER", "Test WER");
  out += std::string(47, '-') + "\n";
  for (const auto& r : rows) {
    out += fmt::format("{:<16} {:>8} {:>10} {:>10}\n", r.method,
                       r.lambda ? fmt::format("{:.2f}", *r.lambda) : "-",
                       Percent(r.dev), Percent(r.test));
  }
  out += fmt::format("\nOrdering oracle <= rescored <= baseline (test): {}\n",
                     ordering_holds ? "holds" : "violated");
  return out;
}

std::string DemoReport::ToCsv() const {
  std::string out =
      "method,lambda,dev_errors,dev_words,dev_wer,test_errors,test_words,"
      "test_wer\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{:.6f},{},{},{:.6f}\n", r.method,
                       r.lambda ? fmt::format("{:.2f}", *r.lambda) : "",
                       r.dev.total.errors(), r.dev.total.ref_len, r.dev.wer(),
                       r.test.total.errors(), r.test.total.ref_len,
                       r.test.wer());
  }
  return out;
}

}  // namespace nbf
