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

// nbf: command-line front end for n-best evaluation, rescoring and
// reranking.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "nbf/confidence.h"
#include "nbf/datamodel.h"
#include "nbf/error.h"
#include "nbf/metrics.h"
#include "nbf/ngram_lm.h"
#include "nbf/pipeline.h"
#include "nbf/rerank.h"
#include "nbf/scorer.h"
#include "nbf/synth.h"
#include "nbf/textnorm.h"
#include "nbf/utf8.h"

namespace {

using namespace nbf;

struct GlobalOptions {
  std::string norm_rules;
  bool no_norm = false;
  int threads = 1;
  std::uint64_t seed = 0;
  bool allow_empty_text = false;

  NormRules Rules() const {
    if (no_norm) return NormRules::Identity();
    if (!norm_rules.empty()) return NormRules::Load(norm_rules);
    return NormRules();
  }
};

// Thrown after violations have been printed.
struct ValidationFailed {};

UtteranceSet LoadValidated(const std::string& source, const GlobalOptions& g) {
  UtteranceSet records = LoadDump(source);
  ValidateOptions vo;
  vo.allow_empty_text = g.allow_empty_text;
  const ValidationReport report = Validate(records, vo);
  if (!report.ok()) {
    for (const auto& v : report.violations) {
      std::cerr << "invalid: " << v.utt_id << " " << v.field << ": "
                << v.message << "\n";
    }
    throw ValidationFailed{};
  }
  return records;
}

std::vector<std::string> ReadLines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

// Writes to the file when a path is given, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw IoError("cannot open '" + path + "' for writing");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::vector<std::string> ScorerArgv(const std::string& flag) {
  std::string cmd = flag;
  if (cmd.empty()) {
    if (const char* env = std::getenv("NBF_SCORER_CMD")) cmd = env;
  }
  if (cmd.empty()) return {};
  return SplitCommandLine(cmd);
}

std::vector<double> Grid(double step) {
  if (!(step > 0.0 && step <= 1.0)) throw Error("grid step must be in (0,1]");
  std::vector<double> grid;
  const int n = static_cast<int>(std::lround(1.0 / step));
  for (int i = 0; i <= n; ++i) grid.push_back(std::min(1.0, i * step));
  if (grid.back() < 1.0) grid.push_back(1.0);
  return grid;
}

void PrintWerTable(std::ostream& out, const std::string& label,
                   const CorpusWer& w) {
  out << fmt::format("{:<12} {:>6} {:>7} {:>9} {:>6} {:>6} {:>6} {:>7} {:>7}\n",
                     "Set", "Utts", "Skipped", "RefWords", "Sub", "Ins", "Del",
                     "WER%", "SER%");
  out << fmt::format(
      "{:<12} {:>6} {:>7} {:>9} {:>6} {:>6} {:>6} {:>7.2f} {:>7.2f}\n", label,
      w.utterances, w.skipped, w.total.ref_len, w.total.substitutions,
      w.total.insertions, w.total.deletions, 100.0 * w.wer(), 100.0 * w.ser());
}

void PrintSweep(std::ostream& out, const Sweep& sweep) {
  out << fmt::format("{:>8} {:>8}\n", "lambda", "WER%");
  for (const auto& p : sweep.points) {
    out << fmt::format("{:>8.2f} {:>8.2f}{}\n", p.lambda, 100.0 * p.wer.wer(),
                       p.lambda == sweep.best_lambda ? "  *" : "");
  }
}

void WriteSelections(const UtteranceSet& records,
                     const std::vector<Selection>& sel, const std::string& path) {
  UtteranceSet out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    out.push_back(SelectionRecord(records[i], sel[i]));
  }
  Output o(path);
  WriteDump(out, o.stream());
}

void SummarizeSelections(const UtteranceSet& records,
                         const std::vector<Selection>& sel,
                         const NormRules& rules, int threads) {
  std::size_t changed = 0;
  std::size_t in_list = 0;
  for (const auto& s : sel) {
    if (s.in_list) ++in_list;
    if (s.chosen_rank.value_or(0) != 1) ++changed;
  }
  std::cerr << fmt::format("selections: {}  changed from 1-best: {}  in list: {}\n",
                           sel.size(), changed, in_list);
  const bool refs = std::all_of(records.begin(), records.end(),
                                [](const auto& r) { return r.reference.has_value(); });
  if (!refs) return;
  std::vector<std::string> texts;
  for (const auto& s : sel) texts.push_back(s.chosen_text);
  PrintWerTable(std::cerr, "1-best",
                ComputeCorpusWer(records, SelectFirstBest, rules, threads));
  PrintWerTable(std::cerr, "selected", ComputeCorpusWer(records, texts, rules, threads));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nbf: N-best evaluation, rescoring and reranking for black-box ASR output"};
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions g;
  app.add_option("--norm-rules", g.norm_rules, "Normalization rules file");
  app.add_flag("--no-norm", g.no_norm, "Disable text normalization");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Random seed");
  app.add_flag("--allow-empty-text", g.allow_empty_text,
               "Accept hypotheses with empty text");

  // eval
  auto* eval = app.add_subcommand("eval", "Corpus WER of a dump");
  std::string eval_in;
  std::string eval_select = "1best";
  bool eval_machine = false;
  eval->add_option("--in", eval_in, "Dump path or URL")->required();
  eval->add_option("--select", eval_select, "1best or oracle")
      ->check(CLI::IsMember({"1best", "oracle"}));
  eval->add_flag("--machine", eval_machine, "Also print key=value lines");

  // oracle
  auto* oracle = app.add_subcommand("oracle", "Oracle curves as CSV");
  std::string oracle_in;
  std::size_t oracle_max_n = 10;
  oracle->add_option("--in", oracle_in)->required();
  oracle->add_option("--max-n", oracle_max_n)->check(CLI::PositiveNumber);

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "Confidence calibration CSV");
  std::string cal_in;
  int cal_bins = kDefaultConfidenceBins;
  calibrate->add_option("--in", cal_in)->required();
  calibrate->add_option("--bins", cal_bins)->check(CLI::PositiveNumber);

  // rerank
  auto* rerank = app.add_subcommand("rerank", "Constrained or unconstrained reranking");
  std::string rr_in, rr_scores, rr_cmd, rr_out, rr_mode = "constrained";
  std::string rr_sep{kDefaultSeparator};
  double rr_lambda = 0.5, rr_step = 0.1, rr_timeout = 30.0;
  bool rr_sweep = false, rr_len_norm = false;
  std::size_t rr_nbest_input = 10;
  rerank->add_option("--in", rr_in)->required();
  rerank->add_option("--mode", rr_mode)->check(CLI::IsMember({"constrained", "uncon"}));
  rerank->add_option("--lambda", rr_lambda)->check(CLI::Range(0.0, 1.0));
  rerank->add_option("--scores", rr_scores, "Score vector file");
  rerank->add_option("--scorer-cmd", rr_cmd, "Scorer plugin command");
  rerank->add_flag("--sweep", rr_sweep, "Pick lambda minimizing WER on this dump");
  rerank->add_option("--grid-step", rr_step);
  rerank->add_flag("--length-norm", rr_len_norm);
  rerank->add_option("--nbest-input", rr_nbest_input)->check(CLI::PositiveNumber);
  rerank->add_option("--sep", rr_sep);
  rerank->add_option("--timeout", rr_timeout, "Seconds per request");
  rerank->add_option("--out", rr_out);

  // rescore
  auto* rescore = app.add_subcommand("rescore", "Rerank with the n-gram LM");
  std::string rs_in, rs_lm, rs_out, rs_scores_out;
  double rs_lambda = 0.5, rs_step = 0.1;
  bool rs_sweep = false, rs_len_norm = false;
  rescore->add_option("--in", rs_in)->required();
  rescore->add_option("--lm", rs_lm)->required();
  rescore->add_option("--lambda", rs_lambda)->check(CLI::Range(0.0, 1.0));
  rescore->add_flag("--sweep", rs_sweep);
  rescore->add_option("--grid-step", rs_step);
  rescore->add_flag("--length-norm", rs_len_norm);
  rescore->add_option("--out", rs_out);
  rescore->add_option("--scores-out", rs_scores_out, "Write LM score vectors");

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Reorder or truncate n-best lists");
  std::string ab_in, ab_out, ab_mode;
  std::size_t ab_k = 1;
  ablate->add_option("--in", ab_in)->required();
  ablate->add_option("--mode", ab_mode)
      ->required()
      ->check(CLI::IsMember({"sorted", "randomized", "reversed", "truncate"}));
  ablate->add_option("--k", ab_k, "Entries kept by truncate");
  ablate->add_option("--out", ab_out);

  // lm
  auto* lm = app.add_subcommand("lm", "n-gram language model");
  lm->require_subcommand(1);
  auto* lm_train = lm->add_subcommand("train", "Train from a text corpus");
  std::string lt_in, lt_out;
  int lt_order = 3, lt_min_count = 2;
  lm_train->add_option("--in", lt_in)->required();
  lm_train->add_option("--out", lt_out)->required();
  lm_train->add_option("--order", lt_order)->check(CLI::PositiveNumber);
  lm_train->add_option("--min-count", lt_min_count)->check(CLI::PositiveNumber);
  auto* lm_ppl = lm->add_subcommand("ppl", "Perplexity of a text corpus");
  std::string lp_model, lp_in;
  lm_ppl->add_option("--model", lp_model)->required();
  lm_ppl->add_option("--in", lp_in)->required();
  auto* lm_serve = lm->add_subcommand("serve", "Serve the LM as a scorer plugin");
  std::string ls_model;
  lm_serve->add_option("--model", ls_model)->required();

  // synth
  auto* synth = app.add_subcommand("synth", "Synthetic n-best dump from text");
  std::string sy_in, sy_out;
  std::size_t sy_sentences = 500;
  SynthChannelConfig sy;
  synth->add_option("--in", sy_in, "Sentence file (default: built-in grammar)");
  synth->add_option("--sentences", sy_sentences, "Generated sentence count");
  synth->add_option("--out", sy_out);
  synth->add_option("--sub", sy.char_sub_rate);
  synth->add_option("--del", sy.char_del_rate);
  synth->add_option("--ins", sy.char_ins_rate);
  synth->add_option("--nbest", sy.n_best_size);
  synth->add_option("--temperature", sy.temperature);
  synth->add_option("--noise", sy.score_noise);
  synth->add_option("--draws", sy.draws);
  auto* text = app.add_subcommand("text", "Sentences from the built-in grammar");
  std::size_t tx_count = 1000;
  std::string tx_out;
  text->add_option("--count", tx_count);
  text->add_option("--out", tx_out);

  // demo
  auto* demo = app.add_subcommand("demo", "End-to-end adaptation demo");
  std::string dm_train, dm_test, dm_cmd, dm_csv, dm_out;
  std::size_t dm_train_n = 3000, dm_test_n = 500;
  double dm_step = 0.1, dm_timeout = 30.0;
  int dm_order = 3;
  demo->add_option("--train", dm_train, "Training text (default: generated)");
  demo->add_option("--test", dm_test, "Test dump (default: synthesized)");
  demo->add_option("--train-sentences", dm_train_n);
  demo->add_option("--test-sentences", dm_test_n);
  demo->add_option("--order", dm_order)->check(CLI::PositiveNumber);
  demo->add_option("--grid-step", dm_step);
  demo->add_option("--scorer-cmd", dm_cmd);
  demo->add_option("--timeout", dm_timeout);
  demo->add_option("--csv", dm_csv, "Also write the table as CSV");
  demo->add_option("--out", dm_out, "Report path (default stdout)");

  // plugin
  auto* plugin = app.add_subcommand("plugin", "Scorer plugin tools");
  plugin->require_subcommand(1);
  auto* check = plugin->add_subcommand("check", "Run the conformance handshake");
  std::string ck_cmd;
  double ck_timeout = 10.0;
  check->add_option("--scorer-cmd", ck_cmd);
  check->add_option("--timeout", ck_timeout);

  CLI11_PARSE(app, argc, argv);

  try {
    const NormRules rules = g.Rules();

    if (*eval) {
      const auto records = LoadValidated(eval_in, g);
      const CorpusWer w =
          eval_select == "oracle"
              ? ComputeCorpusWer(
                    records,
                    [&](const UtteranceRecord& r) {
                      return r.nbest[OracleIndex(r, rules)].text;
                    },
                    rules, g.threads)
              : ComputeCorpusWer(records, SelectFirstBest, rules, g.threads);
      PrintWerTable(std::cout, eval_select, w);
      if (eval_machine) {
        std::cout << fmt::format(
            "utterances={} skipped={} ref_words={} sub={} ins={} del={} "
            "wer={:.6f} ser={:.6f}\n",
            w.utterances, w.skipped, w.total.ref_len, w.total.substitutions,
            w.total.insertions, w.total.deletions, w.wer(), w.ser());
      }
    } else if (*oracle) {
      const auto records = LoadValidated(oracle_in, g);
      const OracleCurve c = ComputeOracleCurves(records, oracle_max_n, rules);
      std::cout << "n,match_at_rank,contains_in_top\n";
      for (std::size_t n = 0; n < oracle_max_n; ++n) {
        std::cout << fmt::format("{},{:.6f},{:.6f}\n", n + 1,
                                 c.match_at_rank[n], c.contains_in_top[n]);
      }
    } else if (*calibrate) {
      const auto records = LoadValidated(cal_in, g);
      const CalibrationTable t = CalibrationReport(records, rules, cal_bins, g.threads);
      std::cout << "bin,lo,hi,count,mean_conf,accuracy\n";
      for (std::size_t b = 0; b < t.bins.size(); ++b) {
        const auto& bin = t.bins[b];
        std::cout << fmt::format("{},{:.4f},{:.4f},{},{:.6f},{:.6f}\n", b, bin.lo,
                                 bin.hi, bin.word_count, bin.mean_confidence,
                                 bin.empirical_accuracy);
      }
      if (t.skipped_utterances > 0) {
        std::cerr << t.skipped_utterances
                  << " utterance(s) without token probabilities skipped\n";
      }
    } else if (*rerank) {
      const auto records = LoadValidated(rr_in, g);
      RequestOptions ro;
      ro.nbest_input = rr_nbest_input;
      ro.separator = rr_sep;
      const auto timeout =
          std::chrono::milliseconds(static_cast<long>(rr_timeout * 1000));
      const auto cmd = ScorerArgv(rr_cmd);
      std::vector<Selection> sel;
      if (rr_mode == "uncon") {
        if (cmd.empty()) throw Error("unconstrained mode needs --scorer-cmd");
        PluginScorer scorer(cmd, timeout);
        const auto reqs = BuildRequests(records, ScoreTask::kGenerate, rules, ro);
        const auto resp = scorer.ScoreBatch(reqs);
        for (std::size_t i = 0; i < records.size(); ++i) {
          sel.push_back(SelectUnconstrained(records[i], *resp[i].corrected, rules));
        }
      } else {
        std::vector<ScoreVector> scores;
        if (!rr_scores.empty()) {
          scores = AlignScores(records, LoadScoreVectors(rr_scores));
        } else if (!cmd.empty()) {
          PluginScorer scorer(cmd, timeout);
          scores = ScoreRecords(scorer, records, rules, ro);
        } else {
          throw Error("constrained mode needs --scores or --scorer-cmd");
        }
        RerankConfig cfg;
        cfg.lambda_weight = rr_lambda;
        cfg.length_norm = rr_len_norm;
        if (rr_sweep) {
          const Sweep sweep = SweepLambda(records, scores, Grid(rr_step), rules,
                                          rr_len_norm, g.threads);
          PrintSweep(std::cerr, sweep);
          cfg.lambda_weight = sweep.best_lambda;
        }
        sel = RerankAll(records, scores, cfg, g.threads);
      }
      WriteSelections(records, sel, rr_out);
      SummarizeSelections(records, sel, rules, g.threads);
    } else if (*rescore) {
      const auto records = LoadValidated(rs_in, g);
      const NgramModel model = NgramModel::Load(rs_lm);
      const auto scores = LmScoreRecords(model, records, rules, g.threads);
      if (!rs_scores_out.empty()) {
        Output o(rs_scores_out);
        WriteScoreVectors(scores, o.stream());
      }
      RerankConfig cfg;
      cfg.lambda_weight = rs_lambda;
      cfg.length_norm = rs_len_norm;
      if (rs_sweep) {
        const Sweep sweep = SweepLambda(records, scores, Grid(rs_step), rules,
                                        rs_len_norm, g.threads);
        PrintSweep(std::cerr, sweep);
        cfg.lambda_weight = sweep.best_lambda;
      }
      const auto sel = RerankAll(records, scores, cfg, g.threads);
      WriteSelections(records, sel, rs_out);
      SummarizeSelections(records, sel, rules, g.threads);
    } else if (*ablate) {
      auto records = LoadValidated(ab_in, g);
      const AblationMode mode = AblationMode::Parse(ab_mode, ab_k);
      for (auto& r : records) {
        r.nbest = Ablate(r.nbest, mode, MixSeed(g.seed, Fnv1a(r.utt_id)));
      }
      Output o(ab_out);
      WriteDump(records, o.stream());
    } else if (*lm_train) {
      std::vector<std::string> corpus;
      for (const auto& l : ReadLines(lt_in)) corpus.push_back(Normalize(l, rules));
      const NgramModel m = NgramModel::Train(corpus, lt_order, lt_min_count);
      m.Save(lt_out);
      std::cerr << fmt::format("trained order-{} model, {} symbols, {} sentences\n",
                               m.order(), m.vocab_size(), corpus.size());
    } else if (*lm_ppl) {
      const NgramModel m = NgramModel::Load(lp_model);
      std::vector<std::string> corpus;
      std::size_t tokens = 0;
      for (const auto& l : ReadLines(lp_in)) {
        corpus.push_back(Normalize(l, rules));
        tokens += utf8::SplitWords(corpus.back()).size() + 1;
      }
      std::cout << fmt::format("sentences={} tokens={} ppl={:.6f}\n", corpus.size(),
                               tokens, m.Perplexity(corpus));
    } else if (*lm_serve) {
      const NgramModel m = NgramModel::Load(ls_model);
      LmScorer scorer(m);
      return ServeScorer(scorer, std::cin, std::cout);
    } else if (*synth) {
      sy.seed = g.seed;
      const auto sentences =
          sy_in.empty() ? GenerateSentences(sy_sentences, g.seed) : ReadLines(sy_in);
      Output o(sy_out);
      WriteDump(Synthesize(sentences, sy, g.threads), o.stream());
    } else if (*text) {
      Output o(tx_out);
      for (const auto& s : GenerateSentences(tx_count, g.seed)) o.stream() << s << '\n';
    } else if (*demo) {
      // Generated train and test text come from disjoint seed streams.
      const auto train = dm_train.empty()
                             ? GenerateSentences(dm_train_n, MixSeed(g.seed, 1))
                             : ReadLines(dm_train);
      UtteranceSet test;
      if (dm_test.empty()) {
        SynthChannelConfig cfg;
        cfg.seed = MixSeed(g.seed, 3);
        test = Synthesize(GenerateSentences(dm_test_n, MixSeed(g.seed, 2)), cfg,
                          g.threads);
      } else {
        test = LoadValidated(dm_test, g);
      }
      DemoConfig cfg;
      cfg.lm_order = dm_order;
      cfg.lambda_grid = Grid(dm_step);
      cfg.threads = g.threads;
      cfg.rules = rules;
      const auto cmd = ScorerArgv(dm_cmd);
      std::unique_ptr<PluginScorer> ext;
      if (!cmd.empty()) {
        ext = std::make_unique<PluginScorer>(
            cmd, std::chrono::milliseconds(static_cast<long>(dm_timeout * 1000)));
      }
      const DemoReport report = RunAdaptationDemo(train, test, cfg, ext.get());
      Output o(dm_out);
      o.stream() << report.ToText();
      if (!dm_csv.empty()) {
        Output c(dm_csv);
        c.stream() << report.ToCsv();
      }
    } else if (*check) {
      const auto cmd = ScorerArgv(ck_cmd);
      if (cmd.empty()) throw Error("plugin check needs --scorer-cmd or NBF_SCORER_CMD");
      const ConformanceReport r = CheckConformance(
          cmd, std::chrono::milliseconds(static_cast<long>(ck_timeout * 1000)));
      for (const auto& c : r.cases) {
        std::cout << fmt::format("{:<28} {}{}\n", c.name, c.passed ? "PASS" : "FAIL",
                                 c.passed ? "" : "  " + c.detail);
      }
      return r.all_passed() ? 0 : 1;
    }
  } catch (const ValidationFailed&) {
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
