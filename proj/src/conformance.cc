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

#include <cmath>
#include <functional>

#include <fmt/format.h>

#include "nbf/error.h"
#include "nbf/scorer.h"

namespace nbf {

namespace {

using Responses = std::vector<ScoreResponse>;

ScoreRequest MakeScore(std::string id, std::vector<std::string> candidates) {
  ScoreRequest r;
  r.utt_id = std::move(id);
  r.task = ScoreTask::kScore;
  r.n_best_texts = candidates;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (i > 0) r.context += "<sep>";
    r.context += candidates[i];
  }
  r.candidates = std::move(candidates);
  return r;
}

ScoreRequest MakeGenerate(std::string id, std::vector<std::string> nbest) {
  ScoreRequest r = MakeScore(std::move(id), std::move(nbest));
  r.task = ScoreTask::kGenerate;
  r.candidates.reset();
  return r;
}

// Runs requests through a fresh plugin; returns an error message or empty.
std::string Exchange(const std::vector<std::string>& argv,
                     const std::vector<ScoreRequest>& requests,
                     std::chrono::milliseconds timeout, Responses* out) {
  try {
    PluginScorer plugin(argv, timeout);
    *out = plugin.ScoreBatch(requests);
    return {};
  } catch (const Error& e) {
    return e.what();
  }
}

using CaseFn = std::function<std::string(const std::vector<std::string>&,
                                         std::chrono::milliseconds)>;

std::string ExpectOk(const std::vector<std::string>& argv,
                     const std::vector<ScoreRequest>& requests,
                     std::chrono::milliseconds timeout,
                     const std::function<std::string(const Responses&)>& extra =
                         nullptr) {
  Responses resp;
  std::string err = Exchange(argv, requests, timeout, &resp);
  if (!err.empty()) return err;
  return extra ? extra(resp) : std::string();
}

std::string EmptyCandidatesRejected(const std::vector<std::string>& argv,
                                    std::chrono::milliseconds timeout) {
  // Written raw: the bridge itself never sends such a request.
  const std::string line =
      R"({"utt_id":"empty-1","task":"score","candidates":[],"context":"a","n_best_texts":["a"],"phones":null,"word_confidences":null})";
  try {
    Subprocess proc(argv);
    Subprocess::Exchange ex = proc.Run({line}, timeout);
    if (ex.status == Subprocess::Status::kTimeout) {
      proc.Terminate(std::chrono::milliseconds(0));
      return "no answer to an empty candidate list";
    }
    if (ex.status == Subprocess::Status::kClosed) {
      const int code = proc.Terminate(std::chrono::milliseconds(2000));
      return code != 0 ? std::string()
                       : "plugin exited cleanly without rejecting";
    }
    const ScoreResponse resp = ParseResponseLine(ex.lines[0]);
    if (resp.utt_id != "empty-1") return "rejection does not echo utt_id";
    if (resp.scores && !resp.scores->empty()) {
      return "scores returned for an empty candidate list";
    }
    if (resp.scores && !resp.error) {
      return "empty score list accepted without an error";
    }
    return {};
  } catch (const Error& e) {
    return e.what();
  }
}

}  // namespace

ConformanceReport CheckConformance(const std::vector<std::string>& argv,
                                   std::chrono::milliseconds timeout) {
  const std::vector<std::pair<std::string, CaseFn>> cases = {
      {"score_basic",
       [](const auto& a, auto t) {
         return ExpectOk(a, {MakeScore("basic-1", {"the cat sat", "the bat sat"})},
                         t);
       }},
      {"score_single_candidate",
       [](const auto& a, auto t) {
         return ExpectOk(a, {MakeScore("single-1", {"hello world"})}, t);
       }},
      {"score_many_candidates",
       [](const auto& a, auto t) {
         std::vector<std::string> c;
         for (int i = 0; i < 10; ++i) c.push_back(fmt::format("candidate {}", i));
         return ExpectOk(a, {MakeScore("many-1", c)}, t);
       }},
      {"finite_scores",
       [](const auto& a, auto t) {
         // CheckResponse already rejects non-finite values; this case makes
         // the requirement visible on its own line.
         return ExpectOk(a,
                         {MakeScore("finite-1", {"a", "a b c d e f", "zzz qqq"})},
                         t);
       }},
      {"unicode_text",
       [](const auto& a, auto t) {
         return ExpectOk(
             a,
             {MakeScore("unicode-\xC3\xA9",
                        {"caf\xC3\xA9 na\xC3\xAFve", "\xE6\x97\xA5\xE6\x9C\xAC",
                         "\xF0\x9F\x99\x82 emoji", "quote \" and \\ slash"})},
             t);
       }},
      {"long_input",
       [](const auto& a, auto t) {
         std::string longtext;
         for (int i = 0; i < 2000; ++i) longtext += fmt::format("word{} ", i % 97);
         std::vector<std::string> nbest(50, longtext);
         nbest[1] += "tail";
         return ExpectOk(a, {MakeScore("long-1", nbest)}, t);
       }},
      {"generate_mode",
       [](const auto& a, auto t) {
         return ExpectOk(a, {MakeGenerate("gen-1", {"the cat sat", "the bat sat"})},
                         t, [](const Responses& r) -> std::string {
                           if (r[0].corrected->empty()) return "empty correction";
                           return {};
                         });
       }},
      {"mixed_tasks",
       [](const auto& a, auto t) {
         return ExpectOk(a,
                         {MakeScore("mix-1", {"a b", "a c"}),
                          MakeGenerate("mix-2", {"a b", "a c"}),
                          MakeScore("mix-3", {"x"})},
                         t);
       }},
      {"ordering",
       [](const auto& a, auto t) {
         std::vector<ScoreRequest> reqs;
         for (int i = 0; i < 20; ++i) {
           std::vector<std::string> c;
           for (int k = 0; k <= i % 4; ++k) c.push_back(fmt::format("w{} v{}", i, k));
           reqs.push_back(MakeScore(fmt::format("order-{:02d}", i), c));
         }
         return ExpectOk(a, reqs, t);
       }},
      {"optional_fields",
       [](const auto& a, auto t) {
         ScoreRequest r = MakeScore("feat-1", {"the cat", "the bat"});
         r.phones = std::vector<std::string>{"DH AH K AE T", "DH AH B AE T"};
         r.word_confidences =
             std::vector<std::vector<double>>{{0.9, 0.8}, {0.9, 0.3}};
         return ExpectOk(a, {r}, t);
       }},
      {"deterministic",
       [](const auto& a, auto t) {
         ScoreRequest r1 = MakeScore("det-1", {"one two", "one too", "won two"});
         ScoreRequest r2 = r1;
         r2.utt_id = "det-2";
         return ExpectOk(a, {r1, r2}, t, [](const Responses& r) -> std::string {
           if (*r[0].scores != *r[1].scores) return "repeated request scored differently";
           return {};
         });
       }},
      {"empty_candidates_rejected", EmptyCandidatesRejected},
  };

  ConformanceReport report;
  for (const auto& [name, fn] : cases) {
    ConformanceCase c;
    c.name = name;
    c.detail = fn(argv, timeout);
    c.passed = c.detail.empty();
    report.cases.push_back(std::move(c));
  }
  return report;
}

}  // namespace nbf
