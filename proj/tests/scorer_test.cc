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


#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "nbf/error.h"
#include "nbf/scorer.h"
#include "nbf/subprocess.h"
#include "nbf/synth.h"
#include "test_util.h"

namespace nbf {
namespace {

using std::chrono::milliseconds;

std::vector<std::string> Fake(const std::string& mode) {
  return {NBF_FAKE_SCORER_PATH, mode};
}

ScoreRequest Req(const std::string& id, std::vector<std::string> cands) {
  ScoreRequest r;
  r.utt_id = id;
  r.n_best_texts = cands;
  r.context = cands.empty() ? "" : cands.front();
  r.candidates = std::move(cands);
  return r;
}

std::vector<ScoreRequest> SomeRequests(std::size_t n) {
  std::vector<ScoreRequest> reqs;
  for (std::size_t i = 0; i < n; ++i) {
    reqs.push_back(Req("r" + std::to_string(i), {"the dog runs", "a dog runs", "dog"}));
  }
  return reqs;
}

TEST(Wire, RoundTrip) {
  ScoreRequest req = Req("ü-1", {"a \"quoted\" text", "日本"});
  req.phones = std::vector<std::string>{"AH", "B"};
  req.word_confidences = std::vector<std::vector<double>>{{0.5, 0.25}, {1.0}};
  EXPECT_EQ(ParseRequestLine(ToLine(req)), req);
  ScoreRequest gen;
  gen.utt_id = "g";
  gen.task = ScoreTask::kGenerate;
  gen.n_best_texts = {"x", "y"};
  EXPECT_EQ(ParseRequestLine(ToLine(gen)), gen);
  ScoreResponse resp{"x", std::vector<double>{-1.5, -0.1}, std::nullopt, std::nullopt};
  EXPECT_EQ(ParseResponseLine(ToLine(resp)), resp);
  EXPECT_EQ(ToLine(resp).find('\n'), std::string::npos);
}

TEST(Wire, ParseErrorsCarryTheLine) {
  try {
    ParseResponseLine("nope");
    FAIL();
  } catch (const ProtocolError& e) {
    EXPECT_EQ(e.offending_line(), "nope");
  }
  EXPECT_THROW(ParseResponseLine(R"({"scores":[1]})"), ProtocolError);
  EXPECT_THROW(ParseRequestLine(R"({"utt_id":"a","task":"dance"})"), ProtocolError);
}

TEST(Wire, CheckResponse) {
  const ScoreRequest req = Req("a", {"x", "y"});
  EXPECT_NO_THROW(CheckResponse(req, {"a", std::vector<double>{-1, -2}, {}, {}}, ""));
  EXPECT_THROW(CheckResponse(req, {"b", std::vector<double>{-1, -2}, {}, {}}, ""), ProtocolError);
  EXPECT_THROW(CheckResponse(req, {"a", std::vector<double>{-1}, {}, {}}, ""), ProtocolError);
  EXPECT_THROW(CheckResponse(req, {"a", std::vector<double>{-1, NAN}, {}, {}}, ""), ProtocolError);
  EXPECT_THROW(CheckResponse(req, {"a", std::nullopt, {}, std::string("bad")}, ""), ProtocolError);
  ScoreRequest gen = req;
  gen.task = ScoreTask::kGenerate;
  EXPECT_NO_THROW(CheckResponse(gen, {"a", std::nullopt, std::string("x"), {}}, ""));
  EXPECT_THROW(CheckResponse(gen, {"a", std::nullopt, std::nullopt, {}}, ""), ProtocolError);
}

TEST(Subprocess, SplitsCommandLines) {
  EXPECT_EQ(SplitCommandLine("a 'b c' \"d e\" f\\ g"),
            (std::vector<std::string>{"a", "b c", "d e", "f g"}));
  EXPECT_TRUE(SplitCommandLine("   ").empty());
}

TEST(Plugin, EchoReturnsZeros) {
  PluginScorer p(Fake("echo"), milliseconds(5000));
  const auto reqs = SomeRequests(5);
  const auto resps = p.ScoreBatch(reqs);
  ASSERT_EQ(resps.size(), 5u);
  for (std::size_t i = 0; i < resps.size(); ++i) {
    EXPECT_EQ(resps[i].utt_id, reqs[i].utt_id);
    EXPECT_EQ(*resps[i].scores, std::vector<double>(3, 0.0));
  }
  // The process stays up across batches.
  EXPECT_EQ(p.ScoreBatch(SomeRequests(2)).size(), 2u);
}

TEST(Plugin, ShortScoresAreProtocolErrors) {
  PluginScorer p(Fake("short"), milliseconds(5000));
  EXPECT_THROW(p.ScoreBatch(SomeRequests(1)), ProtocolError);
}

TEST(Plugin, WrongIdAndGarbageAreProtocolErrors) {
  PluginScorer a(Fake("wrongid"), milliseconds(5000));
  EXPECT_THROW(a.ScoreBatch(SomeRequests(1)), ProtocolError);
  PluginScorer b(Fake("garbage"), milliseconds(5000));
  EXPECT_THROW(b.ScoreBatch(SomeRequests(1)), ProtocolError);
}

TEST(Plugin, SlowPluginTimesOut) {
  PluginScorer p(Fake("slow"), milliseconds(300));
  try {
    p.ScoreBatch(SomeRequests(2));
    FAIL();
  } catch (const TimeoutError& e) {
    EXPECT_EQ(e.utt_id(), "r0");
  }
}

TEST(Plugin, CrashIsTransportError) {
  PluginScorer p(Fake("crash"), milliseconds(5000));
  try {
    p.ScoreBatch(SomeRequests(3));
    FAIL();
  } catch (const TransportError& e) {
    EXPECT_NE(std::string(e.what()).find('3'), std::string::npos) << e.what();
  }
}

TEST(Plugin, MissingExecutableFails) {
  EXPECT_THROW(
      {
        PluginScorer p({"/nonexistent/scorer"}, milliseconds(1000));
        p.ScoreBatch(SomeRequests(1));
      },
      Error);
}

TEST(LmScorer, AnswersScoreAndGenerate) {
  NgramModel m = NgramModel::Train(GenerateSentences(300, 1), 3);
  LmScorer s(m);
  ScoreRequest r = Req("a", {"the dog runs", "dog the runs"});
  ScoreResponse resp = s.Answer(r);
  ASSERT_TRUE(resp.scores);
  EXPECT_EQ((*resp.scores)[0], m.Score("the dog runs"));
  EXPECT_EQ((*resp.scores)[1], m.Score("dog the runs"));
  r.task = ScoreTask::kGenerate;
  r.candidates.reset();
  r.n_best_texts = {"dog the runs", "the dog runs"};
  EXPECT_EQ(s.Answer(r).corrected, "the dog runs");
  EXPECT_TRUE(s.Answer(Req("e", {})).error.has_value());
}

TEST(LmScorer, ServeLoopHandlesBadLines) {
  NgramModel m = NgramModel::Train(GenerateSentences(100, 1), 2);
  LmScorer s(m);
  std::istringstream in(ToLine(Req("a", {"x"})) + "\n" +
                        R"({"utt_id":"b","task":"bogus"})" + "\n" +
                        ToLine(Req("c", {"y"})) + "\n");
  std::ostringstream out;
  EXPECT_EQ(ServeScorer(s, in, out), 0);
  std::istringstream lines(out.str());
  std::string line;
  std::vector<ScoreResponse> resps;
  while (std::getline(lines, line)) resps.push_back(ParseResponseLine(line));
  ASSERT_EQ(resps.size(), 3u);
  EXPECT_TRUE(resps[1].error.has_value());
  EXPECT_EQ(resps[2].utt_id, "c");
  std::istringstream broken("not json at all\n");
  EXPECT_EQ(ServeScorer(s, broken, out), 2);
}

TEST(LmScorer, ServedModelMatchesDirectScoring) {
  testing::TempDir dir;
  NgramModel m = NgramModel::Train(GenerateSentences(500, 2), 3);
  m.Save(dir.File("m.bin"));
  PluginScorer p({NBF_CLI_PATH, "lm", "serve", "--model", dir.File("m.bin")},
                 milliseconds(10000));
  LmScorer direct(m);
  SynthChannelConfig cfg;
  UtteranceSet set = Synthesize(GenerateSentences(40, 3), cfg, 1);
  std::vector<ScoreRequest> reqs;
  for (const auto& r : set) {
    std::vector<std::string> texts;
    for (const auto& h : r.nbest.hypotheses) texts.push_back(h.text);
    reqs.push_back(Req(r.utt_id, texts));
  }
  const auto remote = p.ScoreBatch(reqs);
  const auto local = direct.ScoreBatch(reqs);
  ASSERT_EQ(remote.size(), local.size());
  for (std::size_t i = 0; i < remote.size(); ++i) {
    EXPECT_EQ(remote[i].scores, local[i].scores) << i;
  }
}

const ConformanceCase* Find(const ConformanceReport& r, const std::string& name) {
  for (const auto& c : r.cases) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

TEST(Conformance, LmAdapterPassesEveryCase) {
  testing::TempDir dir;
  NgramModel::Train(GenerateSentences(200, 5), 3).Save(dir.File("m.bin"));
  ConformanceReport rep =
      CheckConformance({NBF_CLI_PATH, "lm", "serve", "--model", dir.File("m.bin")});
  EXPECT_EQ(rep.cases.size(), 12u);
  for (const auto& c : rep.cases) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
  EXPECT_TRUE(rep.all_passed());
}

TEST(Conformance, ReorderingPluginFailsOrdering) {
  ConformanceReport rep = CheckConformance(Fake("reverse"), milliseconds(5000));
  ASSERT_NE(Find(rep, "ordering"), nullptr);
  EXPECT_FALSE(Find(rep, "ordering")->passed);
  EXPECT_TRUE(Find(rep, "score_basic")->passed);
  EXPECT_FALSE(rep.all_passed());
}

TEST(Conformance, NonFinitePluginFailsFiniteScores) {
  ConformanceReport rep = CheckConformance(Fake("nonfinite"), milliseconds(5000));
  ASSERT_NE(Find(rep, "finite_scores"), nullptr);
  EXPECT_FALSE(Find(rep, "finite_scores")->passed);
}

TEST(Conformance, CrashingPluginFailsCleanly) {
  ConformanceReport rep = CheckConformance(Fake("crash"), milliseconds(5000));
  EXPECT_EQ(rep.cases.size(), 12u);
  EXPECT_FALSE(rep.all_passed());
}

}  // namespace
}  // namespace nbf
