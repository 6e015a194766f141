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
#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nbf/datamodel.h"
#include "test_util.h"

namespace nbf {
namespace {

struct Result {
  int code = -1;
  std::string out;
};

// Runs a shell command and captures stdout; stderr is discarded.
Result Sh(const std::string& cmd) {
  Result r;
  FILE* p = ::popen((cmd + " 2>/dev/null").c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string Q(const std::string& s) { return "'" + s + "'"; }

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing::TempDir();
    ASSERT_EQ(Sh(Nbf() + " text --count 120 --out " + Q(File("t.txt"))).code, 0);
    ASSERT_EQ(Sh(Nbf() + " synth --in " + Q(File("t.txt")) + " --out " + Q(File("d.dump"))).code, 0);
    ASSERT_EQ(Sh(Nbf() + " lm train --in " + Q(File("t.txt")) + " --out " + Q(File("m.bin"))).code, 0);
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static std::string Nbf() { return Q(NBF_CLI_PATH); }
  static std::string File(const std::string& n) { return dir_->File(n); }
  static std::string Dump() { return Q(File("d.dump")); }
  static std::string Serve() {
    return std::string(NBF_CLI_PATH) + " lm serve --model " + File("m.bin");
  }

  static testing::TempDir* dir_;
};

testing::TempDir* Cli::dir_ = nullptr;

TEST_F(Cli, EvalReportsWer) {
  Result r = Sh(Nbf() + " eval --in " + Dump() + " --machine");
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("utterances=120"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("wer="), std::string::npos);
  EXPECT_EQ(Sh(Nbf() + " eval --in " + Dump() + " --select oracle").code, 0);
}

TEST_F(Cli, ErrorsExitWithOne) {
  EXPECT_EQ(Sh(Nbf() + " eval --in /nonexistent/x.dump").code, 1);
  std::ofstream(File("bad.dump"))
      << R"({"utt_id":"a","reference":"x","source_tag":"s","nbest":[{"text":"x","asr_logprob":-1,"token_probs":[[" x",1.3]]}],"order_tag":"sorted"})"
      << "\n";
  EXPECT_EQ(Sh(Nbf() + " eval --in " + Q(File("bad.dump"))).code, 1);
  EXPECT_NE(Sh(Nbf() + " frobnicate").code, 0);
  EXPECT_EQ(Sh(Nbf() + " rerank --in " + Dump()).code, 1);
}

TEST_F(Cli, OracleAndCalibrateEmitCsv) {
  Result o = Sh(Nbf() + " oracle --in " + Dump() + " --max-n 4");
  ASSERT_EQ(o.code, 0);
  EXPECT_EQ(o.out.rfind("n,match_at_rank,contains_in_top\n", 0), 0u);
  EXPECT_EQ(std::count(o.out.begin(), o.out.end(), '\n'), 5);
  Result c = Sh(Nbf() + " calibrate --in " + Dump() + " --bins 4");
  ASSERT_EQ(c.code, 0);
  EXPECT_EQ(c.out.rfind("bin,lo,hi,count,mean_conf,accuracy\n", 0), 0u);
  EXPECT_EQ(std::count(c.out.begin(), c.out.end(), '\n'), 5);
}

TEST_F(Cli, RescoreWritesSelections) {
  const std::string out = File("rescored.dump");
  ASSERT_EQ(Sh(Nbf() + " rescore --in " + Dump() + " --lm " + Q(File("m.bin")) +
               " --sweep --out " + Q(out) + " --scores-out " + Q(File("s.jsonl")))
                .code,
            0);
  UtteranceSet sel = LoadDump(out);
  EXPECT_EQ(sel.size(), 120u);
  for (const auto& r : sel) EXPECT_EQ(r.nbest.size(), 1u);
  EXPECT_EQ(LoadScoreVectors(File("s.jsonl")).size(), 120u);
  EXPECT_EQ(Sh(Nbf() + " rerank --in " + Dump() + " --scores " + Q(File("s.jsonl")) +
               " --lambda 0.5 --out " + Q(File("r2.dump")))
                .code,
            0);
}

TEST_F(Cli, RerankWithPluginAndEnvironmentFallback) {
  const std::string fake = std::string(NBF_FAKE_SCORER_PATH) + " echo";
  EXPECT_EQ(Sh(Nbf() + " rerank --in " + Dump() + " --scorer-cmd " + Q(fake) +
               " --lambda 1 --out " + Q(File("e.dump")))
                .code,
            0);
  // All-zero scores at lambda 1 tie everywhere, so rank 1 is kept.
  UtteranceSet orig = LoadDump(File("d.dump"));
  UtteranceSet sel = LoadDump(File("e.dump"));
  for (std::size_t i = 0; i < orig.size(); ++i) EXPECT_EQ(sel[i].nbest[0].text, orig[i].nbest[0].text);

  EXPECT_EQ(Sh("NBF_SCORER_CMD=" + Q(Serve()) + " " + Nbf() + " rerank --in " + Dump() +
               " --lambda 0.5 --out " + Q(File("env.dump")))
                .code,
            0);
  EXPECT_EQ(Sh("NBF_SCORER_CMD=" + Q(Serve()) + " " + Nbf() + " rerank --mode uncon --in " +
               Dump() + " --out " + Q(File("uncon.dump")))
                .code,
            0);
  EXPECT_EQ(LoadDump(File("uncon.dump")).size(), 120u);
  EXPECT_EQ(Sh(Nbf() + " rerank --in " + Dump() + " --scorer-cmd " +
               Q(std::string(NBF_FAKE_SCORER_PATH) + " crash"))
                .code,
            1);
}

TEST_F(Cli, AblateReverseTwiceIsIdentity) {
  ASSERT_EQ(Sh(Nbf() + " ablate --in " + Dump() + " --mode reversed --out " + Q(File("r1.dump"))).code, 0);
  ASSERT_EQ(Sh(Nbf() + " ablate --in " + Q(File("r1.dump")) + " --mode reversed --out " + Q(File("r2r.dump"))).code, 0);
  EXPECT_EQ(LoadDump(File("r2r.dump")), LoadDump(File("d.dump")));
  ASSERT_EQ(Sh(Nbf() + " ablate --in " + Dump() + " --mode truncate --k 1 --out " + Q(File("t1.dump"))).code, 0);
  for (const auto& r : LoadDump(File("t1.dump"))) EXPECT_EQ(r.nbest.size(), 1u);
}

TEST_F(Cli, LmPerplexity) {
  Result r = Sh(Nbf() + " lm ppl --model " + Q(File("m.bin")) + " --in " + Q(File("t.txt")));
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("ppl="), std::string::npos);
}

TEST_F(Cli, PluginCheck) {
  EXPECT_EQ(Sh(Nbf() + " plugin check --scorer-cmd " + Q(Serve())).code, 0);
  EXPECT_EQ(Sh(Nbf() + " plugin check --timeout 5 --scorer-cmd " +
               Q(std::string(NBF_FAKE_SCORER_PATH) + " reverse"))
                .code,
            1);
}

TEST_F(Cli, DemoIsReproducible) {
  const std::string cmd = Nbf() + " --seed 4 demo --train-sentences 800 --test-sentences 120";
  Result a = Sh(cmd);
  ASSERT_EQ(a.code, 0);
  EXPECT_NE(a.out.find("Baseline"), std::string::npos);
  EXPECT_EQ(Sh(cmd).out, a.out);
  EXPECT_EQ(Sh(Nbf() + " --threads 3 --seed 4 demo --train-sentences 800 --test-sentences 120").out,
            a.out);
}

TEST_F(Cli, NoNormChangesScoring) {
  Result a = Sh(Nbf() + " eval --machine --in " + Dump());
  Result b = Sh(Nbf() + " --no-norm eval --machine --in " + Dump());
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(b.code, 0);
  std::ofstream(File("rules.jsonl")) << "{\"lowercase\": false}\n";
  EXPECT_EQ(Sh(Nbf() + " --norm-rules " + Q(File("rules.jsonl")) + " eval --in " + Dump()).code, 0);
  EXPECT_EQ(Sh(Nbf() + " --norm-rules /nonexistent eval --in " + Dump()).code, 1);
}

}  // namespace
}  // namespace nbf
