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
#include "nbf/metrics.h"
#include "nbf/synth.h"

namespace nbf {
namespace {

std::string Dump(const UtteranceSet& s) {
  std::ostringstream out;
  WriteDump(s, out);
  return out.str();
}

TEST(Synth, ZeroRatesReproduceTheReference) {
  SynthChannelConfig cfg;
  cfg.char_sub_rate = cfg.char_del_rate = cfg.char_ins_rate = 0.0;
  const auto sentences = GenerateSentences(50, 1);
  UtteranceSet set = Synthesize(sentences, cfg, 1);
  ASSERT_EQ(set.size(), sentences.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    EXPECT_EQ(set[i].reference, sentences[i]);
    for (const auto& h : set[i].nbest.hypotheses) {
      EXPECT_EQ(h.text, sentences[i]);
      for (const auto& tp : *h.token_probs) EXPECT_EQ(tp.prob, 1.0);
    }
  }
}

TEST(Synth, OutputIsWellFormed) {
  SynthChannelConfig cfg;
  cfg.seed = 5;
  UtteranceSet set = Synthesize(GenerateSentences(200, 2), cfg, 1);
  EXPECT_TRUE(Validate(set).ok());
  for (const auto& r : set) {
    EXPECT_EQ(r.source_tag, "synth");
    EXPECT_EQ(r.nbest.order_tag, OrderTag::kSorted);
    EXPECT_LE(r.nbest.size(), cfg.n_best_size);
    EXPECT_GE(r.nbest.size(), 1u);
    for (std::size_t i = 0; i < r.nbest.size(); ++i) {
      EXPECT_LE(r.nbest[i].asr_logprob, 0.0);
      for (std::size_t j = 0; j < i; ++j) EXPECT_NE(r.nbest[i].text, r.nbest[j].text);
      std::string joined;
      for (const auto& tp : *r.nbest[i].token_probs) joined += tp.token;
      EXPECT_EQ(joined, " " + r.nbest[i].text);
    }
  }
  EXPECT_EQ(set[0].utt_id, "utt000000");
  EXPECT_EQ(set[12].utt_id, "utt000012");
}

TEST(Synth, DeterministicAcrossRunsAndThreads) {
  SynthChannelConfig cfg;
  cfg.seed = 77;
  const auto sentences = GenerateSentences(150, 3);
  const std::string a = Dump(Synthesize(sentences, cfg, 1));
  EXPECT_EQ(a, Dump(Synthesize(sentences, cfg, 1)));
  EXPECT_EQ(a, Dump(Synthesize(sentences, cfg, 4)));
  cfg.seed = 78;
  EXPECT_NE(a, Dump(Synthesize(sentences, cfg, 1)));
  EXPECT_EQ(GenerateSentences(30, 9), GenerateSentences(30, 9));
  EXPECT_NE(GenerateSentences(30, 9), GenerateSentences(30, 10));
}

TEST(Synth, DeeperListsContainTheReferenceMoreOften) {
  SynthChannelConfig cfg;
  cfg.seed = 1;
  UtteranceSet set = Synthesize(GenerateSentences(500, 4), cfg, 2);
  OracleCurve c = ComputeOracleCurves(set, 10, NormRules());
  EXPECT_GT(c.contains_in_top[9], c.contains_in_top[0]);
}

TEST(Synth, RejectsBadConfig) {
  SynthChannelConfig cfg;
  cfg.char_sub_rate = 0.6;
  cfg.char_del_rate = 0.5;
  EXPECT_THROW(cfg.Check(), Error);
  cfg = {};
  cfg.n_best_size = 0;
  EXPECT_THROW(cfg.Check(), Error);
  cfg = {};
  cfg.temperature = 0.0;
  EXPECT_THROW(cfg.Check(), Error);
  cfg = {};
  cfg.score_noise = -1.0;
  EXPECT_THROW(cfg.Check(), Error);
}

TEST(Seeds, HashAndMixAreStable) {
  EXPECT_EQ(Fnv1a(""), 14695981039346656037ULL);
  EXPECT_EQ(Fnv1a("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_NE(MixSeed(1, 2), MixSeed(2, 1));
  EXPECT_EQ(MixSeed(1, 2), MixSeed(1, 2));
}

}  // namespace
}  // namespace nbf
