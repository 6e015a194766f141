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

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "nbf/error.h"
#include "nbf/ngram_lm.h"
#include "nbf/synth.h"
#include "nbf/utf8.h"
#include "test_util.h"

namespace nbf {
namespace {

using Id = NgramModel::WordId;

double P(const NgramModel& m, const std::string& w, std::vector<std::string> ctx) {
  std::vector<Id> ids;
  for (const auto& c : ctx) ids.push_back(c == "<s>" ? NgramModel::kBos : m.Lookup(c));
  return m.Prob(w == "</s>" ? NgramModel::kEos : m.Lookup(w), ids);
}

// Independent Witten-Bell built from string n-gram counts.
class NaiveWittenBell {
 public:
  NaiveWittenBell(const std::vector<std::string>& sentences, int order, int min_count)
      : order_(order) {
    std::map<std::string, int> freq;
    for (const auto& s : sentences) {
      for (const auto& w : utf8::SplitWords(s)) ++freq[w];
    }
    for (const auto& [w, c] : freq) {
      if (c >= min_count) vocab_.insert(w);
    }
    vocab_size_ = static_cast<double>(vocab_.size() + 2);  // <unk>, </s>
    for (const auto& s : sentences) {
      const auto toks = Wrap(s);
      for (std::size_t i = 1; i < toks.size(); ++i) {
        for (int k = 0; k < order && static_cast<std::size_t>(k) <= i; ++k) {
          std::vector<std::string> h(toks.begin() + (i - k), toks.begin() + i);
          counts_[h][toks[i]] += 1;
        }
      }
    }
  }

  std::vector<std::string> Wrap(const std::string& s) const {
    std::vector<std::string> t{"<s>"};
    for (const auto& w : utf8::SplitWords(s)) t.push_back(vocab_.count(w) ? w : "<unk>");
    t.push_back("</s>");
    return t;
  }

  double Prob(const std::string& w, std::vector<std::string> h) const {
    if (h.empty()) {
      const auto& row = counts_.at({});
      double total = 0;
      for (const auto& kv : row) total += kv.second;
      const double types = static_cast<double>(row.size());
      auto it = row.find(w);
      const double c = it == row.end() ? 0.0 : it->second;
      return (c + types / vocab_size_) / (total + types);
    }
    std::vector<std::string> shorter(h.begin() + 1, h.end());
    const double lower = Prob(w, shorter);
    auto row_it = counts_.find(h);
    if (row_it == counts_.end()) return lower;
    double total = 0;
    for (const auto& kv : row_it->second) total += kv.second;
    const double types = static_cast<double>(row_it->second.size());
    auto it = row_it->second.find(w);
    const double c = it == row_it->second.end() ? 0.0 : it->second;
    return (c + types * lower) / (total + types);
  }

  double Perplexity(const std::vector<std::string>& sentences) const {
    double lp = 0;
    double n = 0;
    for (const auto& s : sentences) {
      const auto toks = Wrap(s);
      for (std::size_t i = 1; i < toks.size(); ++i) {
        const std::size_t start = i >= static_cast<std::size_t>(order_ - 1) ? i - (order_ - 1) : 0;
        lp += std::log(Prob(toks[i], {toks.begin() + start, toks.begin() + i}));
        n += 1;
      }
    }
    return std::exp(-lp / n);
  }

 private:
  int order_;
  std::set<std::string> vocab_;
  double vocab_size_;
  std::map<std::vector<std::string>, std::map<std::string, double>> counts_;
};

TEST(NgramLm, HandComputedWittenBell) {
  NgramModel uni = NgramModel::Train({"a b a"}, 1, 1);
  EXPECT_EQ(uni.vocab_size(), 4u);
  EXPECT_DOUBLE_EQ(P(uni, "a", {}), 2.75 / 7.0);
  EXPECT_DOUBLE_EQ(P(uni, "b", {}), 1.75 / 7.0);
  EXPECT_DOUBLE_EQ(P(uni, "zzz", {}), 0.75 / 7.0);

  NgramModel bi = NgramModel::Train({"a b a"}, 2, 1);
  EXPECT_DOUBLE_EQ(P(bi, "b", {"a"}), 0.375);
  EXPECT_DOUBLE_EQ(P(bi, "a", {"a"}), 2.0 * (2.75 / 7.0) / 4.0);
  EXPECT_GT(P(bi, "b", {"a"}), P(bi, "a", {"a"}));
  EXPECT_DOUBLE_EQ(P(bi, "a", {"<s>"}), (1.0 + 2.75 / 7.0) / 2.0);
  // Unseen context backs off to the unigram.
  EXPECT_DOUBLE_EQ(P(bi, "a", {"zzz"}), 2.75 / 7.0);
}

TEST(NgramLm, IdsAreSortedAndReserved) {
  NgramModel m = NgramModel::Train({"c a b", "a c", "b"}, 2, 1);
  EXPECT_EQ(m.symbols(),
            (std::vector<std::string>{"<unk>", "</s>", "<s>", "a", "b", "c"}));
  EXPECT_EQ(m.Lookup("<s>"), NgramModel::kUnk);
  EXPECT_EQ(m.Lookup("</s>"), NgramModel::kUnk);
  EXPECT_EQ(m.Lookup("nope"), NgramModel::kUnk);
  EXPECT_THROW(NgramModel::Train({}, 3), Error);
}

TEST(NgramLm, MinCountMapsRareWordsToUnk) {
  NgramModel m = NgramModel::Train({"a b c x1", "a b c x2"}, 2);
  EXPECT_EQ(m.vocab_size(), 5u);
  EXPECT_EQ(m.Lookup("x1"), NgramModel::kUnk);
  EXPECT_EQ(m.Score("a b c x1"), m.Score("a b c whatever"));
}

TEST(NgramLm, UniformUnigramPerplexityIsVocabSize) {
  const std::vector<std::string> corpus = {"a b c x1", "a b c x2"};
  NgramModel m = NgramModel::Train(corpus, 1);
  ASSERT_EQ(m.vocab_size(), 5u);
  EXPECT_EQ(P(m, "a", {}), 0.2);
  EXPECT_DOUBLE_EQ(m.Perplexity(corpus), 5.0);
}

TEST(NgramLm, TrainingIsOrderInvariant) {
  std::vector<std::string> corpus = GenerateSentences(300, 4);
  NgramModel a = NgramModel::Train(corpus, 3);
  std::mt19937_64 rng(8);
  std::shuffle(corpus.begin(), corpus.end(), rng);
  NgramModel b = NgramModel::Train(corpus, 3);
  EXPECT_TRUE(a == b);
  for (const auto& s : GenerateSentences(20, 5)) EXPECT_EQ(a.Score(s), b.Score(s));
}

TEST(NgramLm, ScoreIdentities) {
  NgramModel m = NgramModel::Train(GenerateSentences(500, 6), 3);
  const std::vector<Id> bos{NgramModel::kBos};
  EXPECT_DOUBLE_EQ(m.Score(""), m.LogProb(NgramModel::kEos, bos));
  // Additivity: the score is the sum of conditional log-probabilities.
  const std::vector<std::string> w = {"the", "dog", "runs"};
  std::vector<Id> ids{NgramModel::kBos};
  for (const auto& x : w) ids.push_back(m.Lookup(x));
  ids.push_back(NgramModel::kEos);
  double sum = 0;
  for (std::size_t i = 1; i < ids.size(); ++i) {
    const std::size_t start = i >= 2 ? i - 2 : 0;
    sum += m.LogProb(ids[i], std::span<const Id>(ids).subspan(start, i - start));
  }
  EXPECT_DOUBLE_EQ(m.Score("the dog runs"), sum);
  const double oov = m.Score("qqq zzz");
  EXPECT_TRUE(std::isfinite(oov));
  EXPECT_LT(oov, 0.0);
}

TEST(NgramLm, ConditionalsSumToOne) {
  NgramModel m = NgramModel::Train(GenerateSentences(400, 9), 3);
  std::mt19937_64 rng(10);
  const Id n = static_cast<Id>(m.symbols().size());
  for (int t = 0; t < 100; ++t) {
    std::vector<Id> ctx;
    const int len = static_cast<int>(rng() % 3);
    for (int k = 0; k < len; ++k) {
      Id id = static_cast<Id>(rng() % n);
      ctx.push_back(k == 0 && rng() % 4 == 0 ? NgramModel::kBos : (id == NgramModel::kBos ? 3 : id));
    }
    double total = 0;
    for (Id w = 0; w < n; ++w) {
      if (w != NgramModel::kBos) total += m.Prob(w, ctx);
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST(NgramLm, PerplexityMatchesIndependentImplementation) {
  const auto train = GenerateSentences(600, 21);
  const auto heldout = GenerateSentences(100, 22);
  for (int order : {1, 2, 3, 4}) {
    NgramModel m = NgramModel::Train(train, order);
    NaiveWittenBell naive(train, order, 2);
    const double a = m.Perplexity(heldout);
    const double b = naive.Perplexity(heldout);
    EXPECT_NEAR(a / b, 1.0, 1e-6) << "order " << order;
  }
}

TEST(NgramLm, MoreDataDoesNotHurt) {
  const auto heldout = GenerateSentences(300, 31);
  const auto big = GenerateSentences(4000, 32);
  const std::vector<std::string> small(big.begin(), big.begin() + 500);
  const double p_small = NgramModel::Train(small, 3).Perplexity(heldout);
  const double p_big = NgramModel::Train(big, 3).Perplexity(heldout);
  EXPECT_LE(p_big, p_small * 1.05);
}

TEST(NgramLm, SaveLoadRoundTrip) {
  testing::TempDir dir;
  NgramModel m = NgramModel::Train(GenerateSentences(200, 41), 3);
  m.Save(dir.File("m.bin"));
  NgramModel back = NgramModel::Load(dir.File("m.bin"));
  EXPECT_TRUE(back == m);
  EXPECT_EQ(back.Score("the cat sleeps"), m.Score("the cat sleeps"));
  std::stringstream a;
  std::stringstream b;
  m.Serialize(a);
  back.Serialize(b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, 5), "NGLM1");
  std::stringstream bad("NGLM0xxxx");
  EXPECT_THROW(NgramModel::Deserialize(bad), IoError);
  std::stringstream truncated(a.str().substr(0, a.str().size() / 2));
  EXPECT_THROW(NgramModel::Deserialize(truncated), IoError);
}

}  // namespace
}  // namespace nbf
