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

#ifndef NBF_NGRAM_LM_H_
#define NBF_NGRAM_LM_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace nbf {

// Interpolated Witten-Bell n-gram model over whitespace-separated words.
//
//   P(w|h) = (c(h,w) + T(h) * P(w|h')) / (c(h) + T(h))
//
// where h' drops the oldest word of h, c(h) counts tokens after h and T(h)
// counts distinct word types after h. The recursion ends in a unigram that
// is itself interpolated with the uniform distribution over the vocabulary,
// so every word (including <unk>) has non-zero probability. A context never
// seen in training falls back to the next shorter one.
//
// Sentences are wrapped as <s> w1 ... wn </s>; only the first word sees a
// <s> context. Training words seen fewer than min_count times become <unk>.
class NgramModel {
 public:
  using WordId = std::int32_t;
  static constexpr WordId kUnk = 0;
  static constexpr WordId kEos = 1;
  static constexpr WordId kBos = 2;

  static NgramModel Train(const std::vector<std::string>& sentences, int order,
                          int min_count = 2);

  static NgramModel Load(const std::string& path);
  static NgramModel Deserialize(std::istream& in);
  void Save(const std::string& path) const;
  void Serialize(std::ostream& out) const;

  int order() const { return order_; }
  int min_count() const { return min_count_; }
  // Number of predictable symbols: words, <unk> and </s>.
  std::size_t vocab_size() const { return words_.size() - 1; }
  // All symbols indexed by id, <s> included.
  const std::vector<std::string>& symbols() const { return words_; }

  WordId Lookup(std::string_view word) const;

  // P(word | context); context lists ids oldest first and only its last
  // order-1 entries are used.
  double Prob(WordId word, std::span<const WordId> context) const;
  double LogProb(WordId word, std::span<const WordId> context) const;

  // Natural-log probability of the sentence, </s> included.
  double Score(std::string_view sentence) const;
  // exp(-total log-prob / total predicted tokens, </s> included).
  double Perplexity(const std::vector<std::string>& sentences) const;

  bool operator==(const NgramModel& o) const;

 private:
  struct ContextStats {
    std::uint64_t total = 0;
    std::unordered_map<WordId, std::uint64_t> next;
  };
  struct KeyHash {
    std::size_t operator()(const std::vector<WordId>& key) const;
  };
  using ContextTable =
      std::unordered_map<std::vector<WordId>, ContextStats, KeyHash>;

  NgramModel() = default;
  // Extended-precision sum of log-probabilities; sets *tokens to the number
  // of predicted tokens.
  long double SumLogProb(std::string_view sentence, std::size_t* tokens) const;
  void Finalize();

  int order_ = 1;
  int min_count_ = 1;
  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId> index_;
  std::vector<std::uint64_t> unigram_;
  std::uint64_t unigram_total_ = 0;
  std::uint64_t unigram_types_ = 0;
  // contexts_[k-1] holds contexts of length k.
  std::vector<ContextTable> contexts_;
};

}  // namespace nbf

#endif  // NBF_NGRAM_LM_H_
