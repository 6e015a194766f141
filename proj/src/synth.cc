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

#include "nbf/synth.h"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <fmt/format.h>

#include "nbf/error.h"
#include "nbf/parallel.h"
#include "nbf/random.h"
#include "nbf/utf8.h"

namespace nbf {

std::uint64_t Fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// splitmix64 finalizer over (seed, stream).
std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void SynthChannelConfig::Check() const {
  for (double r : {char_sub_rate, char_del_rate, char_ins_rate}) {
    if (!(r >= 0.0 && r <= 0.5)) {
      throw Error(fmt::format("channel rate {} outside [0, 0.5]", r));
    }
  }
  if (!(char_sub_rate + char_del_rate + char_ins_rate < 1.0)) {
    throw Error("channel rates must sum to less than 1");
  }
  if (n_best_size == 0) throw Error("n_best_size must be positive");
  if (!(temperature > 0.0)) throw Error("temperature must be positive");
  if (!(score_noise >= 0.0)) throw Error("score_noise must be non-negative");
}

namespace {

struct Variant {
  std::u32string text;
  double loglik = 0.0;
};

Variant Perturb(const std::u32string& ref, const SynthChannelConfig& c,
                Rng& rng) {
  const double keep = 1.0 - c.char_sub_rate - c.char_del_rate - c.char_ins_rate;
  Variant v;
  v.text.reserve(ref.size() + 4);
  for (char32_t cp : ref) {
    const double u = rng.UniformReal();
    if (u < c.char_sub_rate) {
      const bool is_letter = cp >= U'a' && cp <= U'z';
      const std::uint64_t choices = is_letter ? 25 : 26;
      char32_t sub = U'a' + static_cast<char32_t>(rng.Uniform(choices));
      if (is_letter && sub >= cp) ++sub;
      v.text.push_back(sub);
      v.loglik += std::log(c.char_sub_rate) - std::log(double(choices));
    } else if (u < c.char_sub_rate + c.char_del_rate) {
      v.loglik += std::log(c.char_del_rate);
    } else if (u < c.char_sub_rate + c.char_del_rate + c.char_ins_rate) {
      v.text.push_back(cp);
      v.text.push_back(U'a' + static_cast<char32_t>(rng.Uniform(26)));
      v.loglik += std::log(c.char_ins_rate) - std::log(26.0);
    } else {
      v.text.push_back(cp);
      v.loglik += std::log(keep);
    }
  }
  // Deleted one-letter words and substituted spaces leave irregular
  // spacing; emit single-space separated words.
  std::u32string canon;
  canon.reserve(v.text.size());
  for (char32_t cp : v.text) {
    if (cp == U' ' && (canon.empty() || canon.back() == U' ')) continue;
    canon.push_back(cp);
  }
  if (!canon.empty() && canon.back() == U' ') canon.pop_back();
  v.text = std::move(canon);
  return v;
}

std::vector<TokenProb> SynthTokens(const std::string& text, double keep) {
  std::vector<TokenProb> tokens;
  for (const auto& word : utf8::SplitWords(text)) {
    const std::u32string w = utf8::Decode(word);
    const double conf = std::pow(keep, static_cast<double>(w.size() + 1));
    for (std::size_t i = 0; i < w.size(); i += 4) {
      std::string piece = i == 0 ? " " : "";
      piece += utf8::Encode(w.substr(i, 4));
      tokens.push_back({std::move(piece), conf});
    }
  }
  return tokens;
}

UtteranceRecord SynthOne(const std::string& sentence, std::size_t index,
                         const SynthChannelConfig& c) {
  Rng rng(MixSeed(c.seed, index));
  const std::u32string ref = utf8::Decode(sentence);
  const std::size_t draws =
      c.draws > 0 ? c.draws : std::max<std::size_t>(4 * c.n_best_size, 32);

  // Distinct variants in order of first appearance; a repeated string
  // keeps its most likely path.
  std::vector<Variant> uniq;
  std::unordered_map<std::u32string, std::size_t> seen;
  for (std::size_t d = 0; d < draws; ++d) {
    Variant v = Perturb(ref, c, rng);
    auto [it, inserted] = seen.emplace(v.text, uniq.size());
    if (inserted) {
      uniq.push_back(std::move(v));
    } else {
      uniq[it->second].loglik = std::max(uniq[it->second].loglik, v.loglik);
    }
  }

  struct Scored {
    std::size_t order;
    double score;
  };
  std::vector<Scored> scored;
  scored.reserve(uniq.size());
  for (std::size_t k = 0; k < uniq.size(); ++k) {
    double noise = 0.0;
    if (c.score_noise > 0.0) {
      // Exponential noise keeps every score non-positive.
      const double u = 1.0 - rng.UniformReal();
      noise = c.score_noise * std::log(u);
    }
    scored.push_back({k, (uniq[k].loglik + noise) / c.temperature});
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const Scored& a, const Scored& b) { return a.score > b.score; });
  if (scored.size() > c.n_best_size) scored.resize(c.n_best_size);

  const double keep = 1.0 - c.char_sub_rate - c.char_del_rate - c.char_ins_rate;
  UtteranceRecord rec;
  rec.utt_id = fmt::format("utt{:06d}", index);
  rec.reference = sentence;
  rec.source_tag = "synth";
  rec.nbest.order_tag = OrderTag::kSorted;
  for (const auto& s : scored) {
    Hypothesis h;
    h.text = utf8::Encode(uniq[s.order].text);
    // Zero-rate channels give exactly 0; avoid emitting -0.
    h.asr_logprob = s.score == 0.0 ? 0.0 : std::min(s.score, 0.0);
    h.token_probs = SynthTokens(h.text, keep);
    rec.nbest.hypotheses.push_back(std::move(h));
  }
  return rec;
}

}  // namespace

UtteranceSet Synthesize(const std::vector<std::string>& sentences,
                        const SynthChannelConfig& config, int threads) {
  config.Check();
  if (sentences.empty()) throw Error("synthesis needs at least one sentence");
  UtteranceSet out(sentences.size());
  ParallelFor(sentences.size(), threads, [&](std::size_t i) {
    out[i] = SynthOne(sentences[i], i, config);
  });
  return out;
}

namespace {

constexpr const char* kVocabulary[] = {
    "the", "a", "old", "young", "quiet", "bright", "small", "heavy", "river",
    "mountain", "village", "garden", "window", "letter", "captain", "doctor",
    "teacher", "farmer", "sailor", "painter", "horse", "dog", "bird", "ship",
    "house", "road", "forest", "morning", "evening", "winter", "summer",
    "walked", "carried", "watched", "opened", "found", "remembered", "followed",
    "crossed", "painted", "wrote", "heard", "saw", "left", "reached", "kept",
    "slowly", "quickly", "again", "together", "alone", "never", "always",
    "toward", "across", "under", "beside", "through", "behind", "into", "from",
    "with", "and", "but", "then", "while", "before", "after", "because",
    "she", "he", "they", "we", "her", "his", "their", "our", "long", "dark",
    "silver", "golden", "broken", "distant", "gentle", "narrow", "ancient",
    "stone", "bridge", "tower", "harbor", "island", "valley", "lantern", "door",
    "table", "book", "song", "story", "journey", "voice", "light", "shadow",
    "fire", "water", "wind", "rain", "snow", "field", "market", "church",
    "castle", "station", "meadow", "silence", "answer", "question", "promise",
};

class Grammar {
 public:
  Grammar() {
    for (const char* w : kVocabulary) words_.emplace_back(w);
    Rng rng(0x5EED5EEDULL);
    successors_.resize(words_.size());
    for (auto& succ : successors_) {
      for (int k = 0; k < 6; ++k) succ.push_back(rng.Uniform(words_.size()));
    }
    for (int k = 0; k < 8; ++k) starts_.push_back(rng.Uniform(words_.size()));
  }

  std::string Sample(Rng& rng) const {
    const std::size_t len = 5 + rng.Uniform(8);
    std::size_t w = starts_[rng.Uniform(starts_.size())];
    std::string out = words_[w];
    for (std::size_t i = 1; i < len; ++i) {
      const auto& succ = successors_[w];
      // Skewed choice: earlier successors are more likely.
      const std::size_t pick = std::min(rng.Uniform(succ.size()),
                                        rng.Uniform(succ.size()));
      w = succ[pick];
      out += ' ';
      out += words_[w];
    }
    return out;
  }

 private:
  std::vector<std::string> words_;
  std::vector<std::vector<std::size_t>> successors_;
  std::vector<std::size_t> starts_;
};

}  // namespace

std::vector<std::string> GenerateSentences(std::size_t count,
                                           std::uint64_t seed) {
  static const Grammar grammar;
  Rng rng(MixSeed(seed, 0xC0FFEE));
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(grammar.Sample(rng));
  return out;
}

}  // namespace nbf
