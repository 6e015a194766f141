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

#ifndef NBF_SYNTH_H_
#define NBF_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "nbf/datamodel.h"

namespace nbf {

// Character-level noisy channel standing in for a recognizer. Each code
// point of the reference is independently kept, substituted by a random
// letter a-z, deleted, or kept and followed by an inserted letter.
struct SynthChannelConfig {
  std::uint64_t seed = 0;
  double char_sub_rate = 0.05;
  double char_del_rate = 0.02;
  double char_ins_rate = 0.02;
  std::size_t n_best_size = 10;
  // Divides every score; larger values compress the spread.
  double temperature = 1.0;
  // Scale (nats) of exponential noise subtracted from each channel
  // log-likelihood before ranking. Zero scores every variant by its exact
  // sampling likelihood, which always ranks the clean string first.
  double score_noise = 4.0;
  // Channel draws per sentence; 0 picks max(4 * n_best_size, 32).
  std::size_t draws = 0;

  void Check() const;
};

// Samples variants per sentence, keeps the distinct ones with the highest
// scores, and emits a sorted list with synthetic token confidences: each
// word's pieces carry (1 - sub - del - ins)^(len + 1), the chance that a
// word of that length passes the channel untouched.
UtteranceSet Synthesize(const std::vector<std::string>& sentences,
                        const SynthChannelConfig& config, int threads = 1);

// Sentences from a fixed built-in bigram grammar over a small English
// vocabulary. The grammar is the same for every seed; the seed picks the
// sentences. Useful as in-domain LM training text for synthetic dumps.
std::vector<std::string> GenerateSentences(std::size_t count, std::uint64_t seed);

// Stable 64-bit FNV-1a; used for seeding and dev/test splits.
std::uint64_t Fnv1a(std::string_view s);
std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t stream);

}  // namespace nbf

#endif  // NBF_SYNTH_H_
