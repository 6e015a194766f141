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

#ifndef NBF_SCORER_H_
#define NBF_SCORER_H_

#include <chrono>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nbf/ngram_lm.h"
#include "nbf/subprocess.h"

namespace nbf {

enum class ScoreTask { kScore, kGenerate };

// One request line:
// {"utt_id": str, "task": "score"|"generate", "candidates": [str]|null,
//  "context": str, "n_best_texts": [str], "phones": [str]|null,
//  "word_confidences": [[float]]|null}
struct ScoreRequest {
  std::string utt_id;
  ScoreTask task = ScoreTask::kScore;
  std::optional<std::vector<std::string>> candidates;
  std::string context;
  std::vector<std::string> n_best_texts;
  std::optional<std::vector<std::string>> phones;
  std::optional<std::vector<std::vector<double>>> word_confidences;

  bool operator==(const ScoreRequest&) const = default;
};

// One response line: {"utt_id": str, "scores": [float]|null,
// "corrected": str|null}. A plugin rejecting a request answers with both
// fields null and may add "error": str.
struct ScoreResponse {
  std::string utt_id;
  std::optional<std::vector<double>> scores;
  std::optional<std::string> corrected;
  std::optional<std::string> error;

  bool operator==(const ScoreResponse&) const = default;
};

std::string ToLine(const ScoreRequest& request);
std::string ToLine(const ScoreResponse& response);
// Both throw ProtocolError carrying the line.
ScoreRequest ParseRequestLine(std::string_view line);
ScoreResponse ParseResponseLine(std::string_view line);

// Throws ProtocolError (with `raw` as the offending line) unless the
// response echoes the id and carries finite scores of the right length or
// a corrected string, as the task requires.
void CheckResponse(const ScoreRequest& request, const ScoreResponse& response,
                   std::string_view raw);

// A source of external scores. Implementations answer in request order.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual std::string id() const = 0;
  virtual std::vector<ScoreResponse> ScoreBatch(
      std::span<const ScoreRequest> requests) = 0;
};

// The in-repo n-gram model behind the scorer interface. Score requests get
// model.Score(candidate) per candidate; generate requests get the n-best
// text with the highest LM score (lowest rank on ties).
class LmScorer : public Scorer {
 public:
  explicit LmScorer(const NgramModel& model, std::string id = "ngram-lm")
      : model_(model), id_(std::move(id)) {}

  std::string id() const override { return id_; }
  std::vector<ScoreResponse> ScoreBatch(
      std::span<const ScoreRequest> requests) override;
  ScoreResponse Answer(const ScoreRequest& request) const;

 private:
  const NgramModel& model_;
  std::string id_;
};

inline constexpr std::chrono::milliseconds kDefaultScorerTimeout{30000};

// External plugin process speaking the line protocol over stdin/stdout.
class PluginScorer : public Scorer {
 public:
  explicit PluginScorer(std::vector<std::string> argv,
                        std::chrono::milliseconds timeout = kDefaultScorerTimeout);
  ~PluginScorer() override;

  std::string id() const override { return id_; }
  // Throws TimeoutError naming the first unanswered utt_id, TransportError
  // when the plugin exits early, ProtocolError for a bad response line.
  std::vector<ScoreResponse> ScoreBatch(
      std::span<const ScoreRequest> requests) override;

 private:
  std::vector<std::string> argv_;
  std::string id_;
  std::chrono::milliseconds timeout_;
  std::unique_ptr<Subprocess> process_;
};

// Answers requests read from `in` until end of input. A malformed line gets
// an error response when its utt_id can be recovered; otherwise the loop
// stops and returns 2. Returns 0 at end of input.
int ServeScorer(const LmScorer& scorer, std::istream& in, std::ostream& out);

struct ConformanceCase {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ConformanceReport {
  std::vector<ConformanceCase> cases;
  bool all_passed() const;
};

// Runs the fixed 12-case handshake, each case against a fresh process.
ConformanceReport CheckConformance(
    const std::vector<std::string>& argv,
    std::chrono::milliseconds timeout = std::chrono::milliseconds{10000});

}  // namespace nbf

#endif  // NBF_SCORER_H_
