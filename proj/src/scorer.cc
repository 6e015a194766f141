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

#include "nbf/scorer.h"

#include <cmath>
#include <iostream>

#include <fmt/format.h>

#include "json.hpp"
#include "nbf/error.h"

namespace nbf {

namespace {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

Json ParseObject(std::string_view line) {
  Json obj;
  try {
    obj = Json::parse(line);
  } catch (const Json::exception& e) {
    throw ProtocolError(std::string("malformed JSON: ") + e.what(),
                        std::string(line));
  }
  if (!obj.is_object()) {
    throw ProtocolError("expected a JSON object", std::string(line));
  }
  return obj;
}

template <typename T>
std::optional<T> Opt(const Json& obj, const char* key, std::string_view line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  try {
    return it->get<T>();
  } catch (const Json::exception&) {
    throw ProtocolError(std::string("bad type for '") + key + "'",
                        std::string(line));
  }
}

template <typename T>
T Req(const Json& obj, const char* key, std::string_view line) {
  auto v = Opt<T>(obj, key, line);
  if (!v) {
    throw ProtocolError(std::string("missing '") + key + "'", std::string(line));
  }
  return *v;
}

std::string_view TaskName(ScoreTask t) {
  return t == ScoreTask::kScore ? "score" : "generate";
}

}  // namespace

std::string ToLine(const ScoreRequest& r) {
  OrderedJson j;
  j["utt_id"] = r.utt_id;
  j["task"] = std::string(TaskName(r.task));
  j["candidates"] = r.candidates ? OrderedJson(*r.candidates) : OrderedJson(nullptr);
  j["context"] = r.context;
  j["n_best_texts"] = r.n_best_texts;
  j["phones"] = r.phones ? OrderedJson(*r.phones) : OrderedJson(nullptr);
  j["word_confidences"] =
      r.word_confidences ? OrderedJson(*r.word_confidences) : OrderedJson(nullptr);
  return j.dump();
}

std::string ToLine(const ScoreResponse& r) {
  OrderedJson j;
  j["utt_id"] = r.utt_id;
  j["scores"] = r.scores ? OrderedJson(*r.scores) : OrderedJson(nullptr);
  j["corrected"] = r.corrected ? OrderedJson(*r.corrected) : OrderedJson(nullptr);
  if (r.error) j["error"] = *r.error;
  return j.dump();
}

ScoreRequest ParseRequestLine(std::string_view line) {
  const Json obj = ParseObject(line);
  ScoreRequest r;
  r.utt_id = Req<std::string>(obj, "utt_id", line);
  const auto task = Req<std::string>(obj, "task", line);
  if (task == "score") {
    r.task = ScoreTask::kScore;
  } else if (task == "generate") {
    r.task = ScoreTask::kGenerate;
  } else {
    throw ProtocolError("unknown task '" + task + "'", std::string(line));
  }
  r.candidates = Opt<std::vector<std::string>>(obj, "candidates", line);
  r.context = Opt<std::string>(obj, "context", line).value_or("");
  r.n_best_texts =
      Opt<std::vector<std::string>>(obj, "n_best_texts", line).value_or(
          std::vector<std::string>{});
  r.phones = Opt<std::vector<std::string>>(obj, "phones", line);
  r.word_confidences =
      Opt<std::vector<std::vector<double>>>(obj, "word_confidences", line);
  return r;
}

ScoreResponse ParseResponseLine(std::string_view line) {
  const Json obj = ParseObject(line);
  ScoreResponse r;
  r.utt_id = Req<std::string>(obj, "utt_id", line);
  r.scores = Opt<std::vector<double>>(obj, "scores", line);
  r.corrected = Opt<std::string>(obj, "corrected", line);
  r.error = Opt<std::string>(obj, "error", line);
  return r;
}

void CheckResponse(const ScoreRequest& request, const ScoreResponse& response,
                   std::string_view raw) {
  const std::string line(raw);
  if (response.utt_id != request.utt_id) {
    throw ProtocolError(fmt::format("response for '{}' where '{}' was expected",
                                    response.utt_id, request.utt_id),
                        line);
  }
  if (response.error) {
    throw ProtocolError("scorer rejected '" + request.utt_id +
                            "': " + *response.error,
                        line);
  }
  if (request.task == ScoreTask::kScore) {
    const std::size_t want = request.candidates ? request.candidates->size() : 0;
    if (!response.scores) throw ProtocolError("missing scores", line);
    if (response.scores->size() != want) {
      throw ProtocolError(fmt::format("{} scores for {} candidates",
                                      response.scores->size(), want),
                          line);
    }
    for (double s : *response.scores) {
      if (!std::isfinite(s)) throw ProtocolError("non-finite score", line);
    }
  } else if (!response.corrected) {
    throw ProtocolError("missing corrected text", line);
  }
}

ScoreResponse LmScorer::Answer(const ScoreRequest& request) const {
  ScoreResponse resp;
  resp.utt_id = request.utt_id;
  if (request.task == ScoreTask::kScore) {
    if (!request.candidates || request.candidates->empty()) {
      resp.error = "score request without candidates";
      return resp;
    }
    std::vector<double> scores;
    scores.reserve(request.candidates->size());
    for (const auto& c : *request.candidates) scores.push_back(model_.Score(c));
    resp.scores = std::move(scores);
    return resp;
  }
  if (request.n_best_texts.empty()) {
    resp.error = "generate request without n_best_texts";
    return resp;
  }
  std::size_t best = 0;
  double best_score = model_.Score(request.n_best_texts[0]);
  for (std::size_t k = 1; k < request.n_best_texts.size(); ++k) {
    const double s = model_.Score(request.n_best_texts[k]);
    if (s > best_score) {
      best_score = s;
      best = k;
    }
  }
  resp.corrected = request.n_best_texts[best];
  return resp;
}

std::vector<ScoreResponse> LmScorer::ScoreBatch(
    std::span<const ScoreRequest> requests) {
  std::vector<ScoreResponse> out;
  out.reserve(requests.size());
  for (const auto& r : requests) {
    out.push_back(Answer(r));
    CheckResponse(r, out.back(), ToLine(out.back()));
  }
  return out;
}

PluginScorer::PluginScorer(std::vector<std::string> argv,
                           std::chrono::milliseconds timeout)
    : argv_(std::move(argv)), timeout_(timeout) {
  if (argv_.empty()) throw Error("empty scorer command");
  id_ = "plugin:" + argv_.front();
}

PluginScorer::~PluginScorer() {
  if (process_) process_->Terminate(std::chrono::milliseconds(2000));
}

std::vector<ScoreResponse> PluginScorer::ScoreBatch(
    std::span<const ScoreRequest> requests) {
  if (!process_ || !process_->running()) {
    process_ = std::make_unique<Subprocess>(argv_);
  }
  std::vector<std::string> lines;
  lines.reserve(requests.size());
  for (const auto& r : requests) lines.push_back(ToLine(r));
  Subprocess::Exchange ex = process_->Run(lines, timeout_);

  if (ex.status == Subprocess::Status::kTimeout) {
    process_->Terminate(std::chrono::milliseconds(0));
    process_.reset();
    throw TimeoutError(requests[ex.lines.size()].utt_id);
  }
  if (ex.status == Subprocess::Status::kClosed) {
    const int code = process_->Terminate(std::chrono::milliseconds(2000));
    process_.reset();
    if (code != 0) {
      throw TransportError(fmt::format("scorer '{}' exited with status {}",
                                       argv_.front(), code));
    }
    throw TransportError(fmt::format(
        "scorer '{}' closed its output after {} of {} responses", argv_.front(),
        ex.lines.size(), requests.size()));
  }

  std::vector<ScoreResponse> out;
  out.reserve(requests.size());
  for (std::size_t i = 0; i < requests.size(); ++i) {
    out.push_back(ParseResponseLine(ex.lines[i]));
    CheckResponse(requests[i], out.back(), ex.lines[i]);
  }
  return out;
}

int ServeScorer(const LmScorer& scorer, std::istream& in, std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ScoreResponse resp;
    try {
      resp = scorer.Answer(ParseRequestLine(line));
    } catch (const ProtocolError& e) {
      // Echo the id when the line is at least an object carrying one.
      std::optional<std::string> id;
      try {
        const Json obj = Json::parse(line);
        if (obj.is_object() && obj.contains("utt_id") &&
            obj["utt_id"].is_string()) {
          id = obj["utt_id"].get<std::string>();
        }
      } catch (const Json::exception&) {
      }
      if (!id) {
        std::cerr << "unrecoverable request: " << e.what() << '\n';
        return 2;
      }
      resp.utt_id = *id;
      resp.error = e.what();
    }
    out << ToLine(resp) << '\n';
    out.flush();
  }
  return 0;
}

bool ConformanceReport::all_passed() const {
  for (const auto& c : cases) {
    if (!c.passed) return false;
  }
  return !cases.empty();
}

}  // namespace nbf
