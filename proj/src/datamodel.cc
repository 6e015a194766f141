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

#include "nbf/datamodel.h"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>

#include "json.hpp"
#include "nbf/error.h"
#include "nbf/utf8.h"

namespace nbf {

ParseError::ParseError(std::size_t line, std::string field,
                       const std::string& what)
    : Error(fmt::format("line {}: field '{}': {}", line, field, what)),
      line_(line),
      field_(std::move(field)) {}

DuplicateIdError::DuplicateIdError(std::string utt_id)
    : Error("duplicate utt_id '" + utt_id + "'"), utt_id_(std::move(utt_id)) {}

MissingReferenceError::MissingReferenceError(std::string utt_id)
    : Error("utterance '" + utt_id + "' has no reference"),
      utt_id_(std::move(utt_id)) {}

ProtocolError::ProtocolError(const std::string& what,
                             std::string offending_line)
    : Error(what + " (line: " + offending_line + ")"),
      line_(std::move(offending_line)) {}

TimeoutError::TimeoutError(std::string utt_id)
    : Error("scorer timed out on utt_id '" + utt_id + "'"),
      utt_id_(std::move(utt_id)) {}

std::string_view ToString(OrderTag tag) {
  switch (tag) {
    case OrderTag::kSorted: return "sorted";
    case OrderTag::kRandomized: return "randomized";
    case OrderTag::kReversed: return "reversed";
    case OrderTag::kUnknown: return "unknown";
  }
  return "unknown";
}

std::optional<OrderTag> ParseOrderTag(std::string_view s) {
  if (s == "sorted") return OrderTag::kSorted;
  if (s == "randomized") return OrderTag::kRandomized;
  if (s == "reversed") return OrderTag::kReversed;
  if (s == "unknown") return OrderTag::kUnknown;
  return std::nullopt;
}

namespace {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

class LineParser {
 public:
  explicit LineParser(std::size_t line) : line_(line) {}

  [[noreturn]] void Fail(const std::string& field,
                         const std::string& what) const {
    throw ParseError(line_, field, what);
  }

  const Json& Get(const Json& obj, const char* key,
                  const std::string& path) const {
    auto it = obj.find(key);
    if (it == obj.end()) Fail(path + key, "missing");
    return *it;
  }

  std::string String(const Json& v, const std::string& field) const {
    if (!v.is_string()) Fail(field, "expected string");
    return v.get<std::string>();
  }

  std::optional<std::string> OptString(const Json& obj, const char* key,
                                       const std::string& path) const {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return std::nullopt;
    return String(*it, path + key);
  }

  double Number(const Json& v, const std::string& field) const {
    if (!v.is_number()) Fail(field, "expected number");
    return v.get<double>();
  }

  void CheckKeys(const Json& obj, std::initializer_list<const char*> allowed,
                 const std::string& path) const {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool known = false;
      for (const char* k : allowed) known = known || it.key() == k;
      if (!known) Fail(path + it.key(), "unknown field");
    }
  }

 private:
  std::size_t line_;
};

Hypothesis ParseHypothesis(const LineParser& p, const Json& h,
                           const std::string& path) {
  if (!h.is_object()) p.Fail(path, "expected object");
  p.CheckKeys(h, {"text", "asr_logprob", "token_probs", "phones"}, path + ".");
  Hypothesis hyp;
  hyp.text = p.String(p.Get(h, "text", path + "."), path + ".text");
  hyp.asr_logprob =
      p.Number(p.Get(h, "asr_logprob", path + "."), path + ".asr_logprob");
  auto tp = h.find("token_probs");
  if (tp != h.end() && !tp->is_null()) {
    const std::string field = path + ".token_probs";
    if (!tp->is_array()) p.Fail(field, "expected array or null");
    std::vector<TokenProb> probs;
    probs.reserve(tp->size());
    for (std::size_t k = 0; k < tp->size(); ++k) {
      const Json& pair = (*tp)[k];
      const std::string item = fmt::format("{}[{}]", field, k);
      if (!pair.is_array() || pair.size() != 2) {
        p.Fail(item, "expected [token, probability]");
      }
      probs.push_back({p.String(pair[0], item), p.Number(pair[1], item)});
    }
    hyp.token_probs = std::move(probs);
  }
  hyp.phones = p.OptString(h, "phones", path + ".");
  return hyp;
}

UtteranceRecord ParseRecord(std::string_view line, std::size_t line_no) {
  LineParser p(line_no);
  Json obj;
  try {
    obj = Json::parse(line);
  } catch (const Json::exception& e) {
    p.Fail("<record>", std::string("malformed JSON: ") + e.what());
  }
  if (!obj.is_object()) p.Fail("<record>", "expected object");
  p.CheckKeys(obj, {"utt_id", "reference", "source_tag", "nbest", "order_tag"},
              "");
  UtteranceRecord rec;
  rec.utt_id = p.String(p.Get(obj, "utt_id", ""), "utt_id");
  rec.reference = p.OptString(obj, "reference", "");
  rec.source_tag = p.String(p.Get(obj, "source_tag", ""), "source_tag");
  const std::string tag = p.String(p.Get(obj, "order_tag", ""), "order_tag");
  auto order = ParseOrderTag(tag);
  if (!order) p.Fail("order_tag", "unknown value '" + tag + "'");
  rec.nbest.order_tag = *order;
  const Json& nbest = p.Get(obj, "nbest", "");
  if (!nbest.is_array()) p.Fail("nbest", "expected array");
  if (nbest.empty()) p.Fail("nbest", "empty list");
  rec.nbest.hypotheses.reserve(nbest.size());
  for (std::size_t i = 0; i < nbest.size(); ++i) {
    rec.nbest.hypotheses.push_back(
        ParseHypothesis(p, nbest[i], fmt::format("nbest[{}]", i)));
  }
  return rec;
}

OrderedJson HypothesisToJson(const Hypothesis& h) {
  OrderedJson j;
  j["text"] = h.text;
  j["asr_logprob"] = h.asr_logprob;
  if (h.token_probs) {
    OrderedJson arr = OrderedJson::array();
    for (const auto& tp : *h.token_probs) {
      arr.push_back(OrderedJson::array({tp.token, tp.prob}));
    }
    j["token_probs"] = std::move(arr);
  } else {
    j["token_probs"] = nullptr;
  }
  j["phones"] = h.phones ? OrderedJson(*h.phones) : OrderedJson(nullptr);
  return j;
}

std::string ReadSource(const std::string& source) {
  if (IsUrl(source)) return FetchUrl(source);
  std::ifstream in(source, std::ios::binary);
  if (!in) throw IoError("cannot open '" + source + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Iterates LF-terminated lines, rejecting BOM and CR endings.
template <typename Fn>
void ForEachLine(std::string_view text, Fn&& fn) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") {
    throw ParseError(1, "<record>", "byte order mark not allowed");
  }
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    ++line_no;
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') {
      throw ParseError(line_no, "<record>", "CR line ending not allowed");
    }
    if (line.empty()) continue;
    fn(line, line_no);
  }
}

}  // namespace

bool IsUrl(std::string_view source) {
  return source.starts_with("http://") || source.starts_with("https://");
}

UtteranceSet ParseDump(std::string_view text) {
  UtteranceSet records;
  std::unordered_set<std::string> seen;
  ForEachLine(text, [&](std::string_view line, std::size_t line_no) {
    UtteranceRecord rec = ParseRecord(line, line_no);
    if (!seen.insert(rec.utt_id).second) throw DuplicateIdError(rec.utt_id);
    records.push_back(std::move(rec));
  });
  return records;
}

UtteranceSet ParseDump(std::istream& in) {
  std::ostringstream ss;
  ss << in.rdbuf();
  return ParseDump(std::string_view(ss.str()));
}

UtteranceSet LoadDump(const std::string& source) {
  return ParseDump(std::string_view(ReadSource(source)));
}

std::string RecordToLine(const UtteranceRecord& record) {
  OrderedJson j;
  j["utt_id"] = record.utt_id;
  j["reference"] =
      record.reference ? OrderedJson(*record.reference) : OrderedJson(nullptr);
  j["source_tag"] = record.source_tag;
  OrderedJson nbest = OrderedJson::array();
  for (const auto& h : record.nbest.hypotheses) {
    nbest.push_back(HypothesisToJson(h));
  }
  j["nbest"] = std::move(nbest);
  j["order_tag"] = std::string(ToString(record.nbest.order_tag));
  try {
    return j.dump();
  } catch (const OrderedJson::type_error& e) {
    throw Error("cannot serialize '" + record.utt_id + "': " + e.what());
  }
}

void WriteDump(const UtteranceSet& records, std::ostream& out) {
  for (const auto& r : records) out << RecordToLine(r) << '\n';
}

void WriteDump(const UtteranceSet& records, const std::string& dest) {
  std::ofstream out(dest, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + dest + "' for writing");
  WriteDump(records, out);
  out.flush();
  if (!out) throw IoError("write to '" + dest + "' failed");
}

std::vector<ScoreVector> LoadScoreVectors(const std::string& path) {
  const std::string text = ReadSource(path);
  std::vector<ScoreVector> out;
  ForEachLine(text, [&](std::string_view line, std::size_t line_no) {
    LineParser p(line_no);
    Json obj;
    try {
      obj = Json::parse(line);
    } catch (const Json::exception& e) {
      p.Fail("<record>", std::string("malformed JSON: ") + e.what());
    }
    if (!obj.is_object()) p.Fail("<record>", "expected object");
    ScoreVector sv;
    sv.utt_id = p.String(p.Get(obj, "utt_id", ""), "utt_id");
    sv.scorer_id = p.String(p.Get(obj, "scorer_id", ""), "scorer_id");
    const Json& scores = p.Get(obj, "scores", "");
    if (!scores.is_array()) p.Fail("scores", "expected array");
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const double v = p.Number(scores[i], fmt::format("scores[{}]", i));
      if (!std::isfinite(v)) p.Fail(fmt::format("scores[{}]", i), "not finite");
      sv.scores.push_back(v);
    }
    out.push_back(std::move(sv));
  });
  return out;
}

void WriteScoreVectors(const std::vector<ScoreVector>& vectors,
                       std::ostream& out) {
  for (const auto& sv : vectors) {
    OrderedJson j;
    j["utt_id"] = sv.utt_id;
    j["scorer_id"] = sv.scorer_id;
    j["scores"] = sv.scores;
    out << j.dump() << '\n';
  }
}

ValidationReport Validate(const UtteranceSet& records,
                          const ValidateOptions& options) {
  ValidationReport report;
  auto add = [&](const std::string& id, std::string field, std::string msg) {
    report.violations.push_back({id, std::move(field), std::move(msg)});
  };
  std::unordered_set<std::string> seen;
  for (const auto& rec : records) {
    const std::string& id = rec.utt_id;
    if (!seen.insert(id).second) add(id, "utt_id", "duplicate id");
    if (!utf8::IsValid(id)) add(id, "utt_id", "invalid UTF-8");
    if (!utf8::IsValid(rec.source_tag)) {
      add(id, "source_tag", "invalid UTF-8");
    }
    if (rec.reference && !utf8::IsValid(*rec.reference)) {
      add(id, "reference", "invalid UTF-8");
    }
    const auto& hyps = rec.nbest.hypotheses;
    if (hyps.empty()) add(id, "nbest", "empty list");
    for (std::size_t i = 0; i < hyps.size(); ++i) {
      const Hypothesis& h = hyps[i];
      const std::string path = fmt::format("nbest[{}]", i);
      if (!utf8::IsValid(h.text)) add(id, path + ".text", "invalid UTF-8");
      if (h.text.empty() && !options.allow_empty_text) {
        add(id, path + ".text", "empty text");
      }
      if (!std::isfinite(h.asr_logprob)) {
        add(id, path + ".asr_logprob", "not finite");
      } else if (h.asr_logprob > 0.0) {
        add(id, path + ".asr_logprob", "positive log-probability");
      }
      if (h.token_probs) {
        for (std::size_t k = 0; k < h.token_probs->size(); ++k) {
          const TokenProb& tp = (*h.token_probs)[k];
          if (!(tp.prob >= 0.0 && tp.prob <= 1.0)) {
            add(id, fmt::format("{}.token_probs[{}]", path, k),
                fmt::format("probability {} outside [0,1]", tp.prob));
          }
          if (!utf8::IsValid(tp.token)) {
            add(id, fmt::format("{}.token_probs[{}]", path, k),
                "invalid UTF-8 token");
          }
        }
      }
      if (h.phones && !utf8::IsValid(*h.phones)) {
        add(id, path + ".phones", "invalid UTF-8");
      }
      if (rec.nbest.order_tag == OrderTag::kSorted && i > 0 &&
          h.asr_logprob > hyps[i - 1].asr_logprob) {
        add(id, path + ".asr_logprob",
            "order: sorted list has increasing asr_logprob");
      }
    }
  }
  return report;
}

namespace {

constexpr std::string_view kSpmMarker = "\xE2\x96\x81";  // U+2581

// Strips leading markers; returns how many bytes were removed.
std::size_t LeadingMarkerBytes(std::string_view token) {
  std::size_t i = 0;
  while (i < token.size()) {
    if (token[i] == ' ') {
      ++i;
    } else if (token.substr(i, kSpmMarker.size()) == kSpmMarker) {
      i += kSpmMarker.size();
    } else {
      break;
    }
  }
  return i;
}

}  // namespace

std::vector<WordPieces> GroupTokensIntoWords(
    const std::vector<TokenProb>& tokens) {
  std::vector<WordPieces> words;
  bool boundary = true;
  for (const auto& tp : tokens) {
    const std::size_t marker = LeadingMarkerBytes(tp.token);
    if (marker == tp.token.size()) {
      boundary = true;
      continue;
    }
    if (marker > 0 || boundary || words.empty()) {
      words.push_back({});
    }
    boundary = false;
    words.back().word.append(tp.token.substr(marker));
    words.back().probs.push_back(tp.prob);
  }
  return words;
}

}  // namespace nbf
