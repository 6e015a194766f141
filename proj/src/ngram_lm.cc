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

#include "nbf/ngram_lm.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "nbf/error.h"
#include "nbf/utf8.h"

namespace nbf {

namespace {

constexpr char kMagic[] = "NGLM1";

void PutU32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, 4);
}

void PutU64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b, 8);
}

std::uint32_t GetU32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw IoError("truncated model");
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

std::uint64_t GetU64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw IoError("truncated model");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

bool IsReserved(const std::string& w) {
  return w == "<unk>" || w == "<s>" || w == "</s>";
}

}  // namespace

std::size_t NgramModel::KeyHash::operator()(
    const std::vector<WordId>& key) const {
  std::uint64_t h = 14695981039346656037ULL;
  for (WordId id : key) {
    h ^= static_cast<std::uint32_t>(id);
    h *= 1099511628211ULL;
  }
  return static_cast<std::size_t>(h);
}

NgramModel NgramModel::Train(const std::vector<std::string>& sentences,
                             int order, int min_count) {
  if (sentences.empty()) throw Error("cannot train on an empty corpus");
  if (order < 1) throw Error("n-gram order must be at least 1");
  if (min_count < 1) min_count = 1;

  std::vector<std::vector<std::string>> tokenized;
  tokenized.reserve(sentences.size());
  std::map<std::string, std::uint64_t> freq;
  for (const auto& s : sentences) {
    tokenized.push_back(utf8::SplitWords(s));
    for (const auto& w : tokenized.back()) ++freq[w];
  }

  NgramModel m;
  m.order_ = order;
  m.min_count_ = min_count;
  m.words_ = {"<unk>", "</s>", "<s>"};
  // std::map iteration is sorted, so ids do not depend on corpus order.
  for (const auto& [w, c] : freq) {
    if (c >= static_cast<std::uint64_t>(min_count) && !IsReserved(w)) {
      m.words_.push_back(w);
    }
  }
  for (std::size_t i = 0; i < m.words_.size(); ++i) {
    m.index_.emplace(m.words_[i], static_cast<WordId>(i));
  }
  m.unigram_.assign(m.words_.size(), 0);
  m.contexts_.resize(order - 1);

  std::vector<WordId> ids;
  for (const auto& words : tokenized) {
    ids.clear();
    ids.push_back(kBos);
    for (const auto& w : words) ids.push_back(m.Lookup(w));
    ids.push_back(kEos);
    for (std::size_t i = 1; i < ids.size(); ++i) {
      ++m.unigram_[ids[i]];
      for (int k = 1; k < order && static_cast<std::size_t>(k) <= i; ++k) {
        std::vector<WordId> ctx(ids.begin() + (i - k), ids.begin() + i);
        ContextStats& st = m.contexts_[k - 1][std::move(ctx)];
        ++st.total;
        ++st.next[ids[i]];
      }
    }
  }
  m.Finalize();
  return m;
}

void NgramModel::Finalize() {
  index_.clear();
  for (std::size_t i = 0; i < words_.size(); ++i) {
    index_.emplace(words_[i], static_cast<WordId>(i));
  }
  unigram_total_ = 0;
  unigram_types_ = 0;
  for (std::uint64_t c : unigram_) {
    unigram_total_ += c;
    if (c > 0) ++unigram_types_;
  }
}

NgramModel::WordId NgramModel::Lookup(std::string_view word) const {
  if (word == "<s>" || word == "</s>") return kUnk;
  auto it = index_.find(std::string(word));
  return it == index_.end() ? kUnk : it->second;
}

double NgramModel::Prob(WordId word, std::span<const WordId> context) const {
  const double v = static_cast<double>(vocab_size());
  const double t0 = static_cast<double>(unigram_types_);
  double p = (static_cast<double>(unigram_[word]) + t0 / v) /
             (static_cast<double>(unigram_total_) + t0);
  const std::size_t max_k =
      std::min<std::size_t>(context.size(), static_cast<std::size_t>(order_ - 1));
  std::vector<WordId> key;
  key.reserve(max_k);
  for (std::size_t k = 1; k <= max_k; ++k) {
    key.assign(context.end() - k, context.end());
    const auto& table = contexts_[k - 1];
    auto it = table.find(key);
    if (it == table.end()) break;
    const ContextStats& st = it->second;
    const double types = static_cast<double>(st.next.size());
    auto nx = st.next.find(word);
    const double c = nx == st.next.end() ? 0.0 : static_cast<double>(nx->second);
    p = (c + types * p) / (static_cast<double>(st.total) + types);
  }
  return p;
}

double NgramModel::LogProb(WordId word, std::span<const WordId> context) const {
  return std::log(Prob(word, context));
}

long double NgramModel::SumLogProb(std::string_view sentence,
                                   std::size_t* tokens) const {
  std::vector<WordId> ids{kBos};
  for (const auto& w : utf8::SplitWords(sentence)) ids.push_back(Lookup(w));
  ids.push_back(kEos);
  long double total = 0.0L;
  const std::size_t hist = static_cast<std::size_t>(order_ - 1);
  for (std::size_t i = 1; i < ids.size(); ++i) {
    const std::size_t start = i > hist ? i - hist : 0;
    const double p =
        Prob(ids[i], std::span<const WordId>(ids).subspan(start, i - start));
    total += std::log(static_cast<long double>(p));
  }
  *tokens = ids.size() - 1;
  return total;
}

double NgramModel::Score(std::string_view sentence) const {
  std::size_t tokens = 0;
  return static_cast<double>(SumLogProb(sentence, &tokens));
}

double NgramModel::Perplexity(const std::vector<std::string>& sentences) const {
  if (sentences.empty()) throw Error("perplexity of an empty corpus");
  long double logprob = 0.0L;
  std::size_t tokens = 0;
  for (const auto& s : sentences) {
    std::size_t n = 0;
    logprob += SumLogProb(s, &n);
    tokens += n;
  }
  return static_cast<double>(
      std::exp(-logprob / static_cast<long double>(tokens)));
}

bool NgramModel::operator==(const NgramModel& o) const {
  if (order_ != o.order_ || min_count_ != o.min_count_ || words_ != o.words_ ||
      unigram_ != o.unigram_ || contexts_.size() != o.contexts_.size()) {
    return false;
  }
  for (std::size_t k = 0; k < contexts_.size(); ++k) {
    if (contexts_[k].size() != o.contexts_[k].size()) return false;
    for (const auto& [key, st] : contexts_[k]) {
      auto it = o.contexts_[k].find(key);
      if (it == o.contexts_[k].end() || it->second.total != st.total ||
          it->second.next != st.next) {
        return false;
      }
    }
  }
  return true;
}

// Layout (little endian):
//   "NGLM1" u32 order u32 min_count u32 n_symbols {u32 len, bytes}*
//   u64 unigram count per symbol
//   per context length k = 1..order-1:
//     u32 n_contexts, then sorted contexts: k x u32 id, u32 n_next,
//     sorted {u32 id, u64 count}*
void NgramModel::Serialize(std::ostream& out) const {
  out.write(kMagic, 5);
  PutU32(out, static_cast<std::uint32_t>(order_));
  PutU32(out, static_cast<std::uint32_t>(min_count_));
  PutU32(out, static_cast<std::uint32_t>(words_.size()));
  for (const auto& w : words_) {
    PutU32(out, static_cast<std::uint32_t>(w.size()));
    out.write(w.data(), static_cast<std::streamsize>(w.size()));
  }
  for (std::uint64_t c : unigram_) PutU64(out, c);
  for (const auto& table : contexts_) {
    std::vector<const std::vector<WordId>*> keys;
    keys.reserve(table.size());
    for (const auto& kv : table) keys.push_back(&kv.first);
    std::sort(keys.begin(), keys.end(),
              [](const auto* a, const auto* b) { return *a < *b; });
    PutU32(out, static_cast<std::uint32_t>(keys.size()));
    for (const auto* key : keys) {
      for (WordId id : *key) PutU32(out, static_cast<std::uint32_t>(id));
      const ContextStats& st = table.at(*key);
      std::vector<std::pair<WordId, std::uint64_t>> next(st.next.begin(),
                                                         st.next.end());
      std::sort(next.begin(), next.end());
      PutU32(out, static_cast<std::uint32_t>(next.size()));
      for (const auto& [id, c] : next) {
        PutU32(out, static_cast<std::uint32_t>(id));
        PutU64(out, c);
      }
    }
  }
}

NgramModel NgramModel::Deserialize(std::istream& in) {
  char magic[5];
  if (!in.read(magic, 5) || std::string_view(magic, 5) != kMagic) {
    throw IoError("not an NGLM1 model file");
  }
  NgramModel m;
  m.order_ = static_cast<int>(GetU32(in));
  m.min_count_ = static_cast<int>(GetU32(in));
  if (m.order_ < 1 || m.order_ > 64) throw IoError("bad model order");
  const std::uint32_t n = GetU32(in);
  if (n < 3) throw IoError("bad symbol table");
  m.words_.resize(n);
  for (auto& w : m.words_) {
    const std::uint32_t len = GetU32(in);
    w.resize(len);
    if (!in.read(w.data(), len)) throw IoError("truncated model");
  }
  m.unigram_.resize(n);
  for (auto& c : m.unigram_) c = GetU64(in);
  m.contexts_.resize(m.order_ - 1);
  for (int k = 1; k < m.order_; ++k) {
    const std::uint32_t count = GetU32(in);
    for (std::uint32_t c = 0; c < count; ++c) {
      std::vector<WordId> key(k);
      for (auto& id : key) {
        id = static_cast<WordId>(GetU32(in));
        if (static_cast<std::uint32_t>(id) >= n) throw IoError("bad word id");
      }
      ContextStats st;
      const std::uint32_t next = GetU32(in);
      for (std::uint32_t j = 0; j < next; ++j) {
        const auto id = static_cast<WordId>(GetU32(in));
        if (static_cast<std::uint32_t>(id) >= n) throw IoError("bad word id");
        const std::uint64_t cnt = GetU64(in);
        st.next.emplace(id, cnt);
        st.total += cnt;
      }
      m.contexts_[k - 1].emplace(std::move(key), std::move(st));
    }
  }
  m.Finalize();
  return m;
}

void NgramModel::Save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  Serialize(out);
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

NgramModel NgramModel::Load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model '" + path + "'");
  return Deserialize(in);
}

}  // namespace nbf
