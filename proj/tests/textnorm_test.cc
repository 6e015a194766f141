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

#include <random>

#include "nbf/error.h"
#include "nbf/textnorm.h"
#include "nbf/utf8.h"
#include "test_util.h"

namespace nbf {
namespace {

TEST(Normalize, Examples) {
  NormRules r;
  EXPECT_EQ(Normalize("", r), "");
  EXPECT_EQ(Normalize("Hello, World!", r), "hello world");
  EXPECT_EQ(Normalize("it's  FINE.", r), "it's fine");
  EXPECT_EQ(Normalize("  \t leading and trailing \n", r), "leading and trailing");
  EXPECT_EQ(Normalize("'quoted' well-known -dash-", r), "quoted well-known dash");
  EXPECT_EQ(Normalize("wait—what", r), "wait what");
  EXPECT_EQ(Normalize("ÉCOLE Straße ΣΟΦΙΑ", r), "école straße σοφια");
  EXPECT_EQ(Normalize("a.b,c", r), "a b c");
  EXPECT_EQ(Normalize("!!! ...", r), "");
}

TEST(Normalize, IdentityLeavesTextAlone) {
  const std::string s = "  Hello,\tWORLD! ";
  EXPECT_EQ(Normalize(s, NormRules::Identity()), s);
}

TEST(Normalize, PostconditionsOnRandomText) {
  std::mt19937_64 rng(7);
  NormRules r;
  for (int i = 0; i < 5000; ++i) {
    const std::string out = Normalize(testing::RandomUnicode(rng, 40), r);
    ASSERT_TRUE(utf8::IsValid(out));
    EXPECT_EQ(out.find("  "), std::string::npos) << out;
    if (!out.empty()) {
      EXPECT_NE(out.front(), ' ');
      EXPECT_NE(out.back(), ' ');
    }
    for (char32_t cp : utf8::Decode(out)) {
      EXPECT_EQ(r.strip_punct().find(cp), std::u32string::npos);
      EXPECT_EQ(utf8::ToLower(cp), cp);
      if (cp != U' ') {
        EXPECT_FALSE(utf8::IsSpace(cp));
      }
    }
  }
}

TEST(Normalize, IdempotentOnRandomText) {
  std::mt19937_64 rng(11);
  NormRules collapse;
  NormRules keep_ws;
  keep_ws.set_collapse_ws(false);
  NormRules mapped = NormRules::Parse(
      "{\"map\":[\"colour\",\"color\"]}\n{\"map\":[\"ok\",\"o k\"]}\n");
  for (int i = 0; i < 20000; ++i) {
    const std::string s = testing::RandomUnicode(rng, 30);
    for (const NormRules* r : {&collapse, &keep_ws, &mapped}) {
      const std::string once = Normalize(s, *r);
      ASSERT_EQ(Normalize(once, *r), once) << "input: " << s;
    }
  }
}

TEST(Normalize, CaseInvariance) {
  std::mt19937_64 rng(13);
  NormRules r;
  auto upper = [](const std::string& s) {
    std::u32string u = utf8::Decode(s);
    for (char32_t& c : u) c = utf8::ToUpper(c);
    return utf8::Encode(u);
  };
  int checked = 0;
  for (int i = 0; i < 20000; ++i) {
    const std::string s = testing::RandomUnicode(rng, 30);
    // Characters such as dotless i or final sigma do not survive an
    // upper/lower round trip; skip strings containing them.
    bool round_trips = true;
    for (char32_t c : utf8::Decode(s)) {
      if (utf8::ToLower(utf8::ToUpper(c)) != utf8::ToLower(c)) round_trips = false;
    }
    if (!round_trips) continue;
    ++checked;
    ASSERT_EQ(Normalize(upper(s), r), Normalize(s, r)) << s;
  }
  EXPECT_GT(checked, 5000);
  EXPECT_EQ(Normalize("HELLO wOrLd", r), Normalize("hello world", r));
}

TEST(Normalize, WhitespacePreservedWhenNotCollapsing) {
  NormRules r;
  r.set_collapse_ws(false);
  EXPECT_EQ(Normalize(" A,  b\t", r), " a   b\t");
}

TEST(Normalize, WordsSplit) {
  EXPECT_EQ(NormalizeWords("The  CAT, sat.", NormRules()),
            (std::vector<std::string>{"the", "cat", "sat"}));
  EXPECT_TRUE(NormalizeWords("...", NormRules()).empty());
}

TEST(NormRulesFile, ParsesScalarsAndMappings) {
  NormRules r = NormRules::Parse(
      "# comment\n"
      "{\"lowercase\": false}\n"
      "{\"strip_punct\": \".\"}\n"
      "{\"map\": [\"Colour\", \"color\"]}\n");
  EXPECT_FALSE(r.lowercase());
  EXPECT_EQ(r.strip_punct(), U".");
  ASSERT_EQ(r.mappings().size(), 1u);
  EXPECT_EQ(Normalize("Colour Red.", r), "color Red");
  EXPECT_EQ(Normalize("Colour, Red.", r), "Colour, Red");
}

TEST(NormRulesFile, MappingsUseFinalScalars) {
  NormRules r = NormRules::Parse("{\"map\": [\"OK\", \"okay\"]}\n{\"lowercase\": true}\n");
  EXPECT_EQ(r.mappings()[0].first, "ok");
  EXPECT_EQ(Normalize("Ok, fine", r), "okay fine");
}

TEST(NormRulesFile, DisabledRules) {
  NormRules r = NormRules::Parse("{\"enabled\": false}\n");
  EXPECT_EQ(Normalize("A,B", r), "A,B");
}

TEST(NormRulesFile, RejectsBadInput) {
  EXPECT_THROW(NormRules::Parse("{\"lowercase\": 1}\n"), ParseError);
  EXPECT_THROW(NormRules::Parse("{\"bogus\": true}\n"), ParseError);
  EXPECT_THROW(NormRules::Parse("not json\n"), ParseError);
  EXPECT_THROW(NormRules::Parse("{\"map\": [\"a\"]}\n"), ParseError);
  try {
    NormRules::Parse("{\"lowercase\": true}\n{\"map\": [\"a b\", \"c\"]}\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(NormRules::Load("/nonexistent/rules.jsonl"), IoError);
}

TEST(NormRulesFile, RejectsMappingChains) {
  NormRules r;
  r.AddMapping("a", "b");
  EXPECT_THROW(r.AddMapping("b", "c"), Error);
  EXPECT_THROW(r.AddMapping("c", "x a"), Error);
  EXPECT_THROW(r.AddMapping("d", "d e"), Error);
  EXPECT_NO_THROW(r.AddMapping("e", "f g"));
  EXPECT_EQ(Normalize("a e z", r), "b f g z");
}

TEST(Utf8, DecodeEncodeAndValidity) {
  EXPECT_TRUE(utf8::IsValid("héllo 日本 \U0001F642"));
  EXPECT_FALSE(utf8::IsValid("\xC3"));
  EXPECT_FALSE(utf8::IsValid("\xED\xA0\x80"));
  EXPECT_FALSE(utf8::IsValid("\xC0\xAF"));
  EXPECT_EQ(utf8::Decode("a\xFF" "b"), U"a�b");
  EXPECT_EQ(utf8::Encode(U"ü\U0001F642"), "ü\U0001F642");
  EXPECT_EQ(utf8::SplitWords(" a　b\t c "), (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Utf8, LowercaseIsAFixedPoint) {
  for (char32_t c = 0; c < 0x3000; ++c) {
    const char32_t l = utf8::ToLower(c);
    ASSERT_EQ(utf8::ToLower(l), l) << std::hex << static_cast<unsigned>(c);
  }
}

}  // namespace
}  // namespace nbf
