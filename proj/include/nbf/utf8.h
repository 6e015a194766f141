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

#ifndef NBF_UTF8_H_
#define NBF_UTF8_H_

#include <string>
#include <string_view>
#include <vector>

namespace nbf::utf8 {

// Decodes UTF-8; ill-formed sequences become U+FFFD.
std::u32string Decode(std::string_view s);
std::string Encode(std::u32string_view s);
void Append(char32_t cp, std::string* out);
bool IsValid(std::string_view s);

bool IsSpace(char32_t cp);
// Simple one-to-one lowercase mapping for Latin, Greek and Cyrillic.
// Every returned code point is a fixed point of the mapping.
char32_t ToLower(char32_t cp);
char32_t ToUpper(char32_t cp);

// Splits on runs of Unicode whitespace, dropping empty pieces.
std::vector<std::string> SplitWords(std::string_view s);

}  // namespace nbf::utf8

#endif  // NBF_UTF8_H_
