// Copyright 2026 The las-desk Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LAS_UTF8_H_
#define LAS_UTF8_H_

#include <string>
#include <string_view>
#include <vector>

namespace las::text {

// Malformed sequences decode to U+FFFD.
std::u32string DecodeUtf8(std::string_view s);
std::string EncodeUtf8(std::u32string_view s);

// Splits on ASCII whitespace, dropping empty fields.
std::vector<std::string> SplitWords(std::string_view s);
std::string JoinWords(const std::vector<std::string>& words);
// Collapses whitespace runs to one space and trims both ends.
std::string NormalizeWhitespace(std::string_view s);

}  // namespace las::text

#endif  // LAS_UTF8_H_
