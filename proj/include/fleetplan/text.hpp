// Copyright 2026 The fleetplan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FLEETPLAN_TEXT_HPP_
#define FLEETPLAN_TEXT_HPP_

#include <string>
#include <string_view>
#include <vector>

#include "fleetplan/workload.hpp"

namespace fleetplan {

// ceil(bytes / bytes_per_token); 0 for 0 bytes.
Tokens estimate_tokens(std::size_t bytes, double bytes_per_token);

// Lowercased word terms. ASCII letters and digits plus non-ASCII letters form
// words; each CJK ideograph or kana is its own term; punctuation is dropped.
std::vector<std::string> tokenize_terms(std::string_view text);

// Sentence spans, trimmed, in source order. Splits after . ! ? and their
// full-width forms, and at blank lines. A period after a known abbreviation,
// or followed by a lowercase word, does not end a sentence.
std::vector<std::string_view> split_sentence_spans(std::string_view text);

}  // namespace fleetplan

#endif  // FLEETPLAN_TEXT_HPP_
