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

#include <cmath>
#include <cstdint>
#include <unordered_map>

#include "fleetplan/compressor.hpp"
#include "fleetplan/errors.hpp"
#include "fleetplan/text.hpp"

namespace fleetplan {

double tfidf_cosine(std::string_view a, std::string_view b) {
  std::unordered_map<std::string, std::pair<double, double>> counts;
  for (auto& t : tokenize_terms(a)) counts[t].first += 1.0;
  for (auto& t : tokenize_terms(b)) counts[t].second += 1.0;
  // idf over the two-document collection: ln(3 / (1 + df)) + 1.
  const double idf_shared = 1.0;
  const double idf_single = std::log(1.5) + 1.0;
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [term, c] : counts) {
    const double w = (c.first > 0 && c.second > 0) ? idf_shared : idf_single;
    const double x = c.first * w;
    const double y = c.second * w;
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::min(1.0, dot / std::sqrt(na * nb));
}

// Bit-parallel LCS (Allison-Dix / Hyyro) over the positions of `a`.
std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0;
  const std::size_t words = (a.size() + 63) / 64;
  std::unordered_map<std::string_view, std::vector<std::uint64_t>> match;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto& mask = match[a[i]];
    if (mask.empty()) mask.assign(words, 0);
    mask[i / 64] |= std::uint64_t{1} << (i % 64);
  }

  std::vector<std::uint64_t> v(words, ~std::uint64_t{0});
  for (const auto& token : b) {
    const auto it = match.find(token);
    if (it == match.end()) continue;
    const auto& m = it->second;
    std::uint64_t carry = 0;
    for (std::size_t w = 0; w < words; ++w) {
      const std::uint64_t u = v[w] & m[w];
      const std::uint64_t sum = v[w] + u;
      const std::uint64_t out = sum + carry;
      const std::uint64_t next_carry = (sum < v[w]) || (out < sum) ? 1 : 0;
      v[w] = out | (v[w] - u);
      carry = next_carry;
    }
  }
  std::size_t zeros = 0;
  for (std::size_t w = 0; w < words; ++w) {
    std::uint64_t x = ~v[w];
    if (w + 1 == words && a.size() % 64 != 0) x &= (std::uint64_t{1} << (a.size() % 64)) - 1;
    zeros += static_cast<std::size_t>(__builtin_popcountll(x));
  }
  return zeros;
}

double rouge_l_recall(std::string_view reference, std::string_view candidate) {
  if (reference.empty()) throw InvalidArgument("ROUGE-L needs a non-empty reference");
  const auto ref = tokenize_terms(reference);
  if (ref.empty()) return 0.0;
  const auto cand = tokenize_terms(candidate);
  return static_cast<double>(lcs_length(ref, cand)) / static_cast<double>(ref.size());
}

}  // namespace fleetplan
