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

#include "corpus.hpp"

#include <array>
#include <string_view>

#include "fleetplan/random.hpp"

namespace fleetplan::testing {

namespace {

struct Topic {
  std::array<std::string_view, 10> nouns;
  std::array<std::string_view, 6> verbs;
};

constexpr std::array<Topic, 6> kTopics = {{
    {{"cache", "replica", "shard", "latency", "quorum", "leader", "snapshot", "lease", "partition", "journal"},
     {"replicates", "evicts", "compacts", "throttles", "rebalances", "acknowledges"}},
    {{"patient", "dosage", "trial", "cohort", "biomarker", "placebo", "symptom", "clinic", "protocol", "outcome"},
     {"reduces", "predicts", "tracks", "doubles", "stabilizes", "confirms"}},
    {{"invoice", "ledger", "refund", "vendor", "audit", "budget", "forecast", "margin", "payroll", "contract"},
     {"reconciles", "flags", "approves", "defers", "reports", "exceeds"}},
    {{"glacier", "sediment", "aquifer", "rainfall", "estuary", "canopy", "drought", "wetland", "runoff", "basin"},
     {"absorbs", "erodes", "feeds", "shrinks", "drains", "warms"}},
    {{"turbine", "bearing", "gearbox", "sensor", "rotor", "coupling", "inverter", "blade", "housing", "valve"},
     {"vibrates", "overheats", "drives", "regulates", "fails", "survives"}},
    {{"novel", "chapter", "narrator", "villain", "harbor", "letter", "winter", "sister", "voyage", "garden"},
     {"reveals", "hides", "remembers", "betrays", "follows", "returns"}},
}};

constexpr std::array<std::string_view, 16> kFiller = {
    "the", "a", "every", "this", "that", "our", "their", "each",
    "quietly", "again", "often", "rarely", "slowly", "clearly", "mostly", "early"};

constexpr std::array<std::string_view, 8> kAdjectives = {
    "primary", "stale", "remote", "fragile", "recent", "large", "minor", "critical"};

constexpr std::array<std::string_view, 5> kOpeners = {
    "Background:", "Context:", "Note:", "Summary:", "Question:"};

template <std::size_t N>
std::string_view pick(const std::array<std::string_view, N>& bank, UniformStream& rng) {
  return bank[rng.next_u64() % N];
}

std::string sentence(const Topic& topic, UniformStream& rng) {
  std::string s;
  const auto shape = rng.next_u64() % 6;
  auto noun = [&] { return std::string(topic.nouns[rng.next_u64() % topic.nouns.size()]); };
  auto verb = [&] { return std::string(topic.verbs[rng.next_u64() % topic.verbs.size()]); };
  auto cap = [](std::string w) {
    if (!w.empty() && w[0] >= 'a' && w[0] <= 'z') w[0] = static_cast<char>(w[0] - 'a' + 'A');
    return w;
  };
  switch (shape) {
    case 0:
      s = cap(std::string(pick(kFiller, rng))) + " " + std::string(pick(kAdjectives, rng)) + " " + noun() + " " +
          verb() + " the " + noun() + ".";
      break;
    case 1:
      s = "When the " + noun() + " " + verb() + ", the " + noun() + " " + verb() + " " +
          std::string(pick(kFiller, rng)) + ".";
      break;
    case 2:
      s = "Does the " + std::string(pick(kAdjectives, rng)) + " " + noun() + " still " +
          std::string(topic.verbs[0]) + "?";
      break;
    case 3:
      s = "Measurements show " + std::to_string(rng.next_u64() % 90 + 10) + "." +
          std::to_string(rng.next_u64() % 10) + " percent of " + noun() + " output, e.g. the " + noun() +
          " readings.";
      break;
    case 4:
      s = "Dr. " + cap(noun()) + " noted that the " + noun() + " " + verb() + " " + std::string(pick(kFiller, rng)) +
          " " + noun() + ".";
      break;
    default:
      s = cap(noun()) + " and " + noun() + " " + verb() + " together!";
      break;
  }
  return s;
}

}  // namespace

std::string fixture_prompt(std::size_t tokens, std::uint64_t seed) {
  UniformStream rng(seed);
  const Topic& topic = kTopics[rng.next_u64() % kTopics.size()];
  const Topic& aside = kTopics[rng.next_u64() % kTopics.size()];
  const std::size_t target_bytes = tokens * 4;
  std::string text = std::string(pick(kOpeners, rng)) + " the following notes concern the " +
                     std::string(topic.nouns[0]) + ".";
  std::size_t since_break = 0;
  while (text.size() < target_bytes) {
    // Mostly on-topic sentences with an occasional digression.
    const Topic& t = rng.next() < 0.85 ? topic : aside;
    if (since_break >= 6 && rng.next() < 0.2) {
      text += "\n\n";
      since_break = 0;
    } else {
      text += ' ';
    }
    text += sentence(t, rng);
    ++since_break;
  }
  text += " Please answer using the " + std::string(topic.nouns[1]) + " details above.";
  return text;
}

std::vector<FixturePrompt> fixture_corpus(std::size_t count, std::uint64_t seed) {
  constexpr std::array<Category, 3> kCategories = {Category::kProse, Category::kRag, Category::kConversational};
  std::vector<FixturePrompt> corpus;
  corpus.reserve(count);
  UniformStream sizes(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const auto tokens = static_cast<std::size_t>(1000 + sizes.next() * 13000);
    corpus.push_back({fixture_prompt(tokens, derive_seed(seed, i)), kCategories[i % kCategories.size()]});
  }
  return corpus;
}

}  // namespace fleetplan::testing
