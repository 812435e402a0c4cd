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

#ifndef FLEETPLAN_ROUTER_HPP_
#define FLEETPLAN_ROUTER_HPP_

#include <array>
#include <atomic>
#include <optional>
#include <string>
#include <string_view>

#include "fleetplan/compressor.hpp"
#include "fleetplan/random.hpp"
#include "fleetplan/workload.hpp"

namespace fleetplan {

// Per-category bytes-per-token EMA. Updates are lock-free per category,
// last writer wins; readers never see a torn value.
class TokenEstimator {
 public:
  static constexpr double kMinBytesPerToken = 1.0;
  static constexpr double kMaxBytesPerToken = 32.0;

  explicit TokenEstimator(double smoothing = 0.1, double initial_bytes_per_token = 4.0);
  TokenEstimator(const TokenEstimator& other);
  TokenEstimator& operator=(const TokenEstimator& other);

  double bytes_per_token(Category category) const;
  double smoothing() const { return smoothing_; }
  void update(Category category, std::int64_t payload_bytes, Tokens actual_tokens);

 private:
  double smoothing_;
  std::array<std::atomic<double>, kAllCategories.size()> ema_;
};

// ceil(payload_bytes / c_k) + max_output_tokens.
Tokens estimate_total_tokens(const TokenEstimator& estimator, std::int64_t payload_bytes,
                             Category category, Tokens max_output_tokens);

void update_ema(TokenEstimator& estimator, Category category, std::int64_t payload_bytes,
                Tokens actual_tokens);

enum class Pool { kShort, kLong };
enum class RouteReason { kBelowBoundary, kCompressedIntoShort, kCodeGate, kIncompressible, kAboveBand };

std::string_view to_string(Pool pool);
std::string_view to_string(RouteReason reason);

struct RoutingDecision {
  Pool pool = Pool::kShort;
  bool compressed = false;
  Tokens estimated_total = 0;
  Tokens estimated_input = 0;
  Tokens output_tokens = 0;
  // Input tokens as admitted to the chosen pool (after compression).
  Tokens routed_input = 0;
  std::optional<Tokens> budget;
  RouteReason reason = RouteReason::kBelowBoundary;
  std::optional<CompressionResult> compression;
};

struct RouterConfig {
  Tokens boundary = 4096;
  double gamma = 1.0;
  // Success probability used when a request carries no prompt text.
  double compressibility = 1.0;
  CompressorConfig compressor;

  void validate() const;
};

// `stream` drives the Bernoulli compressibility draw for text-free requests
// and may be null only when compressibility is 0 or 1.
RoutingDecision route(const RequestRecord& request, const RouterConfig& config,
                      const TokenEstimator& estimator, UniformStream* stream = nullptr);

// {"pool", "compressed", "L_total", "reason"} as one JSON line.
std::string decision_json_line(const RoutingDecision& decision);

}  // namespace fleetplan

#endif  // FLEETPLAN_ROUTER_HPP_
