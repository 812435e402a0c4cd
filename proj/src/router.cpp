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

#include "fleetplan/router.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "fleetplan/errors.hpp"
#include "fleetplan/text.hpp"

namespace fleetplan {

namespace {

std::size_t slot(Category category) { return static_cast<std::size_t>(category); }

}  // namespace

TokenEstimator::TokenEstimator(double smoothing, double initial_bytes_per_token)
    : smoothing_(smoothing) {
  if (!(smoothing > 0.0 && smoothing <= 1.0)) throw InvalidArgument("EMA smoothing must lie in (0, 1]");
  if (!(initial_bytes_per_token >= kMinBytesPerToken && initial_bytes_per_token <= kMaxBytesPerToken)) {
    throw InvalidArgument("initial bytes per token must lie in [1, 32]");
  }
  for (auto& e : ema_) e.store(initial_bytes_per_token, std::memory_order_relaxed);
}

TokenEstimator::TokenEstimator(const TokenEstimator& other) : smoothing_(other.smoothing_) {
  for (std::size_t i = 0; i < ema_.size(); ++i) ema_[i].store(other.ema_[i].load());
}

TokenEstimator& TokenEstimator::operator=(const TokenEstimator& other) {
  smoothing_ = other.smoothing_;
  for (std::size_t i = 0; i < ema_.size(); ++i) ema_[i].store(other.ema_[i].load());
  return *this;
}

double TokenEstimator::bytes_per_token(Category category) const {
  return ema_[slot(category)].load(std::memory_order_acquire);
}

void TokenEstimator::update(Category category, std::int64_t payload_bytes, Tokens actual_tokens) {
  if (actual_tokens < 1) throw InvalidArgument("EMA update needs actual_tokens >= 1");
  if (payload_bytes < 0) throw InvalidArgument("payload bytes must be >= 0");
  const double observed = static_cast<double>(payload_bytes) / static_cast<double>(actual_tokens);
  auto& cell = ema_[slot(category)];
  double current = cell.load(std::memory_order_acquire);
  double next;
  do {
    next = std::clamp((1.0 - smoothing_) * current + smoothing_ * observed, kMinBytesPerToken,
                      kMaxBytesPerToken);
  } while (!cell.compare_exchange_weak(current, next, std::memory_order_acq_rel));
}

Tokens estimate_total_tokens(const TokenEstimator& estimator, std::int64_t payload_bytes,
                             Category category, Tokens max_output_tokens) {
  if (payload_bytes < 1) throw InvalidArgument("payload must be at least one byte");
  if (max_output_tokens < 0) throw InvalidArgument("max output tokens must be >= 0");
  return estimate_tokens(static_cast<std::size_t>(payload_bytes), estimator.bytes_per_token(category)) +
         max_output_tokens;
}

void update_ema(TokenEstimator& estimator, Category category, std::int64_t payload_bytes,
                Tokens actual_tokens) {
  estimator.update(category, payload_bytes, actual_tokens);
}

std::string_view to_string(Pool pool) { return pool == Pool::kShort ? "short" : "long"; }

std::string_view to_string(RouteReason reason) {
  switch (reason) {
    case RouteReason::kBelowBoundary: return "below_boundary";
    case RouteReason::kCompressedIntoShort: return "compressed_into_short";
    case RouteReason::kCodeGate: return "code_gate";
    case RouteReason::kIncompressible: return "incompressible";
    case RouteReason::kAboveBand: return "above_band";
  }
  return "unknown";
}

void RouterConfig::validate() const {
  if (boundary < 1) throw InvalidArgument("boundary must be >= 1 token");
  if (!(gamma >= 1.0)) throw InvalidArgument("gamma must be >= 1");
  if (!(compressibility >= 0.0 && compressibility <= 1.0)) {
    throw InvalidArgument("compressibility must lie in [0, 1]");
  }
}

RoutingDecision route(const RequestRecord& request, const RouterConfig& config,
                      const TokenEstimator& estimator, UniformStream* stream) {
  config.validate();
  RoutingDecision d;
  d.output_tokens = request.output_tokens;
  const double bpt = estimator.bytes_per_token(request.category);
  if (request.payload_bytes) {
    d.estimated_input = estimate_tokens(static_cast<std::size_t>(std::max<std::int64_t>(1, *request.payload_bytes)), bpt);
  } else if (request.prompt_text && !request.prompt_text->empty()) {
    d.estimated_input = estimate_tokens(request.prompt_text->size(), bpt);
  } else {
    d.estimated_input = request.input_tokens;
  }
  d.estimated_total = d.estimated_input + request.output_tokens;
  d.routed_input = d.estimated_input;

  const auto top = static_cast<Tokens>(std::floor(config.gamma * static_cast<double>(config.boundary) + 1e-9));
  if (d.estimated_total <= config.boundary) {
    d.pool = Pool::kShort;
    d.reason = RouteReason::kBelowBoundary;
    return d;
  }
  d.pool = Pool::kLong;
  if (d.estimated_total > top) {
    d.reason = RouteReason::kAboveBand;
    return d;
  }
  if (request.category == Category::kCode) {
    d.reason = RouteReason::kCodeGate;
    return d;
  }
  const Tokens budget = config.boundary - request.output_tokens;
  if (budget <= 0) {
    d.reason = RouteReason::kIncompressible;
    return d;
  }
  d.budget = budget;

  if (request.prompt_text && !request.prompt_text->empty()) {
    CompressorConfig cc = config.compressor;
    cc.bytes_per_token = bpt;
    auto result = compress(*request.prompt_text, budget, cc);
    const bool ok = result.success && result.output_tokens <= budget;
    if (ok) d.routed_input = result.output_tokens;
    d.compression = std::move(result);
    if (!ok) {
      d.reason = RouteReason::kIncompressible;
      return d;
    }
  } else {
    bool ok;
    if (config.compressibility >= 1.0) {
      ok = true;
    } else if (config.compressibility <= 0.0) {
      ok = false;
    } else {
      if (stream == nullptr) throw InvalidArgument("text-free compression draw needs a random stream");
      ok = stream->next() < config.compressibility;
    }
    if (!ok) {
      d.reason = RouteReason::kIncompressible;
      return d;
    }
    d.routed_input = budget;
  }
  d.pool = Pool::kShort;
  d.compressed = true;
  d.reason = RouteReason::kCompressedIntoShort;
  return d;
}

std::string decision_json_line(const RoutingDecision& decision) {
  nlohmann::json j;
  j["pool"] = to_string(decision.pool);
  j["compressed"] = decision.compressed;
  j["L_total"] = decision.estimated_total;
  j["reason"] = to_string(decision.reason);
  return j.dump();
}

}  // namespace fleetplan
