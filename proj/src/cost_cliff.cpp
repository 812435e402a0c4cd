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

#include "fleetplan/cost_cliff.hpp"

#include <cstdio>

#include <json.hpp>

#include "fleetplan/errors.hpp"

namespace fleetplan {

namespace {

constexpr double kBytesPerGiB = 1024.0 * 1024.0 * 1024.0;

}  // namespace

double slot_kv_bytes(Tokens context_window, double kv_bytes_per_token) {
  if (context_window < 1) throw InvalidArgument("context window must be >= 1 token");
  if (!(kv_bytes_per_token > 0.0)) throw InvalidArgument("KV bytes per token must be positive");
  return static_cast<double>(context_window) * kv_bytes_per_token;
}

double cliff_ratio(const PoolConfig& short_pool, const PoolConfig& long_pool) {
  if (short_pool.slots_per_gpu < 1 || long_pool.slots_per_gpu < 1) {
    throw InvalidArgument("pools need at least one slot per GPU");
  }
  return static_cast<double>(short_pool.slots_per_gpu) / static_cast<double>(long_pool.slots_per_gpu);
}

double pr_savings_estimate(double alpha, double rho) {
  if (rho < 1.0) throw InvalidArgument("cliff ratio must be >= 1");
  return alpha * (1.0 - 1.0 / rho);
}

std::vector<CliffRow> cliff_table(const GpuProfile& profile, Tokens boundary, Tokens long_context,
                                  const std::vector<Tokens>& request_sizes) {
  const PoolConfig short_pool = PoolConfig::for_context(profile, boundary);
  const PoolConfig long_pool = PoolConfig::for_context(profile, long_context);
  const double ratio = cliff_ratio(short_pool, long_pool);
  std::vector<CliffRow> rows;
  for (Tokens size : request_sizes) {
    if (size < 1) throw InvalidArgument("request size must be >= 1 token");
    if (size > long_context) throw InvalidArgument("request exceeds the long-pool context");
    const bool is_long = size > boundary;
    const PoolConfig& pool = is_long ? long_pool : short_pool;
    CliffRow row;
    row.total_tokens = size;
    row.long_pool = is_long;
    row.slots_per_gpu = pool.slots_per_gpu;
    const double slot = slot_kv_bytes(pool.context_window, profile.kv_bytes_per_token);
    row.kv_utilization = static_cast<double>(size) * profile.kv_bytes_per_token / slot;
    row.slot_gb = slot / kBytesPerGiB;
    row.cost_ratio = is_long ? ratio : 1.0;
    rows.push_back(row);
  }
  return rows;
}

std::string render_cliff_text(const std::vector<CliffRow>& rows) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-12s %-6s %10s %22s %10s\n", "L_total", "Pool", "Slots/GPU",
                "KV utilised", "Cost ratio");
  out += line;
  for (const auto& r : rows) {
    char kv[48];
    std::snprintf(kv, sizeof kv, "%.1f%% (%.1f GB/slot)", 100.0 * r.kv_utilization, r.slot_gb);
    std::snprintf(line, sizeof line, "%-12lld %-6s %10lld %22s %9.2fx\n",
                  static_cast<long long>(r.total_tokens), r.long_pool ? "long" : "short",
                  static_cast<long long>(r.slots_per_gpu), kv, r.cost_ratio);
    out += line;
  }
  return out;
}

std::string render_cliff_json(const std::vector<CliffRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"total_tokens", r.total_tokens},
                   {"pool", r.long_pool ? "long" : "short"},
                   {"slots_per_gpu", r.slots_per_gpu},
                   {"kv_utilization", r.kv_utilization},
                   {"slot_gb", r.slot_gb},
                   {"cost_ratio", r.cost_ratio}});
  }
  return arr.dump(2);
}

}  // namespace fleetplan
