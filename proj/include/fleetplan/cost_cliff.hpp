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

#ifndef FLEETPLAN_COST_CLIFF_HPP_
#define FLEETPLAN_COST_CLIFF_HPP_

#include <string>
#include <vector>

#include "fleetplan/queueing.hpp"

namespace fleetplan {

double slot_kv_bytes(Tokens context_window, double kv_bytes_per_token);

// n_max(short) / n_max(long).
double cliff_ratio(const PoolConfig& short_pool, const PoolConfig& long_pool);

// alpha (1 - 1/rho). A heuristic from prior work, not an Erlang-C sizing.
double pr_savings_estimate(double alpha, double rho);

struct CliffRow {
  Tokens total_tokens = 0;
  bool long_pool = false;
  Tokens slots_per_gpu = 0;
  double kv_utilization = 0.0;  // of the slot's reserved KV memory
  double slot_gb = 0.0;
  double cost_ratio = 1.0;
};

// Rows for each request size: routed short when it fits in `boundary`,
// otherwise to the long pool.
std::vector<CliffRow> cliff_table(const GpuProfile& profile, Tokens boundary, Tokens long_context,
                                  const std::vector<Tokens>& request_sizes);

std::string render_cliff_text(const std::vector<CliffRow>& rows);
std::string render_cliff_json(const std::vector<CliffRow>& rows);

}  // namespace fleetplan

#endif  // FLEETPLAN_COST_CLIFF_HPP_
