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

#ifndef FLEETPLAN_REPORT_HPP_
#define FLEETPLAN_REPORT_HPP_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fleetplan/compressor.hpp"
#include "fleetplan/planner.hpp"
#include "fleetplan/simulator.hpp"

namespace fleetplan {

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

struct ReportContext {
  std::string config_hash;
  std::uint64_t seed = 0;
  double retrofit_gamma = 1.5;
};

nlohmann::json cell_json(const SweepCell& cell);
nlohmann::json plan_json(const PlannerInput& input, const FleetPlan& plan, const ReportContext& ctx);

// Method / n_s / n_l / total / annual cost / savings rows.
std::string plan_table_text(const PlannerInput& input, const FleetPlan& plan, const ReportContext& ctx);

nlohmann::json sim_json(const SimReport& report, double rho_ana, double error);
nlohmann::json compression_json(const CompressionResult& result);

}  // namespace fleetplan

#endif  // FLEETPLAN_REPORT_HPP_
