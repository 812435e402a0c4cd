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

#ifndef FLEETPLAN_SIMULATOR_HPP_
#define FLEETPLAN_SIMULATOR_HPP_

#include <optional>
#include <string>
#include <vector>

#include "fleetplan/planner.hpp"
#include "fleetplan/queueing.hpp"
#include "fleetplan/workload.hpp"

namespace fleetplan {

enum class ServiceModel { kLockstepFull, kOccupancyDependent };

struct SimConfig {
  std::uint64_t seed = 1;
  std::size_t requests_per_pool = 30000;
  // Share of the earliest measured completions left out of TTFT statistics.
  double warmup_fraction = 0.1;
  ServiceModel service_model = ServiceModel::kLockstepFull;
  bool allow_unstable = false;
  // Stop at this simulated time instead of draining the system.
  std::optional<double> horizon_s;
  OutputModel output_model;

  void validate() const;
};

// One traffic source of a pool. Requests from a component with compress_to
// are admitted with L_in = min(L_in, compress_to - L_out).
struct PoolComponent {
  EmpiricalDistribution distribution;
  double weight = 1.0;
  std::optional<Tokens> compress_to;
};

struct PoolSpec {
  std::string name;
  std::vector<PoolComponent> components;
  double arrival_rate = 0.0;
  std::int64_t gpus = 1;
  PoolConfig pool;
};

struct SimReport {
  std::string pool;
  std::int64_t n_gpus = 0;
  double arrival_rate = 0.0;
  double measured_utilization = 0.0;  // rho-hat
  double ttft_p50_s = 0.0;
  double ttft_p99_s = 0.0;
  double mean_queue_wait_s = 0.0;
  double mean_sojourn_s = 0.0;
  double mean_in_system = 0.0;
  std::size_t arrivals = 0;
  std::size_t admitted = 0;
  std::size_t completed = 0;
  std::size_t in_flight = 0;
  std::size_t queued = 0;
  std::size_t work_conservation_violations = 0;
  double window_s = 0.0;
};

// Simulates one pool as a FIFO queue in front of gpus * slots_per_gpu slots.
// Arrivals start with an empty system; a warm-up period as long as the
// largest possible service time precedes the measured arrivals, after which
// an uncongested pool is exactly stationary.
SimReport simulate_pool(const PoolSpec& spec, const GpuProfile& profile, const SimConfig& config);

std::vector<SimReport> run_des(const std::vector<PoolSpec>& pools, const GpuProfile& profile,
                               const SimConfig& config);

// (lambda / (n mu_gpu) - rho_hat) / rho_hat
double compare_to_analytic(const SimReport& report, std::int64_t gpus, double arrival_rate,
                           const ServiceStats& stats);

// Short and long pool traffic of a planned cell. Uncompressed band traffic
// joins the long pool.
std::vector<PoolSpec> pool_specs_for_cell(const PlannerInput& input, const SweepCell& cell);

}  // namespace fleetplan

#endif  // FLEETPLAN_SIMULATOR_HPP_
