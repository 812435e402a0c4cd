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

#ifndef FLEETPLAN_PLANNER_HPP_
#define FLEETPLAN_PLANNER_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fleetplan/queueing.hpp"
#include "fleetplan/workload.hpp"

namespace fleetplan {

inline constexpr double kHoursPerYear = 8760.0;

// {1.0, 1.1, ..., 2.0}
std::vector<double> default_gamma_grid();

struct PlannerInput {
  WorkloadSpec workload;
  GpuProfile profile;
  double slo_s = 0.5;
  double rho_max = 0.85;
  std::vector<double> gamma_grid = default_gamma_grid();
  // When absent, derived from the CDF by candidate_boundaries().
  std::optional<std::vector<Tokens>> candidate_boundaries;
  // Boundary of the plain pool-routing baseline. When absent, the cheapest
  // gamma = 1 cell of the sweep is used.
  std::optional<Tokens> pr_boundary;
  double cost_ratio = 1.0;  // c_l / c_s
  Tokens long_context = 65536;
  OutputModel output_model;
  std::size_t sample_size = 10000;
  std::uint64_t seed = 1;

  void validate() const;
  double short_cost_per_hour() const { return profile.gpu_cost_per_hour; }
  double long_cost_per_hour() const { return cost_ratio * profile.gpu_cost_per_hour; }
};

// Service-time moments plus the P99 prefill time of one pool's traffic.
struct PoolCalibration {
  ServiceStats stats;
  double prefill_p99_s = 0.0;
};

struct PoolPlan {
  std::int64_t gpus = 0;
  double arrival_rate = 0.0;
  Tokens context_window = 0;
  Tokens slots_per_gpu = 0;
  std::optional<ServiceStats> stats;
  double t_iter_s = 0.0;
  double prefill_p99_s = 0.0;
  double wait_budget_s = 0.0;
  double w99_s = 0.0;
  double utilization = 0.0;
  bool feasible = true;
  std::string infeasible_reason;
};

struct SweepCell {
  Tokens boundary = 0;
  double gamma = 1.0;
  double alpha = 0.0;
  double beta = 0.0;
  double alpha_prime = 0.0;
  PoolPlan short_pool;
  PoolPlan long_pool;
  double cost_usd_hr = 0.0;
  double cost_usd_yr = 0.0;
  bool feasible = false;

  std::int64_t n_short() const { return short_pool.gpus; }
  std::int64_t n_long() const { return long_pool.gpus; }
  std::int64_t total_gpus() const { return short_pool.gpus + long_pool.gpus; }
};

struct FleetPlan {
  SweepCell best;
  SweepCell pool_routing;
  std::vector<SweepCell> cells;
  std::vector<Tokens> boundaries;
  PoolPlan homogeneous;
  double homogeneous_cost_usd_yr = 0.0;
  double savings_fraction = 0.0;
  double cliff_ratio = 1.0;
  std::map<std::string, double> diagnostics;

  std::int64_t homogeneous_n() const { return homogeneous.gpus; }
  const SweepCell* find_cell(Tokens boundary, double gamma) const;
};

// Deciles rounded to multiples of 256 plus powers of two in [p10, p99],
// filtered to boundaries with at least twice the calibration slot count,
// at most 15 entries, ascending.
std::vector<Tokens> candidate_boundaries(const EmpiricalDistribution& dist,
                                         const GpuProfile& profile);

struct ArrivalSplit {
  double short_rate;
  double long_rate;
};

ArrivalSplit split_rates(double arrival_rate, double alpha, double beta, double compressibility);

// Sizes one pool from an existing calibration. lambda = 0 yields 0 GPUs.
PoolPlan plan_pool(const PoolCalibration& calibration, double arrival_rate, const PoolConfig& pool,
                   const GpuProfile& profile, double slo_s, double rho_max);

// Calibrates on the restricted distribution, then sizes the pool.
PoolPlan plan_pool(const EmpiricalDistribution& restricted, double arrival_rate,
                   const GpuProfile& profile, const PoolConfig& pool, double slo_s,
                   double rho_max, std::uint64_t seed, std::size_t sample_size = 10000,
                   const OutputModel& output_model = {});

// Evaluates every (boundary, gamma) cell and returns the cheapest feasible
// one. Throws InfeasibleError if no cell is feasible or the homogeneous
// baseline cannot meet the SLO.
FleetPlan sweep(const PlannerInput& input);

// One cell with the same calibration rules the sweep uses.
SweepCell evaluate_cell(const PlannerInput& input, Tokens boundary, double gamma);

PoolPlan plan_homogeneous_pool(const PlannerInput& input);
std::int64_t plan_homogeneous(const PlannerInput& input);

// beta * p_c * (1 - 1/rho)
double cr_incremental_estimate(double beta, double compressibility, double cliff_ratio);

struct SavingsReport {
  double pr_savings = 0.0;        // realized, plain routing vs homogeneous
  double best_savings = 0.0;      // realized, best cell vs homogeneous
  double pr_heuristic = 0.0;      // alpha (1 - 1/rho) at the PR boundary
  double cr_incremental_estimate = 0.0;
  double cr_incremental_realized = 0.0;
  double cliff_ratio = 1.0;       // at the best boundary
  double pr_cliff_ratio = 1.0;
};

SavingsReport savings_decomposition(const FleetPlan& plan, double compressibility);

struct FocTerms {
  double short_term = 0.0;  // c_s / (rho_max mu_gpu,s)
  double long_term = 0.0;   // c_l / (rho_max mu_gpu,l)
  double residual() const { return short_term > long_term ? short_term - long_term : long_term - short_term; }
};

FocTerms foc_terms(const PlannerInput& input, const SweepCell& cell);
double foc_residual(const PlannerInput& input, const SweepCell& cell);

struct RetrofitComparison {
  SweepCell retrofit;
  SweepCell codesign;
  double cost_retrofit = 0.0;
  double cost_codesign = 0.0;
};

RetrofitComparison codesign_vs_retrofit(const FleetPlan& plan, double gamma_fixed);
RetrofitComparison codesign_vs_retrofit(const PlannerInput& input, double gamma_fixed);

}  // namespace fleetplan

#endif  // FLEETPLAN_PLANNER_HPP_
