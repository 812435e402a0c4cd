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

#include "fleetplan/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>

#include "fleetplan/errors.hpp"

namespace fleetplan {

namespace {

// Arrival rates below this fraction of lambda are rounding noise.
constexpr double kRateEpsilon = 1e-9;

struct CalibrationSample {
  ServiceStats stats;
  std::vector<double> prefill_s;  // sorted ascending
};

CalibrationSample sample_pool(const EmpiricalDistribution& restricted, const GpuProfile& profile,
                              const PoolConfig& pool, const OutputModel& output_model,
                              std::size_t sample_size, std::uint64_t seed,
                              std::optional<Tokens> compress_to) {
  if (restricted.empty()) throw EmptyRestriction("calibration over an empty distribution");
  if (sample_size < 100) throw InvalidArgument("calibration needs at least 100 samples");
  const double t_iter_s = iter_latency_ms(profile, pool.slots_per_gpu) / 1000.0;
  UniformStream stream(seed);
  std::vector<double> service(sample_size);
  std::vector<double> prefill(sample_size);
  for (std::size_t i = 0; i < sample_size; ++i) {
    auto [in, out] = output_model.split(draw_total(restricted, stream));
    if (compress_to) in = std::max<Tokens>(1, std::min(in, *compress_to - out));
    service[i] = service_time_s(profile, pool, in, out);
    prefill[i] = static_cast<double>(prefill_chunks(profile, in)) * t_iter_s;
  }
  std::sort(prefill.begin(), prefill.end());
  return {stats_from_samples(service, pool.slots_per_gpu, seed), std::move(prefill)};
}

PoolCalibration single(const CalibrationSample& s) {
  return {s.stats, percentile(s.prefill_s, 0.99)};
}

// Moment-matched mixture of two calibrations, weighted by traffic share.
PoolCalibration mix(const CalibrationSample& a, double wa, const CalibrationSample& b, double wb) {
  const double total = wa + wb;
  const double pa = wa / total;
  const double pb = wb / total;
  const double mean = pa * a.stats.mean_service_s + pb * b.stats.mean_service_s;
  const double second = pa * a.stats.second_moment() + pb * b.stats.second_moment();

  ServiceStats stats = a.stats;
  stats.mean_service_s = mean;
  stats.var_service_s2 = std::max(0.0, second - mean * mean);
  stats.scv = stats.var_service_s2 / (mean * mean);
  stats.slot_rate = 1.0 / mean;
  stats.gpu_rate = static_cast<double>(stats.slots_per_gpu) / mean;
  stats.sample_size = a.stats.sample_size + b.stats.sample_size;

  // Weighted nearest-rank P99 over the merged samples.
  const double wa_each = pa / static_cast<double>(a.prefill_s.size());
  const double wb_each = pb / static_cast<double>(b.prefill_s.size());
  std::size_t i = 0, j = 0;
  double cumulative = 0.0;
  double p99 = 0.0;
  while (i < a.prefill_s.size() || j < b.prefill_s.size()) {
    const bool take_a = j >= b.prefill_s.size() ||
                        (i < a.prefill_s.size() && a.prefill_s[i] <= b.prefill_s[j]);
    if (take_a) {
      p99 = a.prefill_s[i++];
      cumulative += wa_each;
    } else {
      p99 = b.prefill_s[j++];
      cumulative += wb_each;
    }
    if (cumulative >= 0.99 - 1e-12) break;
  }
  return {stats, p99};
}

Tokens band_top(Tokens boundary, double gamma) {
  return static_cast<Tokens>(std::floor(gamma * static_cast<double>(boundary) + 1e-9));
}

// Memoized calibrations for one sweep. All draws share the input seed, so
// nested restrictions see common random numbers.
class Evaluator {
 public:
  explicit Evaluator(const PlannerInput& input)
      : input_(input),
        dist_(input.workload.distribution),
        long_pool_(PoolConfig::for_context(input.profile, input.long_context,
                                           input.long_cost_per_hour())) {}

  SweepCell evaluate(Tokens boundary, double gamma) {
    const PoolConfig short_pool =
        PoolConfig::for_context(input_.profile, boundary, input_.short_cost_per_hour());
    const Tokens top = band_top(boundary, gamma);
    const double lambda = input_.workload.arrival_rate;
    const double p_c = input_.workload.compressibility;

    SweepCell cell;
    cell.boundary = boundary;
    cell.gamma = gamma;
    const auto fr = borderline_fraction(dist_, static_cast<double>(boundary), gamma);
    cell.alpha = fr.alpha;
    cell.beta = fr.beta;
    cell.alpha_prime = std::min(1.0, fr.alpha + fr.beta * p_c);
    const auto rates = split_rates(lambda, fr.alpha, fr.beta, p_c);
    const double compressed_share = fr.beta * p_c;

    // Short pool: plain traffic in [1, B] plus compressed band traffic.
    if (rates.short_rate > kRateEpsilon * lambda) {
      const bool has_plain = fr.alpha > 0.0;
      const bool has_band = compressed_share > 0.0;
      PoolCalibration cal;
      if (has_plain && has_band) {
        cal = mix(plain(boundary, short_pool), fr.alpha, compressed(boundary, top, short_pool),
                  compressed_share);
      } else if (has_plain) {
        cal = single(plain(boundary, short_pool));
      } else {
        cal = single(compressed(boundary, top, short_pool));
      }
      cell.short_pool = plan_pool(cal, rates.short_rate, short_pool, input_.profile, input_.slo_s,
                                  input_.rho_max);
    } else {
      cell.short_pool = empty_plan(short_pool);
    }

    // Long pool: the hardened tail above gamma * B. When the band reaches
    // past the support but uncompressed band traffic remains, the tail's
    // limit (the largest support point) stands in for it.
    if (rates.long_rate > kRateEpsilon * lambda) {
      const Tokens lower = dist_.mass(static_cast<double>(top), kInf) > 0.0
                               ? top
                               : dist_.support_max() - 1;
      const CalibrationSample& sample = tail(lower);
      cell.long_pool = plan_pool(single(sample), rates.long_rate, long_pool_, input_.profile,
                                 input_.slo_s, input_.rho_max);
    } else {
      cell.long_pool = empty_plan(long_pool_);
    }

    cell.feasible = cell.short_pool.feasible && cell.long_pool.feasible;
    cell.cost_usd_hr = input_.short_cost_per_hour() * static_cast<double>(cell.short_pool.gpus) +
                       input_.long_cost_per_hour() * static_cast<double>(cell.long_pool.gpus);
    cell.cost_usd_yr = cell.cost_usd_hr * kHoursPerYear;
    return cell;
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  PoolPlan empty_plan(const PoolConfig& pool) const {
    PoolPlan plan;
    plan.context_window = pool.context_window;
    plan.slots_per_gpu = pool.slots_per_gpu;
    plan.t_iter_s = iter_latency_ms(input_.profile, pool.slots_per_gpu) / 1000.0;
    return plan;
  }

  const CalibrationSample& plain(Tokens boundary, const PoolConfig& pool) {
    auto it = plain_.find(boundary);
    if (it == plain_.end()) {
      it = plain_.emplace(boundary, sample_pool(dist_.restrict_to(0.0, static_cast<double>(boundary)),
                                                input_.profile, pool, input_.output_model,
                                                input_.sample_size, input_.seed, std::nullopt))
               .first;
    }
    return it->second;
  }

  const CalibrationSample& compressed(Tokens boundary, Tokens top, const PoolConfig& pool) {
    const auto key = std::make_pair(boundary, top);
    auto it = compressed_.find(key);
    if (it == compressed_.end()) {
      it = compressed_
               .emplace(key, sample_pool(dist_.restrict_to(static_cast<double>(boundary),
                                                           static_cast<double>(top)),
                                         input_.profile, pool, input_.output_model,
                                         input_.sample_size, input_.seed, boundary))
               .first;
    }
    return it->second;
  }

  const CalibrationSample& tail(Tokens lower) {
    auto it = tail_.find(lower);
    if (it == tail_.end()) {
      it = tail_.emplace(lower, sample_pool(dist_.restrict_to(static_cast<double>(lower), kInf),
                                            input_.profile, long_pool_, input_.output_model,
                                            input_.sample_size, input_.seed, std::nullopt))
               .first;
    }
    return it->second;
  }

  const PlannerInput& input_;
  const EmpiricalDistribution& dist_;
  PoolConfig long_pool_;
  std::map<Tokens, CalibrationSample> plain_;
  std::map<std::pair<Tokens, Tokens>, CalibrationSample> compressed_;
  std::map<Tokens, CalibrationSample> tail_;
};

bool cheaper(const SweepCell& a, const SweepCell& b) {
  return a.cost_usd_hr < b.cost_usd_hr - 1e-9 * std::max(1.0, b.cost_usd_hr);
}

}  // namespace

std::vector<double> default_gamma_grid() {
  std::vector<double> grid;
  for (int i = 10; i <= 20; ++i) grid.push_back(i / 10.0);
  return grid;
}

void PlannerInput::validate() const {
  workload.validate();
  profile.validate();
  if (!(slo_s > 0.0)) throw InvalidArgument("SLO must be positive");
  if (!(rho_max > 0.0 && rho_max < 1.0)) throw InvalidArgument("rho_max must lie in (0, 1)");
  if (gamma_grid.empty()) throw InvalidArgument("gamma grid is empty");
  for (std::size_t i = 0; i < gamma_grid.size(); ++i) {
    if (gamma_grid[i] < 1.0 - 1e-12 || gamma_grid[i] > 2.0 + 1e-12) {
      throw InvalidArgument("gamma values must lie in [1, 2]");
    }
    if (i > 0 && !(gamma_grid[i] > gamma_grid[i - 1])) {
      throw InvalidArgument("gamma grid must be strictly ascending");
    }
  }
  if (!(cost_ratio > 0.0)) throw InvalidArgument("cost ratio must be positive");
  if (long_context < 1) throw InvalidArgument("long context must be >= 1");
  if (sample_size < 100) throw InvalidArgument("sample size must be >= 100");
  if (candidate_boundaries) {
    for (Tokens b : *candidate_boundaries) {
      if (b < 1 || b >= long_context) throw InvalidArgument("candidate boundary out of range");
    }
  }
  if (pr_boundary && (*pr_boundary < 1 || *pr_boundary >= long_context)) {
    throw InvalidArgument("PR boundary out of range");
  }
}

const SweepCell* FleetPlan::find_cell(Tokens boundary, double gamma) const {
  for (const auto& cell : cells) {
    if (cell.boundary == boundary && std::abs(cell.gamma - gamma) < 1e-9) return &cell;
  }
  return nullptr;
}

std::vector<Tokens> candidate_boundaries(const EmpiricalDistribution& dist,
                                         const GpuProfile& profile) {
  if (dist.empty()) throw InvalidArgument("candidate boundaries of an empty distribution");
  std::set<Tokens> raw;
  for (int d = 1; d <= 9; ++d) {
    const auto q = static_cast<double>(dist.quantile(d / 10.0));
    raw.insert(static_cast<Tokens>(std::llround(q / 256.0)) * 256);
  }
  const Tokens p10 = dist.quantile(0.10);
  const Tokens p99 = dist.quantile(0.99);
  for (Tokens p = 1; p <= p99; p *= 2) {
    if (p >= p10) raw.insert(p);
  }

  const Tokens budget = profile.calib_slots * profile.calib_context;
  std::vector<Tokens> valid;
  for (Tokens b : raw) {
    if (b >= 1 && budget / b >= 2 * profile.calib_slots) valid.push_back(b);
  }
  if (valid.empty()) {
    // Degenerate tails: fall back to the largest admissible power of two.
    Tokens b = 1;
    while (budget / (2 * b) >= 2 * profile.calib_slots) b *= 2;
    valid.push_back(b);
  }
  constexpr std::size_t kMaxCandidates = 15;
  if (valid.size() <= kMaxCandidates) return valid;
  std::vector<Tokens> picked;
  for (std::size_t i = 0; i < kMaxCandidates; ++i) {
    picked.push_back(valid[i * (valid.size() - 1) / (kMaxCandidates - 1)]);
  }
  return picked;
}

ArrivalSplit split_rates(double arrival_rate, double alpha, double beta, double compressibility) {
  if (alpha + beta > 1.0 + 1e-9) throw InvalidArgument("alpha + beta exceeds 1");
  const double short_rate = std::min(1.0, alpha + beta * compressibility) * arrival_rate;
  return {short_rate, std::max(0.0, arrival_rate - short_rate)};
}

PoolPlan plan_pool(const PoolCalibration& calibration, double arrival_rate, const PoolConfig& pool,
                   const GpuProfile& profile, double slo_s, double rho_max) {
  PoolPlan plan;
  plan.arrival_rate = arrival_rate;
  plan.context_window = pool.context_window;
  plan.slots_per_gpu = pool.slots_per_gpu;
  plan.t_iter_s = iter_latency_ms(profile, pool.slots_per_gpu) / 1000.0;
  if (arrival_rate <= 0.0) return plan;

  plan.stats = calibration.stats;
  plan.prefill_p99_s = calibration.prefill_p99_s;
  plan.wait_budget_s = effective_slo_s(slo_s, plan.prefill_p99_s, plan.t_iter_s);
  try {
    plan.gpus = invert_min_servers(arrival_rate, calibration.stats, plan.wait_budget_s, rho_max);
    plan.utilization = utilization(plan.gpus, arrival_rate, calibration.stats.gpu_rate);
    plan.w99_s = w99_kimura(plan.gpus * pool.slots_per_gpu, calibration.stats.slot_rate,
                            arrival_rate, calibration.stats.scv);
  } catch (const InfeasibleError& e) {
    plan.feasible = false;
    plan.infeasible_reason = e.what();
  }
  return plan;
}

PoolPlan plan_pool(const EmpiricalDistribution& restricted, double arrival_rate,
                   const GpuProfile& profile, const PoolConfig& pool, double slo_s,
                   double rho_max, std::uint64_t seed, std::size_t sample_size,
                   const OutputModel& output_model) {
  if (arrival_rate <= 0.0) return plan_pool(PoolCalibration{}, 0.0, pool, profile, slo_s, rho_max);
  const auto sample =
      sample_pool(restricted, profile, pool, output_model, sample_size, seed, std::nullopt);
  return plan_pool(single(sample), arrival_rate, pool, profile, slo_s, rho_max);
}

SweepCell evaluate_cell(const PlannerInput& input, Tokens boundary, double gamma) {
  input.validate();
  Evaluator evaluator(input);
  return evaluator.evaluate(boundary, gamma);
}

PoolPlan plan_homogeneous_pool(const PlannerInput& input) {
  const PoolConfig pool =
      PoolConfig::for_context(input.profile, input.long_context, input.long_cost_per_hour());
  return plan_pool(input.workload.distribution, input.workload.arrival_rate, input.profile, pool,
                   input.slo_s, input.rho_max, input.seed, input.sample_size,
                   input.output_model);
}

std::int64_t plan_homogeneous(const PlannerInput& input) {
  input.validate();
  const PoolPlan plan = plan_homogeneous_pool(input);
  if (!plan.feasible) throw InfeasibleError("homogeneous fleet: " + plan.infeasible_reason);
  return plan.gpus;
}

FleetPlan sweep(const PlannerInput& input) {
  input.validate();
  FleetPlan plan;
  plan.boundaries = input.candidate_boundaries
                        ? *input.candidate_boundaries
                        : candidate_boundaries(input.workload.distribution, input.profile);
  if (input.pr_boundary) plan.boundaries.push_back(*input.pr_boundary);
  std::sort(plan.boundaries.begin(), plan.boundaries.end());
  plan.boundaries.erase(std::unique(plan.boundaries.begin(), plan.boundaries.end()),
                        plan.boundaries.end());
  if (plan.boundaries.empty()) throw InvalidArgument("no candidate boundaries");

  Evaluator evaluator(input);
  const SweepCell* best = nullptr;
  const SweepCell* best_plain = nullptr;
  plan.cells.reserve(plan.boundaries.size() * input.gamma_grid.size());
  for (Tokens boundary : plan.boundaries) {
    for (double gamma : input.gamma_grid) {
      plan.cells.push_back(evaluator.evaluate(boundary, gamma));
    }
  }
  for (const auto& cell : plan.cells) {
    if (!cell.feasible) continue;
    if (best == nullptr || cheaper(cell, *best)) best = &cell;
    if (std::abs(cell.gamma - 1.0) < 1e-9 && (best_plain == nullptr || cheaper(cell, *best_plain))) {
      best_plain = &cell;
    }
  }
  if (best == nullptr) throw InfeasibleError("no (B, gamma) cell meets the SLO");
  plan.best = *best;

  if (input.pr_boundary) {
    const SweepCell* pr = plan.find_cell(*input.pr_boundary, 1.0);
    plan.pool_routing = pr ? *pr : evaluator.evaluate(*input.pr_boundary, 1.0);
  } else if (best_plain != nullptr) {
    plan.pool_routing = *best_plain;
  } else {
    plan.pool_routing = evaluator.evaluate(plan.boundaries.front(), 1.0);
  }

  plan.homogeneous = plan_homogeneous_pool(input);
  if (!plan.homogeneous.feasible) {
    throw InfeasibleError("homogeneous fleet: " + plan.homogeneous.infeasible_reason);
  }
  plan.homogeneous_cost_usd_yr = input.long_cost_per_hour() *
                                 static_cast<double>(plan.homogeneous.gpus) * kHoursPerYear;
  plan.savings_fraction = 1.0 - plan.best.cost_usd_yr / plan.homogeneous_cost_usd_yr;
  plan.cliff_ratio = static_cast<double>(plan.best.short_pool.slots_per_gpu) /
                     static_cast<double>(plan.best.long_pool.slots_per_gpu);

  const FocTerms foc = foc_terms(input, plan.best);
  plan.diagnostics["foc_residual"] = foc.residual();
  plan.diagnostics["foc_short_term"] = foc.short_term;
  plan.diagnostics["foc_long_term"] = foc.long_term;
  plan.diagnostics["cells_evaluated"] = static_cast<double>(plan.cells.size());
  plan.diagnostics["pr_savings"] =
      plan.pool_routing.feasible ? 1.0 - plan.pool_routing.cost_usd_yr / plan.homogeneous_cost_usd_yr
                                 : std::numeric_limits<double>::quiet_NaN();
  return plan;
}

double cr_incremental_estimate(double beta, double compressibility, double cliff_ratio) {
  if (cliff_ratio < 1.0) throw InvalidArgument("cliff ratio must be >= 1");
  return beta * compressibility * (1.0 - 1.0 / cliff_ratio);
}

SavingsReport savings_decomposition(const FleetPlan& plan, double compressibility) {
  SavingsReport r;
  const double homog = plan.homogeneous_cost_usd_yr;
  r.pr_savings = 1.0 - plan.pool_routing.cost_usd_yr / homog;
  r.best_savings = 1.0 - plan.best.cost_usd_yr / homog;
  r.cliff_ratio = static_cast<double>(plan.best.short_pool.slots_per_gpu) /
                  static_cast<double>(plan.best.long_pool.slots_per_gpu);
  r.pr_cliff_ratio = static_cast<double>(plan.pool_routing.short_pool.slots_per_gpu) /
                     static_cast<double>(plan.pool_routing.long_pool.slots_per_gpu);
  r.pr_heuristic = plan.pool_routing.alpha * (1.0 - 1.0 / r.pr_cliff_ratio);
  r.cr_incremental_estimate = cr_incremental_estimate(plan.best.beta, compressibility, r.cliff_ratio);
  r.cr_incremental_realized = r.best_savings - r.pr_savings;
  return r;
}

FocTerms foc_terms(const PlannerInput& input, const SweepCell& cell) {
  FocTerms t;
  if (cell.short_pool.stats) {
    t.short_term = input.short_cost_per_hour() / (input.rho_max * cell.short_pool.stats->gpu_rate);
  }
  if (cell.long_pool.stats) {
    t.long_term = input.long_cost_per_hour() / (input.rho_max * cell.long_pool.stats->gpu_rate);
  }
  return t;
}

double foc_residual(const PlannerInput& input, const SweepCell& cell) {
  return foc_terms(input, cell).residual();
}

RetrofitComparison codesign_vs_retrofit(const FleetPlan& plan, double gamma_fixed) {
  const SweepCell* retro = plan.find_cell(plan.pool_routing.boundary, gamma_fixed);
  if (retro == nullptr) throw InvalidArgument("gamma_fixed is not on the sweep grid");
  RetrofitComparison cmp;
  cmp.retrofit = *retro;
  cmp.codesign = plan.best;
  cmp.cost_retrofit = retro->feasible ? retro->cost_usd_yr : std::numeric_limits<double>::infinity();
  cmp.cost_codesign = plan.best.cost_usd_yr;
  return cmp;
}

RetrofitComparison codesign_vs_retrofit(const PlannerInput& input, double gamma_fixed) {
  return codesign_vs_retrofit(sweep(input), gamma_fixed);
}

}  // namespace fleetplan
