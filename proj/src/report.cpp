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

#include "fleetplan/report.hpp"

#include <cmath>
#include <cstdio>

namespace fleetplan {

namespace {

nlohmann::json pool_json(const PoolPlan& p) {
  nlohmann::json j = {{"gpus", p.gpus},
                      {"arrival_rate", p.arrival_rate},
                      {"context_window", p.context_window},
                      {"slots_per_gpu", p.slots_per_gpu},
                      {"t_iter_s", p.t_iter_s},
                      {"prefill_p99_s", p.prefill_p99_s},
                      {"wait_budget_s", p.wait_budget_s},
                      {"w99_s", p.w99_s},
                      {"utilization", p.utilization},
                      {"feasible", p.feasible}};
  if (p.stats) {
    j["mean_service_s"] = p.stats->mean_service_s;
    j["scv"] = p.stats->scv;
    j["gpu_rate"] = p.stats->gpu_rate;
  }
  if (!p.feasible) j["infeasible_reason"] = p.infeasible_reason;
  return j;
}

std::string row(const char* method, std::int64_t ns, std::int64_t nl, double cost, double savings) {
  char line[160];
  std::snprintf(line, sizeof line, "%-32s %8lld %8lld %8lld %16.0f %8.1f%%\n", method,
                static_cast<long long>(ns), static_cast<long long>(nl),
                static_cast<long long>(ns + nl), cost, 100.0 * savings);
  return line;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

nlohmann::json cell_json(const SweepCell& c) {
  return {{"B", c.boundary},
          {"gamma", c.gamma},
          {"alpha", c.alpha},
          {"beta", c.beta},
          {"alpha_prime", c.alpha_prime},
          {"n_s", c.n_short()},
          {"n_l", c.n_long()},
          {"cost_usd_yr", c.cost_usd_yr},
          {"feasible", c.feasible},
          {"short_pool", pool_json(c.short_pool)},
          {"long_pool", pool_json(c.long_pool)}};
}

nlohmann::json plan_json(const PlannerInput& input, const FleetPlan& plan, const ReportContext& ctx) {
  const double homog = plan.homogeneous_cost_usd_yr;
  nlohmann::json best = cell_json(plan.best);
  best["savings"] = plan.savings_fraction;

  nlohmann::json pr = cell_json(plan.pool_routing);
  pr["savings"] = 1.0 - plan.pool_routing.cost_usd_yr / homog;

  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : plan.cells) cells.push_back(cell_json(c));

  nlohmann::json j;
  j["best"] = best;
  j["pool_routing"] = pr;
  if (const SweepCell* retro = plan.find_cell(plan.pool_routing.boundary, ctx.retrofit_gamma)) {
    nlohmann::json r = cell_json(*retro);
    r["savings"] = retro->feasible ? 1.0 - retro->cost_usd_yr / homog : std::nan("");
    j["retrofit"] = r;
  }
  j["cells"] = cells;
  j["homogeneous"] = {{"n", plan.homogeneous_n()},
                      {"cost_usd_yr", homog},
                      {"pool", pool_json(plan.homogeneous)}};
  nlohmann::json diag = plan.diagnostics;
  const SavingsReport s = savings_decomposition(plan, input.workload.compressibility);
  diag["cliff_ratio"] = plan.cliff_ratio;
  diag["pr_savings"] = s.pr_savings;
  diag["pr_heuristic_alpha_times_1_minus_inv_rho"] = s.pr_heuristic;
  diag["cr_incremental_estimate"] = s.cr_incremental_estimate;
  diag["cr_incremental_realized"] = s.cr_incremental_realized;
  j["diagnostics"] = diag;
  j["boundaries"] = plan.boundaries;
  j["config"] = {{"hash", ctx.config_hash},
                 {"seed", ctx.seed},
                 {"slo_s", input.slo_s},
                 {"rho_max", input.rho_max},
                 {"lambda", input.workload.arrival_rate},
                 {"compressibility", input.workload.compressibility},
                 {"gamma_grid", input.gamma_grid},
                 {"cost_ratio", input.cost_ratio},
                 {"sample_size", input.sample_size}};
  return j;
}

std::string plan_table_text(const PlannerInput& input, const FleetPlan& plan, const ReportContext& ctx) {
  const double homog = plan.homogeneous_cost_usd_yr;
  std::string out;
  char line[200];
  std::snprintf(line, sizeof line, "%-32s %8s %8s %8s %16s %9s\n", "Method", "n_s", "n_l", "Total",
                "Annual cost ($)", "Savings");
  out += line;
  out += row("Homogeneous", 0, plan.homogeneous_n(), homog, 0.0);
  std::snprintf(line, sizeof line, "Pool routing (B=%lld)", static_cast<long long>(plan.pool_routing.boundary));
  out += row(line, plan.pool_routing.n_short(), plan.pool_routing.n_long(), plan.pool_routing.cost_usd_yr,
             1.0 - plan.pool_routing.cost_usd_yr / homog);
  if (const SweepCell* retro = plan.find_cell(plan.pool_routing.boundary, ctx.retrofit_gamma)) {
    std::snprintf(line, sizeof line, "Retrofit (gamma=%.1f)", ctx.retrofit_gamma);
    if (retro->feasible) {
      out += row(line, retro->n_short(), retro->n_long(), retro->cost_usd_yr, 1.0 - retro->cost_usd_yr / homog);
    } else {
      out += std::string(line) + "  infeasible\n";
    }
  }
  char label[64];
  std::snprintf(label, sizeof label, "Co-design (B=%lld, gamma=%.1f)",
                static_cast<long long>(plan.best.boundary), plan.best.gamma);
  out += row(label, plan.best.n_short(), plan.best.n_long(), plan.best.cost_usd_yr, plan.savings_fraction);
  std::snprintf(line, sizeof line, "\nlambda=%g req/s  SLO=%g ms  rho_max=%g  config=%s  seed=%llu\n",
                input.workload.arrival_rate, input.slo_s * 1000.0, input.rho_max, ctx.config_hash.c_str(),
                static_cast<unsigned long long>(ctx.seed));
  out += line;
  return out;
}

nlohmann::json sim_json(const SimReport& r, double rho_ana, double error) {
  return {{"pool", r.pool},
          {"n_gpus", r.n_gpus},
          {"rho_ana", rho_ana},
          {"rho_hat", r.measured_utilization},
          {"error", error},
          {"ttft_p50_ms", 1000.0 * r.ttft_p50_s},
          {"ttft_p99_ms", 1000.0 * r.ttft_p99_s},
          {"mean_queue_wait_ms", 1000.0 * r.mean_queue_wait_s},
          {"completed", r.completed}};
}

nlohmann::json compression_json(const CompressionResult& r) {
  nlohmann::json j = {{"kept_indices", r.kept_indices},
                      {"unit_count", r.unit_count},
                      {"input_tokens", r.input_tokens},
                      {"output_tokens", r.output_tokens},
                      {"reduction", r.reduction},
                      {"success", r.success},
                      {"elapsed_ms", r.elapsed_ms},
                      {"output_text", r.output_text}};
  if (r.fidelity) {
    j["fidelity"] = {{"rouge_l_recall", r.fidelity->rouge_l_recall},
                     {"tfidf_cosine", r.fidelity->tfidf_cosine}};
  }
  return j;
}

}  // namespace fleetplan
