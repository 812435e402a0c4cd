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

#include "fleetplan/cli.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fleetplan/compressor.hpp"
#include "fleetplan/cost_cliff.hpp"
#include "fleetplan/errors.hpp"
#include "fleetplan/planner.hpp"
#include "fleetplan/report.hpp"
#include "fleetplan/router.hpp"
#include "fleetplan/simulator.hpp"
#include "fleetplan/text.hpp"

namespace fleetplan {

namespace {

using nlohmann::json;

// Raised after a report is written when a validation threshold is missed.
class ToleranceFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WorkloadOptions {
  std::string config_path;
  std::string trace;
  std::string anchors;
  double lambda = 1000.0;
  double compressibility = 1.0;
  double slo_ms = 500.0;
  double rho_max = 0.85;
  std::string gamma_grid;
  std::uint64_t seed = 1;
  std::string out;
  Tokens pr_boundary = 0;
  double cost_ratio = 1.0;
  double gpu_cost = 2.21;
  std::size_t samples = 10000;
  double output_fraction = 0.25;
  double retrofit_gamma = 1.5;
};

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw InvalidArgument("not a number: '" + item + "'");
    }
    if (used != item.size()) throw InvalidArgument("not a number: '" + item + "'");
    values.push_back(v);
  }
  if (values.empty()) throw InvalidArgument("empty list");
  return values;
}

// Options on the command line win over the JSON config file.
void apply_config_file(CLI::App& cmd, WorkloadOptions& o) {
  if (o.config_path.empty()) return;
  std::ifstream in(o.config_path);
  if (!in) throw InputError("cannot read config file " + o.config_path);
  const json cfg = json::parse(in, nullptr, false);
  if (cfg.is_discarded() || !cfg.is_object()) throw InputError("config file is not a JSON object");
  auto unset = [&](const char* flag) { return cmd.count(flag) == 0; };
  auto take = [&](const char* key, const char* flag, auto& field) {
    if (cfg.contains(key) && unset(flag)) field = cfg.at(key).get<std::decay_t<decltype(field)>>();
  };
  take("trace", "--trace", o.trace);
  take("anchors", "--anchors", o.anchors);
  take("lambda", "--lambda", o.lambda);
  take("compressibility", "--compressibility", o.compressibility);
  take("slo_ms", "--slo-ms", o.slo_ms);
  take("rho_max", "--rho-max", o.rho_max);
  take("seed", "--seed", o.seed);
  take("pr_boundary", "--boundary", o.pr_boundary);
  take("cost_ratio", "--cost-ratio", o.cost_ratio);
  take("gpu_cost_per_hour", "--gpu-cost", o.gpu_cost);
  take("sample_size", "--samples", o.samples);
  take("output_fraction", "--output-fraction", o.output_fraction);
  if (cfg.contains("gamma_grid") && unset("--gamma-grid")) {
    const auto& g = cfg.at("gamma_grid");
    if (g.is_string()) {
      o.gamma_grid = g.get<std::string>();
    } else {
      std::string joined;
      for (const auto& v : g) joined += std::to_string(v.get<double>()) + ",";
      o.gamma_grid = joined;
    }
  }
}

void add_workload_options(CLI::App& cmd, WorkloadOptions& o) {
  cmd.add_option("--config", o.config_path, "JSON config file (flags override)");
  cmd.add_option("--trace", o.trace, "Request trace (.jsonl or .csv)");
  cmd.add_option("--anchors", o.anchors, "Percentile anchor file (JSON)");
  cmd.add_option("--lambda", o.lambda, "Arrival rate, req/s");
  cmd.add_option("--compressibility", o.compressibility, "Borderline compressibility p_c");
  cmd.add_option("--slo-ms", o.slo_ms, "P99 TTFT target, ms");
  cmd.add_option("--rho-max", o.rho_max, "Utilization cap");
  cmd.add_option("--gamma-grid", o.gamma_grid, "Comma-separated gamma values");
  cmd.add_option("--seed", o.seed, "Calibration and simulation seed")->envname("FLEETOPT_SEED");
  cmd.add_option("--out", o.out, "Output file");
  cmd.add_option("--boundary", o.pr_boundary, "Pool-routing boundary B (tokens)");
  cmd.add_option("--cost-ratio", o.cost_ratio, "Long/short GPU cost ratio");
  cmd.add_option("--gpu-cost", o.gpu_cost, "Short-pool GPU cost, $/hr");
  cmd.add_option("--samples", o.samples, "Monte-Carlo calibration samples");
  cmd.add_option("--output-fraction", o.output_fraction, "L_out as a fraction of L_total");
}

struct ResolvedWorkload {
  PlannerInput input;
  std::string config_hash;
};

ResolvedWorkload resolve(const WorkloadOptions& o) {
  if (o.trace.empty() == o.anchors.empty()) {
    throw InvalidArgument("exactly one workload source is required: --trace or --anchors");
  }
  if (!(o.lambda > 0.0)) throw InvalidArgument("--lambda must be positive");
  if (!(o.slo_ms > 0.0)) throw InvalidArgument("--slo-ms must be positive");
  if (!(o.gpu_cost > 0.0)) throw InvalidArgument("--gpu-cost must be positive");

  ResolvedWorkload r;
  PlannerInput& in = r.input;
  in.output_model.output_fraction = o.output_fraction;
  if (!o.trace.empty()) {
    const auto loaded = load_trace(o.trace, trace_format_for(o.trace));
    in.workload.distribution = build_cdf(loaded.records);
    std::map<Category, double> mix;
    for (const auto& rec : loaded.records) mix[rec.category] += 1.0;
    for (auto& [k, v] : mix) v /= static_cast<double>(loaded.records.size());
    in.workload.category_mix = mix;
  } else {
    const AnchorFile file = load_anchor_file(o.anchors);
    SynthOptions so;
    so.mean_tokens = file.mean_tokens;
    if (file.sample_count) so.sample_count = *file.sample_count;
    in.workload.distribution = synth_distribution(file.anchors, file.seed, so);
  }
  in.workload.arrival_rate = o.lambda;
  in.workload.compressibility = o.compressibility;
  in.slo_s = o.slo_ms / 1000.0;
  in.rho_max = o.rho_max;
  if (!o.gamma_grid.empty()) in.gamma_grid = parse_list(o.gamma_grid);
  in.seed = o.seed;
  if (o.pr_boundary > 0) in.pr_boundary = o.pr_boundary;
  in.cost_ratio = o.cost_ratio;
  in.profile.gpu_cost_per_hour = o.gpu_cost;
  in.sample_size = o.samples;
  in.validate();

  const json canonical = {{"trace", o.trace},       {"anchors", o.anchors},
                          {"lambda", o.lambda},     {"compressibility", o.compressibility},
                          {"slo_ms", o.slo_ms},     {"rho_max", o.rho_max},
                          {"gamma_grid", in.gamma_grid}, {"seed", o.seed},
                          {"pr_boundary", o.pr_boundary}, {"cost_ratio", o.cost_ratio},
                          {"gpu_cost", o.gpu_cost}, {"samples", o.samples},
                          {"output_fraction", o.output_fraction}};
  r.config_hash = hex64(fnv1a64(canonical.dump()));
  return r;
}

void write_output(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty()) {
    out << content;
    if (!content.empty() && content.back() != '\n') out << '\n';
    return;
  }
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path);
  f << content;
  if (!content.empty() && content.back() != '\n') f << '\n';
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------

int cmd_plan(const WorkloadOptions& o, std::ostream& out) {
  const auto r = resolve(o);
  const FleetPlan plan = sweep(r.input);
  const ReportContext ctx{r.config_hash, o.seed, o.retrofit_gamma};
  out << plan_table_text(r.input, plan, ctx);
  if (!o.out.empty()) write_output(o.out, plan_json(r.input, plan, ctx).dump(2), out);
  return kExitOk;
}

struct SimulateOptions {
  std::string plan_path;
  std::string fleet = "pool-routing";
  std::size_t requests = 30000;
  double tolerance = 0.03;
  std::string service_model = "lockstep";
  double warmup = 0.1;
  bool allow_unstable = false;
};

int cmd_simulate(const WorkloadOptions& o, const SimulateOptions& s, std::ostream& out) {
  const auto r = resolve(o);
  Tokens boundary = 0;
  double gamma = 1.0;
  std::optional<std::pair<std::int64_t, std::int64_t>> gpus;
  if (!s.plan_path.empty()) {
    const json plan = json::parse(read_file(s.plan_path), nullptr, false);
    const char* key = s.fleet == "codesign" ? "best" : s.fleet == "retrofit" ? "retrofit" : "pool_routing";
    if (plan.is_discarded() || !plan.contains(key)) throw InputError("plan file lacks '" + std::string(key) + "'");
    const json& cell = plan.at(key);
    boundary = cell.at("B").get<Tokens>();
    gamma = cell.at("gamma").get<double>();
    gpus = std::make_pair(cell.at("n_s").get<std::int64_t>(), cell.at("n_l").get<std::int64_t>());
  } else {
    const FleetPlan plan = sweep(r.input);
    const SweepCell& cell = s.fleet == "codesign" ? plan.best : plan.pool_routing;
    boundary = cell.boundary;
    gamma = cell.gamma;
  }

  SweepCell cell = evaluate_cell(r.input, boundary, gamma);
  if (gpus) {
    cell.short_pool.gpus = gpus->first;
    cell.long_pool.gpus = gpus->second;
  }
  if (!gpus && !cell.feasible) throw InfeasibleError("planned cell is infeasible at this SLO");

  SimConfig cfg;
  cfg.seed = o.seed;
  cfg.requests_per_pool = s.requests;
  cfg.warmup_fraction = s.warmup;
  cfg.allow_unstable = s.allow_unstable;
  cfg.output_model = r.input.output_model;
  if (s.service_model == "occupancy") {
    cfg.service_model = ServiceModel::kOccupancyDependent;
  } else if (s.service_model != "lockstep") {
    throw InvalidArgument("--service-model must be lockstep or occupancy");
  }

  const auto specs = pool_specs_for_cell(r.input, cell);
  const auto reports = run_des(specs, r.input.profile, cfg);
  json rows = json::array();
  bool within = true;
  out << "pool    n_gpus   rho_ana   rho_hat    error   ttft_p50_ms  ttft_p99_ms\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const PoolPlan& pp = specs[i].name == "short" ? cell.short_pool : cell.long_pool;
    const double rho_ana = utilization(specs[i].gpus, specs[i].arrival_rate, pp.stats->gpu_rate);
    const double error = compare_to_analytic(reports[i], specs[i].gpus, specs[i].arrival_rate, *pp.stats);
    within = within && std::abs(error) <= s.tolerance;
    rows.push_back(sim_json(reports[i], rho_ana, error));
    char line[160];
    std::snprintf(line, sizeof line, "%-6s %8lld %9.4f %9.4f %7.2f%% %13.1f %12.1f\n", specs[i].name.c_str(),
                  static_cast<long long>(specs[i].gpus), rho_ana, reports[i].measured_utilization,
                  100.0 * error, 1000.0 * reports[i].ttft_p50_s, 1000.0 * reports[i].ttft_p99_s);
    out << line;
  }
  const json doc = {{"pools", rows},
                    {"B", boundary},
                    {"gamma", gamma},
                    {"tolerance", s.tolerance},
                    {"within_tolerance", within},
                    {"config", {{"hash", r.config_hash}, {"seed", o.seed}, {"requests_per_pool", s.requests}}}};
  if (!o.out.empty()) write_output(o.out, doc.dump(2), out);
  if (!within) throw ToleranceFailure("utilization error exceeds tolerance");
  return kExitOk;
}

struct CompressOptions {
  std::string input;
  Tokens budget = 0;
  bool fidelity = false;
  std::string out;
};

int cmd_compress(const CompressOptions& c, std::ostream& out) {
  std::vector<std::pair<std::string, Category>> prompts;
  const std::string raw = read_file(c.input);
  if (c.input.size() >= 6 && c.input.substr(c.input.size() - 6) == ".jsonl") {
    std::stringstream ss(raw);
    std::string line;
    while (std::getline(ss, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const json j = json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.contains("prompt")) throw InputError("bad prompt line in " + c.input);
      prompts.emplace_back(j.at("prompt").get<std::string>(),
                           parse_category(j.value("category", std::string("prose"))));
    }
  } else {
    prompts.emplace_back(raw, Category::kProse);
  }
  if (prompts.empty()) throw InputError("no prompts in " + c.input);

  const TokenEstimator estimator;
  json results = json::array();
  std::vector<double> latency;
  for (const auto& [text, category] : prompts) {
    CompressorConfig cfg;
    cfg.bytes_per_token = estimator.bytes_per_token(category);
    const auto result = compress(text, c.budget, cfg, c.fidelity);
    latency.push_back(result.elapsed_ms);
    results.push_back(compression_json(result));
  }
  const json doc = {{"budget", c.budget},
                    {"results", results},
                    {"latency_ms",
                     {{"p50", percentile(latency, 0.50)},
                      {"p95", percentile(latency, 0.95)},
                      {"p99", percentile(latency, 0.99)}}}};
  write_output(c.out, doc.dump(2), out);
  return kExitOk;
}

struct RouteOptions {
  std::string trace;
  Tokens boundary = 0;
  double gamma = 1.0;
  double compressibility = 1.0;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_route(const RouteOptions& ro, std::ostream& out, std::ostream& err) {
  const auto loaded = load_trace(ro.trace, trace_format_for(ro.trace));
  RouterConfig cfg;
  cfg.boundary = ro.boundary;
  cfg.gamma = ro.gamma;
  cfg.compressibility = ro.compressibility;
  TokenEstimator estimator;
  UniformStream stream(ro.seed);
  std::string lines;
  std::map<std::string, std::size_t> reasons;
  for (const auto& rec : loaded.records) {
    const auto d = route(rec, cfg, estimator, &stream);
    lines += decision_json_line(d) + "\n";
    ++reasons[std::string(to_string(d.reason))];
    // Exact counts only refine the estimator, never the decision just made.
    if (rec.payload_bytes) update_ema(estimator, rec.category, *rec.payload_bytes, rec.input_tokens);
  }
  write_output(ro.out, lines, out);
  for (const auto& [reason, count] : reasons) err << reason << ": " << count << "\n";
  if (loaded.malformed_lines > 0) err << "malformed lines skipped: " << loaded.malformed_lines << "\n";
  return kExitOk;
}

struct SynthCmdOptions {
  std::string anchors;
  std::size_t count = 0;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_synth(const SynthCmdOptions& so, std::ostream& out) {
  const AnchorFile file = load_anchor_file(so.anchors);
  SynthOptions opts;
  opts.mean_tokens = file.mean_tokens;
  if (file.sample_count) opts.sample_count = *file.sample_count;
  const auto dist = synth_distribution(file.anchors, file.seed, opts);
  out << "anchor      target    synthetic\n";
  for (const auto& a : file.anchors) {
    char line[96];
    std::snprintf(line, sizeof line, "p%-8g %9.0f %12lld\n", 100.0 * a.probability, a.tokens,
                  static_cast<long long>(dist.quantile(a.probability)));
    out << line;
  }
  out << "mean L_total: " << dist.mean() << "\n";
  if (!so.out.empty()) {
    const std::size_t n = so.count > 0 ? so.count : opts.sample_count;
    std::string lines;
    for (const auto& r : sample_requests(dist, OutputModel{}, n, so.seed)) {
      lines += json{{"input_tokens", r.input_tokens},
                    {"output_tokens", r.output_tokens},
                    {"category", std::string(to_string(r.category))}}
                   .dump() +
               "\n";
    }
    write_output(so.out, lines, out);
  }
  return kExitOk;
}

int cmd_sensitivity(const WorkloadOptions& o, const std::string& lambdas, std::ostream& out) {
  const auto values = parse_list(lambdas);
  if (values.size() < 2) throw InvalidArgument("--lambdas needs at least two values");
  for (double v : values) {
    if (!(v > 0.0)) throw InvalidArgument("arrival rates must be positive");
  }
  auto r = resolve(o);
  json rows = json::array();
  char line[200];
  std::snprintf(line, sizeof line, "%10s %8s %8s %9s %8s %9s %7s\n", "lambda", "homog", "PR", "PR sav",
                "best", "best sav", "gamma*");
  out << line;
  for (double lambda : values) {
    r.input.workload.arrival_rate = lambda;
    const FleetPlan plan = sweep(r.input);
    const double pr_sav = 1.0 - plan.pool_routing.cost_usd_yr / plan.homogeneous_cost_usd_yr;
    std::snprintf(line, sizeof line, "%10g %8lld %8lld %8.2f%% %8lld %8.2f%% %7.1f\n", lambda,
                  static_cast<long long>(plan.homogeneous_n()),
                  static_cast<long long>(plan.pool_routing.total_gpus()), 100.0 * pr_sav,
                  static_cast<long long>(plan.best.total_gpus()), 100.0 * plan.savings_fraction,
                  plan.best.gamma);
    out << line;
    rows.push_back({{"lambda", lambda},
                    {"homogeneous_n", plan.homogeneous_n()},
                    {"pr_n", plan.pool_routing.total_gpus()},
                    {"pr_savings", pr_sav},
                    {"best_n", plan.best.total_gpus()},
                    {"best_savings", plan.savings_fraction},
                    {"gamma_star", plan.best.gamma},
                    {"B_star", plan.best.boundary}});
  }
  if (!o.out.empty()) {
    write_output(o.out, json{{"rows", rows}, {"config", {{"hash", r.config_hash}, {"seed", o.seed}}}}.dump(2), out);
  }
  return kExitOk;
}

struct ReportOptions {
  std::string plan_path;
  Tokens boundary = 8192;
  Tokens long_context = 65536;
  std::string sizes;
  bool json_output = false;
};

int cmd_report(const ReportOptions& ro, std::ostream& out) {
  if (!ro.plan_path.empty()) {
    const json plan = json::parse(read_file(ro.plan_path), nullptr, false);
    if (plan.is_discarded() || !plan.contains("homogeneous")) throw InputError("not a plan report");
    const double homog = plan.at("homogeneous").at("cost_usd_yr").get<double>();
    char line[200];
    std::snprintf(line, sizeof line, "%-14s %8s %8s %8s %16s %9s\n", "Method", "n_s", "n_l", "Total",
                  "Annual cost ($)", "Savings");
    out << line;
    std::snprintf(line, sizeof line, "%-14s %8d %8lld %8lld %16.0f %8.1f%%\n", "Homogeneous", 0,
                  plan.at("homogeneous").at("n").get<long long>(), plan.at("homogeneous").at("n").get<long long>(),
                  homog, 0.0);
    out << line;
    for (const auto& [key, label] : {std::pair{"pool_routing", "Pool routing"}, std::pair{"retrofit", "Retrofit"},
                                     std::pair{"best", "Co-design"}}) {
      if (!plan.contains(key)) continue;
      const json& c = plan.at(key);
      const auto ns = c.at("n_s").get<long long>();
      const auto nl = c.at("n_l").get<long long>();
      const double cost = c.at("cost_usd_yr").get<double>();
      std::snprintf(line, sizeof line, "%-14s %8lld %8lld %8lld %16.0f %8.1f%%\n", label, ns, nl, ns + nl, cost,
                    100.0 * (1.0 - cost / homog));
      out << line;
    }
    return kExitOk;
  }
  std::vector<Tokens> sizes;
  if (ro.sizes.empty()) {
    sizes = {ro.boundary, ro.boundary + 1, 2 * ro.boundary, ro.long_context};
  } else {
    for (double v : parse_list(ro.sizes)) sizes.push_back(static_cast<Tokens>(v));
  }
  const auto rows = cliff_table(GpuProfile{}, ro.boundary, ro.long_context, sizes);
  out << (ro.json_output ? render_cliff_json(rows) + "\n" : render_cliff_text(rows));
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-pool GPU fleet planner for LLM serving", "fleetplan"};
  app.require_subcommand(1);

  WorkloadOptions plan_opts;
  auto* plan = app.add_subcommand("plan", "Size the cheapest two-pool fleet");
  add_workload_options(*plan, plan_opts);
  plan->add_option("--retrofit-gamma", plan_opts.retrofit_gamma, "Gamma of the retrofit row");

  WorkloadOptions sim_workload;
  SimulateOptions sim_opts;
  auto* simulate = app.add_subcommand("simulate", "Validate a planned fleet with the DES");
  add_workload_options(*simulate, sim_workload);
  simulate->add_option("--plan", sim_opts.plan_path, "Plan JSON written by `plan --out`");
  simulate->add_option("--fleet", sim_opts.fleet, "pool-routing, retrofit or codesign");
  simulate->add_option("--requests", sim_opts.requests, "Measured requests per pool");
  simulate->add_option("--tolerance", sim_opts.tolerance, "Max |utilization error|");
  simulate->add_option("--service-model", sim_opts.service_model, "lockstep or occupancy");
  simulate->add_option("--warmup", sim_opts.warmup, "Completions left out of TTFT stats");
  simulate->add_flag("--allow-unstable", sim_opts.allow_unstable, "Simulate overloaded pools");

  CompressOptions comp_opts;
  auto* compress_cmd = app.add_subcommand("compress", "Compress prompts to a token budget");
  compress_cmd->add_option("--input", comp_opts.input, "Text file or JSONL of {prompt, category}")->required();
  compress_cmd->add_option("--budget", comp_opts.budget, "Token budget T_c")->required();
  compress_cmd->add_flag("--fidelity", comp_opts.fidelity, "Add ROUGE-L recall and TF-IDF cosine");
  compress_cmd->add_option("--out", comp_opts.out, "Output file");

  RouteOptions route_opts;
  auto* route_cmd = app.add_subcommand("route", "Replay a trace through the gateway router");
  route_cmd->add_option("--trace", route_opts.trace, "Request trace")->required();
  route_cmd->add_option("--boundary", route_opts.boundary, "B_short")->required();
  route_cmd->add_option("--gamma", route_opts.gamma, "Band width gamma");
  route_cmd->add_option("--compressibility", route_opts.compressibility, "p_c for text-free requests");
  route_cmd->add_option("--seed", route_opts.seed, "Seed")->envname("FLEETOPT_SEED");
  route_cmd->add_option("--out", route_opts.out, "Decision log (JSONL)");

  SynthCmdOptions synth_opts;
  auto* synth = app.add_subcommand("synth", "Synthesize a workload from percentile anchors");
  synth->add_option("--anchors", synth_opts.anchors, "Anchor file")->required();
  synth->add_option("--count", synth_opts.count, "Records to write");
  synth->add_option("--seed", synth_opts.seed, "Sampling seed")->envname("FLEETOPT_SEED");
  synth->add_option("--out", synth_opts.out, "Trace output (JSONL)");

  WorkloadOptions sens_opts;
  std::string lambdas = "100,200,500,1000,2000";
  auto* sensitivity = app.add_subcommand("sensitivity", "Fleet size and savings across arrival rates");
  add_workload_options(*sensitivity, sens_opts);
  sensitivity->add_option("--lambdas", lambdas, "Comma-separated arrival rates");

  ReportOptions report_opts;
  auto* report = app.add_subcommand("report", "Render a plan or the cost-cliff table");
  report->add_option("--plan", report_opts.plan_path, "Plan JSON");
  report->add_option("--boundary", report_opts.boundary, "Short-pool context");
  report->add_option("--long-context", report_opts.long_context, "Long-pool context");
  report->add_option("--sizes", report_opts.sizes, "Comma-separated request sizes");
  report->add_flag("--json", report_opts.json_output, "Emit JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*plan) {
      apply_config_file(*plan, plan_opts);
      return cmd_plan(plan_opts, out);
    }
    if (*simulate) {
      apply_config_file(*simulate, sim_workload);
      return cmd_simulate(sim_workload, sim_opts, out);
    }
    if (*compress_cmd) return cmd_compress(comp_opts, out);
    if (*route_cmd) return cmd_route(route_opts, out, err);
    if (*synth) return cmd_synth(synth_opts, out);
    if (*sensitivity) {
      apply_config_file(*sensitivity, sens_opts);
      return cmd_sensitivity(sens_opts, lambdas, out);
    }
    if (*report) return cmd_report(report_opts, out);
  } catch (const ToleranceFailure& e) {
    err << "error: " << e.what() << "\n";
    return kExitTolerance;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace fleetplan
