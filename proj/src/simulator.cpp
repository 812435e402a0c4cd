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

#include "fleetplan/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>
#include <tuple>
#include <unordered_map>

#include "fleetplan/errors.hpp"

namespace fleetplan {

namespace {

struct Job {
  double arrival = 0.0;
  Tokens input = 1;
  Tokens output = 0;
  bool measured = false;
};

struct Completion {
  double time;
  std::uint64_t seq;
  bool measured;
  double sojourn;
  bool operator>(const Completion& o) const {
    return time != o.time ? time > o.time : seq > o.seq;
  }
};

class RequestSource {
 public:
  RequestSource(const PoolSpec& spec, const OutputModel& output_model)
      : spec_(spec), output_model_(output_model) {
    double total = 0.0;
    for (const auto& c : spec.components) {
      if (c.distribution.empty()) throw InvalidArgument("pool component has an empty distribution");
      if (!(c.weight >= 0.0)) throw InvalidArgument("component weights must be >= 0");
      total += c.weight;
      cumulative_.push_back(total);
    }
    if (!(total > 0.0)) throw InvalidArgument("pool has no traffic components");
    for (auto& c : cumulative_) c /= total;
  }

  std::pair<Tokens, Tokens> draw(UniformStream& stream) const {
    std::size_t k = 0;
    if (cumulative_.size() > 1) {
      const double u = stream.next();
      while (k + 1 < cumulative_.size() && u >= cumulative_[k]) ++k;
    }
    return shape(spec_.components[k], draw_total(spec_.components[k].distribution, stream));
  }

  std::pair<Tokens, Tokens> shape(const PoolComponent& c, Tokens total) const {
    auto [in, out] = output_model_.split(total);
    if (c.compress_to) in = std::max<Tokens>(1, std::min(in, *c.compress_to - out));
    return {in, out};
  }

  // Largest request any component can produce.
  std::vector<std::pair<Tokens, Tokens>> extremes() const {
    std::vector<std::pair<Tokens, Tokens>> out;
    for (const auto& c : spec_.components) {
      if (c.weight > 0.0) out.push_back(shape(c, c.distribution.support_max()));
    }
    return out;
  }

 private:
  const PoolSpec& spec_;
  const OutputModel& output_model_;
  std::vector<double> cumulative_;
};

}  // namespace

void SimConfig::validate() const {
  if (requests_per_pool < 1) throw InvalidArgument("requests_per_pool must be >= 1");
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 0.5)) {
    throw InvalidArgument("warmup_fraction must lie in [0, 0.5)");
  }
  if (horizon_s && !(*horizon_s > 0.0)) throw InvalidArgument("horizon must be positive");
}

SimReport simulate_pool(const PoolSpec& spec, const GpuProfile& profile, const SimConfig& config) {
  config.validate();
  if (spec.gpus < 1) throw InvalidArgument("simulated pool needs at least one GPU");
  if (spec.arrival_rate < 0.0) throw InvalidArgument("arrival rate must be >= 0");

  SimReport report;
  report.pool = spec.name;
  report.n_gpus = spec.gpus;
  report.arrival_rate = spec.arrival_rate;
  if (spec.arrival_rate == 0.0) return report;

  const RequestSource source(spec, config.output_model);
  const auto capacity = spec.gpus * spec.pool.slots_per_gpu;
  const double full_iter_s = iter_latency_ms(profile, spec.pool.slots_per_gpu) / 1000.0;

  auto iteration_s = [&](std::int64_t busy_after_admit) {
    if (config.service_model == ServiceModel::kLockstepFull) return full_iter_s;
    const std::int64_t per_gpu = (busy_after_admit + spec.gpus - 1) / spec.gpus;
    return iter_latency_ms(profile, std::max<std::int64_t>(1, per_gpu)) / 1000.0;
  };

  double max_service = 0.0;
  for (auto [in, out] : source.extremes()) {
    max_service = std::max(max_service, service_time_s(profile, spec.pool, in, out));
  }

  if (!config.allow_unstable) {
    UniformStream probe(derive_seed(config.seed, 0x5eed));
    double sum = 0.0;
    constexpr int kProbe = 10000;
    for (int i = 0; i < kProbe; ++i) {
      auto [in, out] = source.draw(probe);
      sum += service_time_s(profile, spec.pool, in, out);
    }
    const double offered = spec.arrival_rate * (sum / kProbe) / static_cast<double>(capacity);
    if (offered >= 1.0) throw InfeasibleError("unstable pool '" + spec.name + "': offered load >= capacity");
  }

  UniformStream arrivals_stream(derive_seed(config.seed, 1));
  UniformStream size_stream(derive_seed(config.seed, 2));
  std::priority_queue<Completion, std::vector<Completion>, std::greater<>> running;
  std::deque<Job> fifo;
  std::uint64_t seq = 0;
  std::int64_t busy = 0;

  double next_arrival = arrivals_stream.next_exponential(spec.arrival_rate);
  std::size_t measured_generated = 0;
  bool arrivals_open = true;
  double window_start = std::numeric_limits<double>::quiet_NaN();
  double window_end = std::numeric_limits<double>::quiet_NaN();
  double last_time = 0.0;
  double busy_area = 0.0;
  double system_area = 0.0;

  std::vector<std::pair<double, double>> measured_ttft;  // (completion time, ttft)
  std::vector<double> measured_waits;
  measured_ttft.reserve(config.requests_per_pool);
  double sojourn_sum = 0.0;
  std::size_t sojourn_count = 0;

  auto advance = [&](double t) {
    if (!std::isnan(window_start)) {
      const double hi = std::isnan(window_end) ? t : std::min(t, window_end);
      const double lo = std::max(last_time, window_start);
      if (hi > lo) {
        busy_area += static_cast<double>(busy) * (hi - lo);
        system_area += static_cast<double>(busy + static_cast<std::int64_t>(fifo.size())) * (hi - lo);
      }
    }
    last_time = t;
  };

  // TTFT is fixed at admission; kept until the completion is popped.
  std::unordered_map<std::uint64_t, double> ttft_by_seq;

  auto admit = [&](const Job& job, double now) {
    ++busy;
    const double t_iter = iteration_s(busy);
    const double prefill = static_cast<double>(prefill_chunks(profile, job.input)) * t_iter;
    const double service =
        static_cast<double>(prefill_chunks(profile, job.input) + job.output) * t_iter;
    const double wait = now - job.arrival;
    const std::uint64_t id = seq++;
    running.push({now + service, id, job.measured, wait + service});
    ++report.admitted;
    if (job.measured) {
      ttft_by_seq.emplace(id, wait + prefill + t_iter);
      measured_waits.push_back(wait);
    }
  };

  const double warmup_end = max_service;
  const double horizon = config.horizon_s.value_or(std::numeric_limits<double>::infinity());

  while (true) {
    const double t_complete = running.empty() ? std::numeric_limits<double>::infinity() : running.top().time;
    const double t_arrive = arrivals_open ? next_arrival : std::numeric_limits<double>::infinity();
    const double t = std::min(t_complete, t_arrive);
    if (!std::isfinite(t) || t > horizon) break;
    advance(t);

    if (t_complete <= t_arrive) {
      const Completion done = running.top();
      running.pop();
      --busy;
      ++report.completed;
      if (done.measured) {
        sojourn_sum += done.sojourn;
        ++sojourn_count;
        auto it = ttft_by_seq.find(done.seq);
        measured_ttft.emplace_back(done.time, it->second);
        ttft_by_seq.erase(it);
      }
      if (!fifo.empty()) {
        const Job job = fifo.front();
        fifo.pop_front();
        admit(job, t);
      }
    } else {
      Job job;
      job.arrival = t;
      std::tie(job.input, job.output) = source.draw(size_stream);
      if (t >= warmup_end) {
        job.measured = true;
        if (measured_generated == 0) window_start = t;
        ++measured_generated;
        if (measured_generated == config.requests_per_pool) {
          window_end = t;
          arrivals_open = false;
        }
      }
      ++report.arrivals;
      if (busy < capacity) {
        admit(job, t);
      } else {
        fifo.push_back(job);
      }
      next_arrival = t + arrivals_stream.next_exponential(spec.arrival_rate);
    }
    if (!fifo.empty() && busy < capacity) ++report.work_conservation_violations;
  }

  report.in_flight = running.size();
  report.queued = fifo.size();
  if (std::isnan(window_end)) window_end = std::min(last_time, horizon);
  report.window_s = std::isnan(window_start) ? 0.0 : std::max(0.0, window_end - window_start);
  if (report.window_s > 0.0) {
    report.measured_utilization = busy_area / (report.window_s * static_cast<double>(capacity));
    report.mean_in_system = system_area / report.window_s;
  }
  if (sojourn_count > 0) report.mean_sojourn_s = sojourn_sum / static_cast<double>(sojourn_count);
  if (!measured_waits.empty()) {
    double s = 0.0;
    for (double w : measured_waits) s += w;
    report.mean_queue_wait_s = s / static_cast<double>(measured_waits.size());
  }

  std::sort(measured_ttft.begin(), measured_ttft.end());
  const auto skip = static_cast<std::size_t>(config.warmup_fraction * static_cast<double>(measured_ttft.size()));
  std::vector<double> ttft;
  for (std::size_t i = skip; i < measured_ttft.size(); ++i) ttft.push_back(measured_ttft[i].second);
  if (!ttft.empty()) {
    report.ttft_p50_s = percentile(ttft, 0.50);
    report.ttft_p99_s = percentile(ttft, 0.99);
  }
  return report;
}

std::vector<SimReport> run_des(const std::vector<PoolSpec>& pools, const GpuProfile& profile,
                               const SimConfig& config) {
  std::vector<SimReport> reports;
  for (std::size_t i = 0; i < pools.size(); ++i) {
    SimConfig per_pool = config;
    per_pool.seed = derive_seed(config.seed, 100 + i);
    reports.push_back(simulate_pool(pools[i], profile, per_pool));
  }
  return reports;
}

double compare_to_analytic(const SimReport& report, std::int64_t gpus, double arrival_rate,
                           const ServiceStats& stats) {
  if (!(report.measured_utilization > 0.0)) throw InvalidArgument("measured utilization is zero");
  const double rho_ana = utilization(gpus, arrival_rate, stats.gpu_rate);
  return (rho_ana - report.measured_utilization) / report.measured_utilization;
}

std::vector<PoolSpec> pool_specs_for_cell(const PlannerInput& input, const SweepCell& cell) {
  const auto& dist = input.workload.distribution;
  const double p_c = input.workload.compressibility;
  const auto b = static_cast<double>(cell.boundary);
  const auto top = std::floor(cell.gamma * b + 1e-9);
  const double inf = std::numeric_limits<double>::infinity();

  std::vector<PoolSpec> specs;
  PoolSpec s;
  s.name = "short";
  s.arrival_rate = cell.short_pool.arrival_rate;
  s.gpus = cell.short_pool.gpus;
  s.pool = PoolConfig::for_context(input.profile, cell.boundary, input.short_cost_per_hour());
  if (cell.alpha > 0.0) s.components.push_back({dist.restrict_to(0.0, b), cell.alpha, std::nullopt});
  if (cell.beta * p_c > 0.0) s.components.push_back({dist.restrict_to(b, top), cell.beta * p_c, cell.boundary});
  if (s.arrival_rate > 0.0) specs.push_back(std::move(s));

  PoolSpec l;
  l.name = "long";
  l.arrival_rate = cell.long_pool.arrival_rate;
  l.gpus = cell.long_pool.gpus;
  l.pool = PoolConfig::for_context(input.profile, input.long_context, input.long_cost_per_hour());
  const double tail = std::max(0.0, 1.0 - cell.alpha - cell.beta);
  if (tail > 0.0 && dist.mass(top, inf) > 0.0) l.components.push_back({dist.restrict_to(top, inf), tail, std::nullopt});
  if (cell.beta * (1.0 - p_c) > 0.0) {
    l.components.push_back({dist.restrict_to(b, top), cell.beta * (1.0 - p_c), std::nullopt});
  }
  if (l.arrival_rate > 0.0 && !l.components.empty()) specs.push_back(std::move(l));
  return specs;
}

}  // namespace fleetplan
