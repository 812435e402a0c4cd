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

#ifndef FLEETPLAN_QUEUEING_HPP_
#define FLEETPLAN_QUEUEING_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "fleetplan/workload.hpp"

namespace fleetplan {

// Hardware constants for one GPU serving node. Defaults are Llama-3-70B on
// A100-80GB: 8 ms base iteration, 0.65 ms per occupied slot, 512-token
// prefill chunks, 320 KiB of KV cache per token, 16 slots at 64K context.
struct GpuProfile {
  double base_latency_ms = 8.0;
  double per_slot_latency_ms = 0.65;
  Tokens chunk_size = 512;
  double kv_bytes_per_token = 320.0 * 1024.0;
  Tokens calib_slots = 16;
  Tokens calib_context = 65536;
  double gpu_cost_per_hour = 2.21;

  void validate() const;
};

// Slot geometry of one pool. slots_per_gpu follows from the KV budget the
// profile was calibrated at: floor(calib_slots * calib_context / context).
struct PoolConfig {
  Tokens context_window = 65536;
  Tokens slots_per_gpu = 16;
  double cost_per_gpu_hour = 2.21;

  static PoolConfig for_context(const GpuProfile& profile, Tokens context_window,
                                double cost_per_gpu_hour);
  static PoolConfig for_context(const GpuProfile& profile, Tokens context_window) {
    return for_context(profile, context_window, profile.gpu_cost_per_hour);
  }
};

struct ServiceStats {
  double mean_service_s = 0.0;
  double var_service_s2 = 0.0;
  double scv = 0.0;
  double slot_rate = 0.0;  // 1 / E[S]
  double gpu_rate = 0.0;   // slots_per_gpu / E[S]
  Tokens slots_per_gpu = 1;
  std::size_t sample_size = 0;
  std::uint64_t seed = 0;

  // Second raw moment E[S^2].
  double second_moment() const { return var_service_s2 + mean_service_s * mean_service_s; }
};

// t_iter = W + H * n_slots, in milliseconds.
double iter_latency_ms(const GpuProfile& profile, Tokens n_slots);

// Chunks of prefill plus one iteration per output token, at the pool's
// lockstep iteration latency. Seconds.
double service_time_s(const GpuProfile& profile, const PoolConfig& pool, Tokens input_tokens,
                      Tokens output_tokens);

Tokens prefill_chunks(const GpuProfile& profile, Tokens input_tokens);

// Moments from a sample of service times.
ServiceStats stats_from_samples(std::span<const double> service_s, Tokens slots_per_gpu,
                                std::uint64_t seed);

// Monte-Carlo estimate of the pool's service-time moments.
ServiceStats calibrate(const EmpiricalDistribution& restricted, const GpuProfile& profile,
                       const PoolConfig& pool, const OutputModel& output_model,
                       std::size_t sample_size, std::uint64_t seed);

// ln C(c, rho), evaluated in log space; finite for very large c.
double log_erlang_c(std::int64_t servers, double offered_utilization);
double erlang_c(std::int64_t servers, double offered_utilization);

// P99 queueing delay under the Kimura M/G/c approximation, clamped at 0.
double w99_kimura(std::int64_t servers, double slot_rate, double arrival_rate, double scv);

// Nearest-rank percentile; `values` need not be sorted.
double percentile(std::span<const double> values, double p);

double prefill_p99_s(const EmpiricalDistribution& restricted, const GpuProfile& profile,
                     const PoolConfig& pool, std::size_t sample_size, std::uint64_t seed,
                     const OutputModel& output_model = {});

// Queueing budget left after P99 prefill and the first decode step. May be
// negative, which makes the SLO unattainable at any fleet size.
inline double effective_slo_s(double slo_s, double prefill_p99_s, double t_iter_s) {
  return slo_s - prefill_p99_s - t_iter_s;
}

// Smallest GPU count meeting both the utilization cap and the P99 wait
// budget. Throws InfeasibleError when the search interval has no solution.
std::int64_t invert_min_servers(double arrival_rate, const ServiceStats& stats,
                                double wait_budget_s, double rho_max);

inline double utilization(std::int64_t gpus, double arrival_rate, double gpu_rate) {
  return arrival_rate / (static_cast<double>(gpus) * gpu_rate);
}

}  // namespace fleetplan

#endif  // FLEETPLAN_QUEUEING_HPP_
