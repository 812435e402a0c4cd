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

#include "fleetplan/queueing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fleetplan/errors.hpp"

namespace fleetplan {

namespace {

// Past the peak of the summand, terms this far below the running maximum
// no longer move a double.
constexpr double kLogTruncation = 60.0;

double log1p_exp(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

void GpuProfile::validate() const {
  if (!(base_latency_ms > 0.0)) throw InvalidArgument("base latency W must be positive");
  if (per_slot_latency_ms < 0.0) throw InvalidArgument("per-slot latency H must be >= 0");
  if (chunk_size < 1) throw InvalidArgument("chunk size must be >= 1");
  if (calib_slots < 1 || calib_context < 1) throw InvalidArgument("calibration geometry must be >= 1");
  if (!(kv_bytes_per_token > 0.0)) throw InvalidArgument("KV bytes per token must be positive");
}

PoolConfig PoolConfig::for_context(const GpuProfile& profile, Tokens context_window,
                                   double cost_per_gpu_hour) {
  if (context_window < 1) throw InvalidArgument("context window must be >= 1 token");
  const Tokens slots = profile.calib_slots * profile.calib_context / context_window;
  if (slots < 1) throw InvalidArgument("context window exceeds the calibrated KV budget");
  return {context_window, slots, cost_per_gpu_hour};
}

double iter_latency_ms(const GpuProfile& profile, Tokens n_slots) {
  if (n_slots < 1) throw InvalidArgument("iteration latency needs n_slots >= 1");
  return profile.base_latency_ms + profile.per_slot_latency_ms * static_cast<double>(n_slots);
}

Tokens prefill_chunks(const GpuProfile& profile, Tokens input_tokens) {
  return (input_tokens + profile.chunk_size - 1) / profile.chunk_size;
}

double service_time_s(const GpuProfile& profile, const PoolConfig& pool, Tokens input_tokens,
                      Tokens output_tokens) {
  if (input_tokens < 1) throw InvalidArgument("service time needs L_in >= 1");
  if (output_tokens < 0) throw InvalidArgument("service time needs L_out >= 0");
  if (input_tokens + output_tokens > pool.context_window) {
    throw InvalidArgument("request exceeds the pool context window");
  }
  const auto iterations = static_cast<double>(prefill_chunks(profile, input_tokens) + output_tokens);
  return iterations * iter_latency_ms(profile, pool.slots_per_gpu) / 1000.0;
}

ServiceStats stats_from_samples(std::span<const double> service_s, Tokens slots_per_gpu,
                                std::uint64_t seed) {
  if (service_s.empty()) throw InvalidArgument("no service-time samples");
  const double n = static_cast<double>(service_s.size());
  double mean = 0.0;
  for (double s : service_s) mean += s;
  mean /= n;
  double var = 0.0;
  for (double s : service_s) var += (s - mean) * (s - mean);
  var /= n;

  ServiceStats stats;
  stats.mean_service_s = mean;
  stats.var_service_s2 = var;
  stats.scv = var / (mean * mean);
  stats.slot_rate = 1.0 / mean;
  stats.slots_per_gpu = slots_per_gpu;
  stats.gpu_rate = static_cast<double>(slots_per_gpu) / mean;
  stats.sample_size = service_s.size();
  stats.seed = seed;
  return stats;
}

ServiceStats calibrate(const EmpiricalDistribution& restricted, const GpuProfile& profile,
                       const PoolConfig& pool, const OutputModel& output_model,
                       std::size_t sample_size, std::uint64_t seed) {
  if (restricted.empty()) throw EmptyRestriction("calibration over an empty distribution");
  if (sample_size < 100) throw InvalidArgument("calibration needs at least 100 samples");
  UniformStream stream(seed);
  std::vector<double> samples(sample_size);
  for (auto& s : samples) {
    const auto [in, out] = output_model.split(draw_total(restricted, stream));
    s = service_time_s(profile, pool, in, out);
  }
  return stats_from_samples(samples, pool.slots_per_gpu, seed);
}

double log_erlang_c(std::int64_t servers, double rho) {
  if (servers < 1) throw InvalidArgument("Erlang-C needs c >= 1");
  if (!(rho > 0.0)) throw InvalidArgument("Erlang-C needs rho > 0");
  if (rho >= 1.0) throw InfeasibleError("unstable queue: offered utilization >= 1");
  if (servers == 1) return std::log(rho);

  // C = 1 / (1 + (1 - rho) * c! * sum_{k<c} a^(k-c) / k!),  a = c * rho.
  const auto c = static_cast<double>(servers);
  const double log_a = std::log(c * rho);
  const double log_c_factorial = std::lgamma(c + 1.0);

  double running_max = -std::numeric_limits<double>::infinity();
  double scaled_sum = 0.0;  // sum of exp(term - running_max)
  for (std::int64_t k = servers - 1; k >= 0; --k) {
    const auto kd = static_cast<double>(k);
    const double term = (kd - c) * log_a + log_c_factorial - std::lgamma(kd + 1.0);
    if (term > running_max) {
      scaled_sum = scaled_sum * std::exp(running_max - term) + 1.0;
      running_max = term;
    } else {
      scaled_sum += std::exp(term - running_max);
    }
    if (kd < c * rho && term < running_max - kLogTruncation) break;
  }
  const double log_tail = std::log1p(-rho) + running_max + std::log(scaled_sum);
  return -log1p_exp(log_tail);
}

double erlang_c(std::int64_t servers, double rho) {
  if (servers == 1) {
    if (!(rho > 0.0)) throw InvalidArgument("Erlang-C needs rho > 0");
    if (rho >= 1.0) throw InfeasibleError("unstable queue: offered utilization >= 1");
    return rho;
  }
  return std::exp(log_erlang_c(servers, rho));
}

double w99_kimura(std::int64_t servers, double slot_rate, double arrival_rate, double scv) {
  if (servers < 1) throw InvalidArgument("w99 needs at least one server");
  if (!(slot_rate > 0.0)) throw InvalidArgument("w99 needs a positive service rate");
  if (arrival_rate <= 0.0) return 0.0;
  const double capacity = static_cast<double>(servers) * slot_rate;
  if (arrival_rate >= capacity) throw InfeasibleError("unstable queue: lambda >= c * mu");
  const double log_ratio = log_erlang_c(servers, arrival_rate / capacity) - std::log(0.01);
  if (log_ratio <= 0.0) return 0.0;
  return log_ratio * (1.0 + scv) / (2.0 * (capacity - arrival_rate));
}

double percentile(std::span<const double> values, double p) {
  if (values.empty()) throw InvalidArgument("percentile of an empty sample");
  std::vector<double> copy(values.begin(), values.end());
  const auto n = static_cast<double>(copy.size());
  auto rank = static_cast<std::size_t>(std::ceil(p * n));
  rank = std::clamp<std::size_t>(rank, 1, copy.size());
  std::nth_element(copy.begin(), copy.begin() + static_cast<std::ptrdiff_t>(rank - 1), copy.end());
  return copy[rank - 1];
}

double prefill_p99_s(const EmpiricalDistribution& restricted, const GpuProfile& profile,
                     const PoolConfig& pool, std::size_t sample_size, std::uint64_t seed,
                     const OutputModel& output_model) {
  if (restricted.empty()) throw EmptyRestriction("prefill percentile over an empty distribution");
  if (sample_size < 1) throw InvalidArgument("prefill percentile needs samples");
  const double t_iter_s = iter_latency_ms(profile, pool.slots_per_gpu) / 1000.0;
  UniformStream stream(seed);
  std::vector<double> prefill(sample_size);
  for (auto& p : prefill) {
    const auto [in, out] = output_model.split(draw_total(restricted, stream));
    (void)out;
    p = static_cast<double>(prefill_chunks(profile, in)) * t_iter_s;
  }
  return percentile(prefill, 0.99);
}

std::int64_t invert_min_servers(double arrival_rate, const ServiceStats& stats,
                                double wait_budget_s, double rho_max) {
  if (!(arrival_rate > 0.0)) throw InvalidArgument("inversion needs a positive arrival rate");
  if (!(rho_max > 0.0 && rho_max < 1.0)) throw InvalidArgument("rho_max must lie in (0, 1)");
  if (!(stats.gpu_rate > 0.0)) throw InvalidArgument("inversion needs a positive GPU rate");
  if (wait_budget_s < 0.0) {
    throw InfeasibleError("SLO unattainable: prefill and first decode exceed the TTFT target");
  }

  const double offered = arrival_rate / stats.gpu_rate;
  const auto lo = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(offered / rho_max)));
  const auto hi = std::max<std::int64_t>(lo, 10 * static_cast<std::int64_t>(std::ceil(offered)));

  auto meets_slo = [&](std::int64_t gpus) {
    return w99_kimura(gpus * stats.slots_per_gpu, stats.slot_rate, arrival_rate, stats.scv) <=
           wait_budget_s;
  };
  if (meets_slo(lo)) return lo;
  if (!meets_slo(hi)) throw InfeasibleError("SLO unattainable within the GPU search bound");

  std::int64_t bad = lo;
  std::int64_t good = hi;
  while (good - bad > 1) {
    const std::int64_t mid = bad + (good - bad) / 2;
    if (meets_slo(mid)) good = mid; else bad = mid;
  }
  return good;
}

}  // namespace fleetplan
