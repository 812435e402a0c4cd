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

#include <doctest.h>

#include <cmath>
#include <vector>

#include "fleetplan/errors.hpp"
#include "fleetplan/queueing.hpp"
#include "fleetplan/random.hpp"

using namespace fleetplan;

namespace {

// Eq. 5 summed term by term in long double.
double erlang_c_direct(int c, double rho) {
  const long double a = static_cast<long double>(c) * rho;
  long double term = 1.0L;  // a^k / k!
  long double sum = 0.0L;
  for (int k = 0; k < c; ++k) {
    sum += term;
    term *= a / (k + 1);
  }
  const long double top = term / (1.0L - rho);  // a^c / c! / (1 - rho)
  return static_cast<double>(top / (sum + top));
}

// Waiting probability from the stationary distribution of the M/M/c
// birth-death chain (lambda = a, mu = 1), truncated far into the tail.
double erlang_c_birth_death(int c, double rho) {
  const double a = c * rho;
  std::vector<long double> pi(1, 1.0L);
  const int cutoff = c + 20000;
  for (int k = 1; k <= cutoff; ++k) pi.push_back(pi.back() * a / std::min(k, c));
  long double total = 0.0L, waiting = 0.0L;
  for (int k = 0; k <= cutoff; ++k) {
    total += pi[k];
    if (k >= c) waiting += pi[k];
  }
  return static_cast<double>(waiting / total);
}

PoolConfig pool16() { return PoolConfig{65536, 16, 2.21}; }

ServiceStats point_stats() {
  const auto d = EmpiricalDistribution::from_points({{612, 1.0}});
  const OutputModel om{100.0 / 612.0, 1};
  return calibrate(d, GpuProfile{}, pool16(), om, 1000, 1);
}

}  // namespace

TEST_CASE("iteration latency") {
  const GpuProfile p;
  CHECK(iter_latency_ms(p, 16) == doctest::Approx(18.4));
  CHECK(iter_latency_ms(p, 128) == doctest::Approx(91.2));
  GpuProfile flat;
  flat.per_slot_latency_ms = 0.0;
  CHECK(iter_latency_ms(flat, 999) == 8.0);
  CHECK_THROWS_AS(iter_latency_ms(p, 0), InvalidArgument);
}

TEST_CASE("service time") {
  const GpuProfile p;
  CHECK(service_time_s(p, pool16(), 512, 100) == doctest::Approx(1.8584));
  CHECK(service_time_s(p, pool16(), 1, 0) == doctest::Approx(0.0184));
  CHECK(service_time_s(p, pool16(), 513, 0) == doctest::Approx(2 * 0.0184));
  CHECK_THROWS_AS(service_time_s(p, pool16(), 65000, 1000), InvalidArgument);
}

TEST_CASE("property: service time monotone") {
  const GpuProfile p;
  for (Tokens in = 1; in < 5000; in += 37) {
    CHECK(service_time_s(p, pool16(), in + 1, 10) >= service_time_s(p, pool16(), in, 10));
    CHECK(service_time_s(p, pool16(), in, 11) > service_time_s(p, pool16(), in, 10));
  }
}

TEST_CASE("pool geometry") {
  const GpuProfile p;
  CHECK(PoolConfig::for_context(p, 4096).slots_per_gpu == 256);
  CHECK(PoolConfig::for_context(p, 1536).slots_per_gpu == 682);
  CHECK(PoolConfig::for_context(p, 8192).slots_per_gpu == 128);
  CHECK(PoolConfig::for_context(p, 65536).slots_per_gpu == 16);
}

TEST_CASE("calibrate point mass") {
  const auto s = point_stats();
  CHECK(s.mean_service_s == doctest::Approx(1.8584));
  CHECK(s.scv == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s.gpu_rate == doctest::Approx(16.0 / 1.8584));
  CHECK(s.gpu_rate == doctest::Approx(8.609).epsilon(1e-3));
  const auto again = point_stats();
  CHECK(again.mean_service_s == s.mean_service_s);
  CHECK(again.var_service_s2 == s.var_service_s2);
  CHECK_THROWS_AS(calibrate(EmpiricalDistribution::from_points({{10, 1.0}}), GpuProfile{}, pool16(), {}, 50, 1),
                  InvalidArgument);
}

TEST_CASE("calibrate is bit-identical for a fixed seed") {
  std::vector<Tokens> s;
  for (Tokens i = 1; i <= 5000; i += 3) s.push_back(i);
  const auto d = EmpiricalDistribution::from_samples(s);
  const auto a = calibrate(d, GpuProfile{}, pool16(), {}, 10000, 42);
  const auto b = calibrate(d, GpuProfile{}, pool16(), {}, 10000, 42);
  CHECK(a.mean_service_s == b.mean_service_s);
  CHECK(a.var_service_s2 == b.var_service_s2);
  CHECK(a.scv > 0.0);
}

TEST_CASE("erlang_c closed forms") {
  for (double rho : {0.1, 0.5, 0.93}) CHECK(erlang_c(1, rho) == rho);
  CHECK(erlang_c(2, 0.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK_THROWS_AS(erlang_c(3, 1.0), InfeasibleError);
  CHECK_THROWS_AS(erlang_c(0, 0.5), InvalidArgument);
}

TEST_CASE("erlang_c matches direct summation and the birth-death chain") {
  for (int c = 1; c <= 20; ++c) {
    for (int r = 1; r <= 19; ++r) {
      const double rho = r * 0.05;
      const double got = erlang_c(c, rho);
      CHECK(std::abs(got - erlang_c_direct(c, rho)) / erlang_c_direct(c, rho) <= 1e-9);
      CHECK(std::abs(got - erlang_c_birth_death(c, rho)) / erlang_c_birth_death(c, rho) <= 1e-9);
    }
  }
}

TEST_CASE("erlang_c many-server regime") {
  const double c = erlang_c(32592, 0.85);
  CHECK(std::isfinite(c));
  CHECK(c < 1e-6);
  // Normal-approximation bound: C <= exp(-c (1 - rho)^2 / 2) / (1 - rho) is loose but finite.
  CHECK(c <= std::exp(-32592 * 0.15 * 0.15 / 2.0) / 0.15);
  CHECK(std::isfinite(log_erlang_c(1000000, 0.999)));
  CHECK(erlang_c(1000000, 0.999) > 0.0);
}

TEST_CASE("property: erlang_c monotone in rho and c") {
  for (int c = 1; c <= 40; ++c) {
    double prev = 0.0;
    for (int r = 1; r <= 19; ++r) {
      const double v = erlang_c(c, r * 0.05);
      CHECK(v > prev);
      prev = v;
    }
  }
  for (double rho : {0.3, 0.7, 0.95}) {
    double prev = 1.0;
    for (int c = 1; c <= 60; ++c) {
      const double v = erlang_c(c, rho);
      CHECK(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("w99 Kimura") {
  CHECK(w99_kimura(2, 1.0, 1.0, 1.0) == doctest::Approx(std::log(100.0 / 3.0)).epsilon(1e-12));
  CHECK(w99_kimura(2, 1.0, 1.0, 1.0) == doctest::Approx(3.5066).epsilon(1e-4));
  CHECK(w99_kimura(2, 1.0, 1.0, 0.0) == doctest::Approx(0.5 * w99_kimura(2, 1.0, 1.0, 1.0)).epsilon(1e-12));
  // C well below 1% clamps to zero.
  CHECK(w99_kimura(200, 1.0, 100.0, 1.0) == 0.0);
  CHECK(w99_kimura(4, 1.0, 0.0, 1.0) == 0.0);
  CHECK_THROWS_AS(w99_kimura(2, 1.0, 2.0, 1.0), InfeasibleError);
}

TEST_CASE("w99 with Cs^2 = 1 equals the M/M/c tail") {
  for (int c = 1; c <= 20; ++c) {
    for (int r = 1; r <= 19; ++r) {
      const double rho = r * 0.05;
      const double mu = 2.0;
      const double lambda = rho * c * mu;
      const double cc = erlang_c_direct(c, rho);
      const double expected = std::max(0.0, std::log(cc / 0.01) / (c * mu - lambda));
      const double got = w99_kimura(c, mu, lambda, 1.0);
      if (expected == 0.0) {
        CHECK(got == 0.0);
      } else {
        CHECK(std::abs(got - expected) / expected <= 1e-9);
      }
    }
  }
}

TEST_CASE("prefill p99") {
  const OutputModel none{0.0, 0};
  const GpuProfile p;
  CHECK(prefill_p99_s(EmpiricalDistribution::from_points({{512, 1.0}}), p, pool16(), 1000, 1, none) ==
        doctest::Approx(0.0184));
  CHECK(prefill_p99_s(EmpiricalDistribution::from_points({{1024, 1.0}}), p, pool16(), 1000, 1, none) ==
        doctest::Approx(0.0368));
  CHECK(prefill_p99_s(EmpiricalDistribution::from_points({{512, 0.5}, {5120, 1.0}}), p, pool16(), 1000, 1, none) ==
        doctest::Approx(10 * 0.0184));
}

TEST_CASE("effective SLO") {
  CHECK(effective_slo_s(0.5, 0.08, 0.0184) == doctest::Approx(0.4016));
  CHECK(effective_slo_s(0.5, 0.0, 0.0) == 0.5);
  CHECK(effective_slo_s(0.1, 0.2, 0.0184) < 0.0);
}

TEST_CASE("invert_min_servers examples") {
  const auto s = point_stats();
  CHECK(invert_min_servers(100.0, s, 0.4, 0.85) == 14);
  CHECK(invert_min_servers(1e-6, s, 0.4, 0.85) == 1);
  CHECK_THROWS_AS(invert_min_servers(100.0, s, -0.1, 0.85), InfeasibleError);
  CHECK(utilization(14, 100.0, 8.609) == doctest::Approx(0.8296).epsilon(1e-4));
  CHECK(utilization(7, 100.0, 100.0 / 7.0) == doctest::Approx(1.0));
  CHECK(utilization(28, 100.0, 8.609) == doctest::Approx(utilization(14, 100.0, 8.609) / 2));
}

TEST_CASE("property: inversion minimality and monotonicity") {
  UniformStream rng(2024);
  int solved = 0;
  for (int i = 0; i < 200; ++i) {
    ServiceStats s;
    s.slots_per_gpu = 1 + static_cast<Tokens>(rng.next() * 64);
    s.mean_service_s = 0.05 + rng.next() * 5.0;
    s.slot_rate = 1.0 / s.mean_service_s;
    s.gpu_rate = static_cast<double>(s.slots_per_gpu) / s.mean_service_s;
    s.scv = rng.next() * 3.0;
    const double lambda = 0.1 + rng.next() * 200.0;
    const double budget = rng.next() * 2.0;
    const double rho_max = 0.85;
    std::int64_t n = 0;
    try {
      n = invert_min_servers(lambda, s, budget, rho_max);
    } catch (const InfeasibleError&) {
      continue;
    }
    ++solved;
    auto ok = [&](std::int64_t g) {
      if (lambda / (static_cast<double>(g) * s.gpu_rate) > rho_max + 1e-12) return false;
      return w99_kimura(g * s.slots_per_gpu, s.slot_rate, lambda, s.scv) <= budget;
    };
    CHECK(ok(n));
    if (n > 1) CHECK_FALSE(ok(n - 1));
    // More budget never needs more GPUs; more load never needs fewer.
    CHECK(invert_min_servers(lambda, s, budget * 2 + 0.01, rho_max) <= n);
    CHECK(invert_min_servers(lambda * 1.5, s, budget, rho_max) >= n);
  }
  CHECK(solved > 150);
}
