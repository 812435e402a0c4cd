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

#ifndef FLEETPLAN_WORKLOAD_HPP_
#define FLEETPLAN_WORKLOAD_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fleetplan/random.hpp"

namespace fleetplan {

using Tokens = std::int64_t;

enum class Category { kCode, kProse, kRag, kConversational };

inline constexpr std::array<Category, 4> kAllCategories = {
    Category::kCode, Category::kProse, Category::kRag, Category::kConversational};

std::string_view to_string(Category category);
// Unknown names map to prose.
Category parse_category(std::string_view name);

struct RequestRecord {
  Tokens input_tokens = 1;
  Tokens output_tokens = 0;
  Category category = Category::kProse;
  std::optional<std::int64_t> payload_bytes;
  std::optional<std::string> prompt_text;

  Tokens total_tokens() const { return input_tokens + output_tokens; }
};

// Right-continuous step CDF over exact token counts. Immutable once built.
class EmpiricalDistribution {
 public:
  struct Point {
    Tokens tokens;
    double cumulative;
  };

  EmpiricalDistribution() = default;

  static EmpiricalDistribution from_samples(std::span<const Tokens> samples);
  // Points must have strictly increasing tokens, nondecreasing cumulative
  // probabilities, and a final cumulative of 1 (within 1e-9).
  static EmpiricalDistribution from_points(std::vector<Point> points);

  // P(X <= x).
  double cdf(double x) const;
  // Smallest support point whose cumulative probability reaches p.
  Tokens quantile(double p) const;
  // Renormalized distribution of X conditioned on lo < X <= hi.
  EmpiricalDistribution restrict_to(double lo_exclusive, double hi_inclusive) const;
  double mass(double lo_exclusive, double hi_inclusive) const;

  double mean() const;
  Tokens support_min() const { return points_.front().tokens; }
  Tokens support_max() const { return points_.back().tokens; }
  std::span<const Point> points() const { return points_; }
  bool empty() const { return points_.empty(); }

 private:
  explicit EmpiricalDistribution(std::vector<Point> points) : points_(std::move(points)) {}

  std::vector<Point> points_;
};

// Splits a total-token budget into (input, output) tokens.
struct OutputModel {
  double output_fraction = 0.25;
  Tokens min_output = 1;

  // L_out = max(min_output, round(fraction * L_total)), capped so that
  // L_in >= 1. A total of 1 yields (1, 0).
  std::pair<Tokens, Tokens> split(Tokens total) const;
};

struct WorkloadSpec {
  EmpiricalDistribution distribution;
  double arrival_rate = 1000.0;
  double compressibility = 1.0;
  std::map<Category, double> category_mix;

  void validate() const;
};

struct TraceLoadResult {
  std::vector<RequestRecord> records;
  std::size_t malformed_lines = 0;
};

enum class TraceFormat { kJsonl, kCsv };

TraceLoadResult load_trace(const std::filesystem::path& path, TraceFormat format);
TraceFormat trace_format_for(const std::filesystem::path& path);

EmpiricalDistribution build_cdf(std::span<const RequestRecord> records);

struct BorderlineFractions {
  double alpha;
  double beta;
};

BorderlineFractions borderline_fraction(const EmpiricalDistribution& dist, double boundary,
                                        double gamma);

enum class Archetype { kI, kII, kIII };
std::string_view to_string(Archetype archetype);

Archetype classify_archetype(const EmpiricalDistribution& dist, double boundary, double gamma);

// ---------------------------------------------------------------------------
// Synthesis from published percentile anchors.

struct QuantileAnchor {
  double probability;
  double tokens;
};

struct LognormalMixture {
  double weight = 0.5;  // of the first component
  double mu1 = 0.0, sigma1 = 1.0;
  double mu2 = 0.0, sigma2 = 1.0;

  double cdf(double x) const;
  double quantile(double p) const;
  // E[min(X, cap)].
  double capped_mean(double cap) const;
};

struct SynthOptions {
  std::size_t sample_count = 30000;
  Tokens min_tokens = 2;
  Tokens max_tokens = 65536;
  // Published mean L_total, fit alongside the quantile anchors when present.
  std::optional<double> mean_tokens;
};

LognormalMixture fit_lognormal_mixture(std::span<const QuantileAnchor> anchors,
                                       const SynthOptions& options = {});

EmpiricalDistribution synth_distribution(std::span<const QuantileAnchor> anchors,
                                         std::uint64_t seed, const SynthOptions& options = {});

struct AnchorFile {
  std::vector<QuantileAnchor> anchors;
  std::uint64_t seed = 1;
  std::optional<double> mean_tokens;
  std::optional<std::size_t> sample_count;
};

AnchorFile load_anchor_file(const std::filesystem::path& path);

std::vector<RequestRecord> sample_requests(const EmpiricalDistribution& dist,
                                           const OutputModel& output_model, std::size_t count,
                                           std::uint64_t seed,
                                           const std::map<Category, double>& category_mix = {});

// Inverse-CDF draw of one L_total value.
inline Tokens draw_total(const EmpiricalDistribution& dist, UniformStream& stream) {
  return dist.quantile(stream.next_open());
}

}  // namespace fleetplan

#endif  // FLEETPLAN_WORKLOAD_HPP_
