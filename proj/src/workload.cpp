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

#include "fleetplan/workload.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fleetplan/errors.hpp"
#include "json.hpp"

namespace fleetplan {

namespace {

constexpr double kProbabilityTolerance = 1e-9;

std::string lowercase(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) {
    text.remove_prefix(1);
  }
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) {
    text.remove_suffix(1);
  }
  return text;
}

// Parsed but not yet validated row; nullopt signals a malformed line.
std::optional<RequestRecord> record_from_json(const nlohmann::json& row) {
  if (!row.is_object() || !row.contains("input_tokens") || !row["input_tokens"].is_number_integer()) {
    return std::nullopt;
  }
  RequestRecord record;
  record.input_tokens = row["input_tokens"].get<std::int64_t>();
  if (row.contains("output_tokens")) {
    if (!row["output_tokens"].is_number_integer()) return std::nullopt;
    record.output_tokens = row["output_tokens"].get<std::int64_t>();
  }
  if (row.contains("category") && row["category"].is_string()) {
    record.category = parse_category(row["category"].get<std::string>());
  }
  if (row.contains("payload_bytes") && !row["payload_bytes"].is_null()) {
    if (!row["payload_bytes"].is_number_integer()) return std::nullopt;
    record.payload_bytes = row["payload_bytes"].get<std::int64_t>();
  }
  for (const char* key : {"prompt_text", "prompt"}) {
    if (row.contains(key) && row[key].is_string()) {
      record.prompt_text = row[key].get<std::string>();
      break;
    }
  }
  return record;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      fields.emplace_back(trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  fields.emplace_back(trim(current));
  return fields;
}

std::optional<std::int64_t> parse_int(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  std::int64_t value = 0;
  std::istringstream in{std::string(text)};
  in >> value;
  if (!in || !in.eof()) return std::nullopt;
  return value;
}

void check_counts(const RequestRecord& record, std::size_t line_number) {
  if (record.input_tokens < 0 || record.output_tokens < 0 ||
      (record.payload_bytes && *record.payload_bytes < 0)) {
    throw InputError("negative token count on line " + std::to_string(line_number));
  }
}

}  // namespace

std::string_view to_string(Category category) {
  switch (category) {
    case Category::kCode: return "code";
    case Category::kProse: return "prose";
    case Category::kRag: return "rag";
    case Category::kConversational: return "conversational";
  }
  return "prose";
}

Category parse_category(std::string_view name) {
  const std::string key = lowercase(trim(name));
  if (key == "code") return Category::kCode;
  if (key == "rag") return Category::kRag;
  if (key == "conversational") return Category::kConversational;
  return Category::kProse;
}

// ---------------------------------------------------------------------------

EmpiricalDistribution EmpiricalDistribution::from_samples(std::span<const Tokens> samples) {
  if (samples.empty()) throw InvalidArgument("empirical distribution needs at least one sample");
  std::vector<Tokens> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<Point> points;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    points.push_back({sorted[i], static_cast<double>(i + 1) / n});
  }
  points.back().cumulative = 1.0;
  return EmpiricalDistribution(std::move(points));
}

EmpiricalDistribution EmpiricalDistribution::from_points(std::vector<Point> points) {
  if (points.empty()) throw InvalidArgument("empirical distribution needs at least one point");
  double previous = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i > 0 && points[i].tokens <= points[i - 1].tokens) {
      throw InvalidArgument("distribution points must have strictly increasing token counts");
    }
    if (points[i].cumulative < previous - kProbabilityTolerance || points[i].cumulative < 0.0) {
      throw InvalidArgument("cumulative probabilities must be nondecreasing");
    }
    previous = points[i].cumulative;
  }
  if (std::abs(points.back().cumulative - 1.0) > kProbabilityTolerance) {
    throw InvalidArgument("final cumulative probability must be 1");
  }
  points.back().cumulative = 1.0;
  return EmpiricalDistribution(std::move(points));
}

double EmpiricalDistribution::cdf(double x) const {
  auto it = std::upper_bound(points_.begin(), points_.end(), x,
                             [](double value, const Point& p) { return value < static_cast<double>(p.tokens); });
  if (it == points_.begin()) return 0.0;
  return std::prev(it)->cumulative;
}

Tokens EmpiricalDistribution::quantile(double p) const {
  if (points_.empty()) throw InvalidArgument("quantile of an empty distribution");
  if (p <= 0.0) return points_.front().tokens;
  auto it = std::lower_bound(points_.begin(), points_.end(), p,
                             [](const Point& point, double value) {
                               return point.cumulative < value - 1e-12;
                             });
  if (it == points_.end()) return points_.back().tokens;
  return it->tokens;
}

double EmpiricalDistribution::mass(double lo_exclusive, double hi_inclusive) const {
  if (hi_inclusive <= lo_exclusive) return 0.0;
  return std::max(0.0, cdf(hi_inclusive) - cdf(lo_exclusive));
}

EmpiricalDistribution EmpiricalDistribution::restrict_to(double lo_exclusive,
                                                         double hi_inclusive) const {
  const double base = cdf(lo_exclusive);
  const double total = mass(lo_exclusive, hi_inclusive);
  if (total <= 1e-15) {
    std::ostringstream msg;
    msg << "no mass in interval (" << lo_exclusive << ", " << hi_inclusive << "]";
    throw EmptyRestriction(msg.str());
  }
  std::vector<Point> restricted;
  for (const Point& p : points_) {
    const auto t = static_cast<double>(p.tokens);
    if (t <= lo_exclusive) continue;
    if (t > hi_inclusive) break;
    restricted.push_back({p.tokens, std::clamp((p.cumulative - base) / total, 0.0, 1.0)});
  }
  restricted.back().cumulative = 1.0;
  return EmpiricalDistribution(std::move(restricted));
}

double EmpiricalDistribution::mean() const {
  double sum = 0.0;
  double previous = 0.0;
  for (const Point& p : points_) {
    sum += static_cast<double>(p.tokens) * (p.cumulative - previous);
    previous = p.cumulative;
  }
  return sum;
}

// ---------------------------------------------------------------------------

std::pair<Tokens, Tokens> OutputModel::split(Tokens total) const {
  if (total <= 1) return {1, 0};
  auto out = static_cast<Tokens>(std::llround(output_fraction * static_cast<double>(total)));
  out = std::clamp<Tokens>(std::max(out, min_output), 0, total - 1);
  return {total - out, out};
}

void WorkloadSpec::validate() const {
  if (distribution.empty()) throw InvalidArgument("workload has no distribution");
  if (!(arrival_rate > 0.0)) throw InvalidArgument("arrival rate must be positive");
  if (compressibility < 0.0 || compressibility > 1.0) {
    throw InvalidArgument("compressibility must lie in [0, 1]");
  }
  if (!category_mix.empty()) {
    double sum = 0.0;
    for (const auto& [category, fraction] : category_mix) {
      if (fraction < 0.0) throw InvalidArgument("negative category fraction");
      sum += fraction;
    }
    if (std::abs(sum - 1.0) > 1e-6) throw InvalidArgument("category fractions must sum to 1");
  }
}

// ---------------------------------------------------------------------------

TraceFormat trace_format_for(const std::filesystem::path& path) {
  return lowercase(path.extension().string()) == ".csv" ? TraceFormat::kCsv : TraceFormat::kJsonl;
}

TraceLoadResult load_trace(const std::filesystem::path& path, TraceFormat format) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read trace file: " + path.string());

  TraceLoadResult result;
  std::string line;
  std::size_t line_number = 0;

  if (format == TraceFormat::kJsonl) {
    while (std::getline(in, line)) {
      ++line_number;
      if (trim(line).empty()) continue;
      auto row = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
      auto record = row.is_discarded() ? std::nullopt : record_from_json(row);
      if (record) check_counts(*record, line_number);
      if (!record || record->input_tokens < 1) {
        ++result.malformed_lines;
        continue;
      }
      result.records.push_back(std::move(*record));
    }
  } else {
    std::map<std::string, std::size_t> columns;
    while (std::getline(in, line)) {
      ++line_number;
      if (trim(line).empty()) continue;
      auto fields = split_csv_line(line);
      if (columns.empty()) {
        for (std::size_t i = 0; i < fields.size(); ++i) columns[lowercase(fields[i])] = i;
        if (!columns.contains("input_tokens")) {
          throw InputError("CSV trace lacks an input_tokens column: " + path.string());
        }
        continue;
      }
      auto field = [&](const std::string& name) -> std::optional<std::string_view> {
        auto it = columns.find(name);
        if (it == columns.end() || it->second >= fields.size()) return std::nullopt;
        return std::string_view(fields[it->second]);
      };
      RequestRecord record;
      bool ok = true;
      if (auto v = parse_int(field("input_tokens").value_or(""))) {
        record.input_tokens = *v;
      } else {
        ok = false;
      }
      if (auto text = field("output_tokens"); text && !trim(*text).empty()) {
        if (auto v = parse_int(*text)) record.output_tokens = *v; else ok = false;
      }
      if (auto text = field("category")) record.category = parse_category(*text);
      if (auto text = field("payload_bytes"); text && !trim(*text).empty()) {
        if (auto v = parse_int(*text)) record.payload_bytes = *v; else ok = false;
      }
      if (ok) check_counts(record, line_number);
      if (!ok || record.input_tokens < 1) {
        ++result.malformed_lines;
        continue;
      }
      result.records.push_back(std::move(record));
    }
  }

  if (result.records.empty()) throw InputError("zero valid records in trace: " + path.string());
  return result;
}

EmpiricalDistribution build_cdf(std::span<const RequestRecord> records) {
  if (records.empty()) throw InvalidArgument("cannot build a CDF from zero records");
  std::vector<Tokens> totals;
  totals.reserve(records.size());
  for (const auto& r : records) totals.push_back(r.total_tokens());
  return EmpiricalDistribution::from_samples(totals);
}

BorderlineFractions borderline_fraction(const EmpiricalDistribution& dist, double boundary,
                                        double gamma) {
  if (boundary < 1.0) throw InvalidArgument("boundary must be at least 1 token");
  if (gamma < 1.0) throw InvalidArgument("gamma must be at least 1");
  const double alpha = dist.cdf(boundary);
  const double beta = std::max(0.0, dist.cdf(std::floor(gamma * boundary)) - alpha);
  return {alpha, beta};
}

std::string_view to_string(Archetype archetype) {
  switch (archetype) {
    case Archetype::kI: return "I";
    case Archetype::kII: return "II";
    case Archetype::kIII: return "III";
  }
  return "II";
}

Archetype classify_archetype(const EmpiricalDistribution& dist, double boundary, double gamma) {
  const auto [alpha, beta] = borderline_fraction(dist, boundary, gamma);
  (void)beta;
  if (alpha >= 0.90) return Archetype::kI;
  if (alpha <= 0.50) return Archetype::kIII;
  return Archetype::kII;
}

std::vector<RequestRecord> sample_requests(const EmpiricalDistribution& dist,
                                           const OutputModel& output_model, std::size_t count,
                                           std::uint64_t seed,
                                           const std::map<Category, double>& category_mix) {
  if (count < 1) throw InvalidArgument("sample_requests needs n >= 1");
  UniformStream totals(seed);
  UniformStream categories(derive_seed(seed, 1));

  std::vector<std::pair<Category, double>> cumulative_mix;
  double acc = 0.0;
  for (const auto& [category, fraction] : category_mix) {
    acc += fraction;
    cumulative_mix.emplace_back(category, acc);
  }

  std::vector<RequestRecord> records;
  records.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Tokens total = draw_total(dist, totals);
    const auto [in, out] = output_model.split(total);
    RequestRecord record;
    record.input_tokens = in;
    record.output_tokens = out;
    if (!cumulative_mix.empty()) {
      const double u = categories.next() * acc;
      record.category = cumulative_mix.back().first;
      for (const auto& [category, bound] : cumulative_mix) {
        if (u < bound) {
          record.category = category;
          break;
        }
      }
    }
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace fleetplan
