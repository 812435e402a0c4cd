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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <Eigen/Core>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "fleetplan/errors.hpp"
#include "fleetplan/workload.hpp"
#include "json.hpp"

namespace fleetplan {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

constexpr double kPriorWeight = 0.05;
constexpr double kPriorSigma = 0.7;
constexpr double kAnchorTolerance = 0.05;

LognormalMixture mixture_from_params(const Eigen::VectorXd& theta) {
  LognormalMixture m;
  m.weight = 1.0 / (1.0 + std::exp(-theta[0]));
  m.mu1 = theta[1];
  m.sigma1 = std::exp(theta[2]);
  m.mu2 = theta[1] + std::exp(theta[3]);
  m.sigma2 = std::exp(theta[4]);
  return m;
}

// Residuals in log-quantile space plus weak priors that pin down the
// directions the anchors leave free.
struct MixtureResiduals {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  std::span<const QuantileAnchor> anchors;
  std::optional<double> mean_tokens;
  double cap;

  int inputs() const { return 5; }
  int values() const { return static_cast<int>(anchors.size()) + (mean_tokens ? 1 : 0) + 3; }

  int operator()(const Eigen::VectorXd& theta, Eigen::VectorXd& residuals) const {
    const LognormalMixture m = mixture_from_params(theta);
    Eigen::Index row = 0;
    for (const auto& anchor : anchors) {
      residuals[row++] = std::log(m.quantile(anchor.probability)) - std::log(anchor.tokens);
    }
    if (mean_tokens) {
      residuals[row++] = std::log(m.capped_mean(cap)) - std::log(*mean_tokens);
    }
    residuals[row++] = kPriorWeight * theta[0];
    residuals[row++] = kPriorWeight * (theta[2] - std::log(kPriorSigma));
    residuals[row++] = kPriorWeight * (theta[4] - std::log(kPriorSigma));
    return 0;
  }
};

void validate_anchors(std::span<const QuantileAnchor> anchors) {
  if (anchors.size() < 2) throw InvalidArgument("synthesis needs at least two anchors");
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const auto& a = anchors[i];
    if (!(a.probability > 0.0 && a.probability < 1.0)) {
      throw InvalidArgument("anchor percentiles must lie strictly inside (0, 1)");
    }
    if (!(a.tokens >= 1.0)) throw InvalidArgument("anchor token counts must be >= 1");
    if (i > 0 && a.probability <= anchors[i - 1].probability) {
      throw InvalidArgument("anchor percentiles must be strictly increasing");
    }
    if (i > 0 && a.tokens <= anchors[i - 1].tokens) {
      throw InvalidArgument("infeasible anchors: token counts must increase with percentile");
    }
  }
}

}  // namespace

double LognormalMixture::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  const double y = std::log(x);
  return weight * normal_cdf((y - mu1) / sigma1) + (1.0 - weight) * normal_cdf((y - mu2) / sigma2);
}

double LognormalMixture::quantile(double p) const {
  double lo = std::min(mu1 - 12.0 * sigma1, mu2 - 12.0 * sigma2);
  double hi = std::max(mu1 + 12.0 * sigma1, mu2 + 12.0 * sigma2);
  for (int i = 0; i < 200 && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (cdf(std::exp(mid)) < p) lo = mid; else hi = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

double LognormalMixture::capped_mean(double cap) const {
  auto component = [cap](double mu, double sigma) {
    const double log_cap = std::log(cap);
    const double below = std::exp(mu + 0.5 * sigma * sigma) *
                         normal_cdf((log_cap - mu - sigma * sigma) / sigma);
    const double above = cap * (1.0 - normal_cdf((log_cap - mu) / sigma));
    return below + above;
  };
  return weight * component(mu1, sigma1) + (1.0 - weight) * component(mu2, sigma2);
}

LognormalMixture fit_lognormal_mixture(std::span<const QuantileAnchor> anchors,
                                       const SynthOptions& options) {
  validate_anchors(anchors);

  // Single lognormal through the outermost anchors seeds the two components.
  const auto& first = anchors.front();
  const auto& last = anchors.back();
  auto probit = [](double p) {
    // Inverse normal CDF by bisection; only used for the initial guess.
    double lo = -10.0, hi = 10.0;
    for (int i = 0; i < 100; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (normal_cdf(mid) < p) lo = mid; else hi = mid;
    }
    return 0.5 * (lo + hi);
  };
  const double z1 = probit(first.probability);
  const double z2 = probit(last.probability);
  const double sigma = std::max(0.1, (std::log(last.tokens) - std::log(first.tokens)) / (z2 - z1));
  const double mu = std::log(first.tokens) - z1 * sigma;

  Eigen::VectorXd theta(5);
  theta << 0.0, mu - 0.5 * sigma, std::log(0.8 * sigma), std::log(sigma), std::log(0.8 * sigma);

  MixtureResiduals residuals{anchors, options.mean_tokens, static_cast<double>(options.max_tokens)};
  Eigen::NumericalDiff<MixtureResiduals> numeric(residuals);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<MixtureResiduals>> solver(numeric);
  solver.parameters.maxfev = 4000;
  solver.parameters.xtol = 1e-12;
  solver.parameters.ftol = 1e-12;
  solver.minimize(theta);
  return mixture_from_params(theta);
}

EmpiricalDistribution synth_distribution(std::span<const QuantileAnchor> anchors,
                                         std::uint64_t seed, const SynthOptions& options) {
  if (options.sample_count < 1) throw InvalidArgument("sample_count must be positive");
  const LognormalMixture mixture = fit_lognormal_mixture(anchors, options);

  UniformStream stream(seed);
  std::vector<Tokens> samples(options.sample_count);
  for (auto& s : samples) {
    const double x = std::round(mixture.quantile(stream.next_open()));
    s = std::clamp(static_cast<Tokens>(x), options.min_tokens, options.max_tokens);
  }
  auto dist = EmpiricalDistribution::from_samples(samples);

  for (const auto& anchor : anchors) {
    const auto q = static_cast<double>(dist.quantile(anchor.probability));
    if (std::abs(q - anchor.tokens) > kAnchorTolerance * anchor.tokens) {
      std::ostringstream msg;
      msg << "infeasible anchors: fitted quantile(" << anchor.probability << ") = " << q
          << " misses anchor " << anchor.tokens << " by more than 5%";
      throw InvalidArgument(msg.str());
    }
  }
  return dist;
}

AnchorFile load_anchor_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read anchor file: " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("anchor file is not valid JSON: " + std::string(e.what()));
  }
  AnchorFile file;
  if (!doc.contains("anchors") || !doc["anchors"].is_array()) {
    throw InputError("anchor file lacks an \"anchors\" array");
  }
  for (const auto& pair : doc["anchors"]) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
      throw InputError("each anchor must be [percentile, tokens]");
    }
    file.anchors.push_back({pair[0].get<double>(), pair[1].get<double>()});
  }
  if (doc.contains("seed")) file.seed = doc["seed"].get<std::uint64_t>();
  if (doc.contains("mean")) file.mean_tokens = doc["mean"].get<double>();
  if (doc.contains("samples")) file.sample_count = doc["samples"].get<std::size_t>();
  return file;
}

}  // namespace fleetplan
