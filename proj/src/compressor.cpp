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

#include "fleetplan/compressor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <Eigen/Sparse>

#include "fleetplan/errors.hpp"
#include "fleetplan/text.hpp"

namespace fleetplan {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Units x distinct-terms matrices over one document.
struct TermIndex {
  std::size_t vocabulary = 0;
  std::vector<std::unordered_map<int, int>> counts;  // per unit: term id -> count
  std::vector<int> df;
};

TermIndex index_terms(const std::vector<SentenceUnit>& units) {
  TermIndex index;
  std::unordered_map<std::string, int> ids;
  index.counts.resize(units.size());
  for (std::size_t u = 0; u < units.size(); ++u) {
    for (const auto& term : units[u].terms) {
      auto [it, inserted] = ids.try_emplace(term, static_cast<int>(ids.size()));
      if (inserted) index.df.push_back(0);
      if (index.counts[u][it->second]++ == 0) ++index.df[it->second];
    }
  }
  index.vocabulary = ids.size();
  return index;
}

double idf(std::size_t documents, int df) {
  return std::log((1.0 + static_cast<double>(documents)) / (1.0 + df)) + 1.0;
}

// Row u holds count * idf for each term of unit u.
SparseMatrix tfidf_matrix(const TermIndex& index) {
  std::vector<Eigen::Triplet<double>> triplets;
  const std::size_t n = index.counts.size();
  for (std::size_t u = 0; u < n; ++u) {
    for (const auto& [term, count] : index.counts[u]) {
      triplets.emplace_back(static_cast<int>(u), term, count * idf(n, index.df[term]));
    }
  }
  SparseMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(index.vocabulary));
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

// Upper triangle (row <= col) of M * M^T, accumulated per term. Common
// words make the product nearly dense, so it goes straight into a dense
// matrix; filling column by column keeps the writes contiguous.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> upper_gram(const SparseMatrix& m) {
  const SparseMatrix by_term = m.transpose();  // row t lists the units holding term t
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> gram =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(m.rows(), m.rows());
  std::vector<std::pair<Eigen::Index, Scalar>> posting;
  for (Eigen::Index t = 0; t < by_term.outerSize(); ++t) {
    posting.clear();
    for (SparseMatrix::InnerIterator it(by_term, t); it; ++it) {
      posting.emplace_back(it.col(), static_cast<Scalar>(it.value()));
    }
    for (std::size_t hi = 0; hi < posting.size(); ++hi) {
      Scalar* col = gram.col(posting[hi].first).data();
      const Scalar w = posting[hi].second;
      for (std::size_t lo = 0; lo <= hi; ++lo) col[posting[lo].first] += w * posting[lo].second;
    }
  }
  return gram;
}

SparseMatrix incidence_matrix(const TermIndex& index) {
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t u = 0; u < index.counts.size(); ++u) {
    for (const auto& entry : index.counts[u]) triplets.emplace_back(static_cast<int>(u), entry.first, 1.0);
  }
  SparseMatrix m(static_cast<Eigen::Index>(index.counts.size()), static_cast<Eigen::Index>(index.vocabulary));
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

// Upper triangle of overlap / (log|a| + log|b|), zero on the diagonal.
// Single precision: overlaps are small integers and the matrix is read once
// per power iteration, so its size sets the cost.
Eigen::MatrixXf upper_similarity(const std::vector<SentenceUnit>& units) {
  const auto n = static_cast<Eigen::Index>(units.size());
  Eigen::MatrixXf sim = upper_gram<float>(incidence_matrix(index_terms(units)));
  Eigen::VectorXd log_len(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    log_len(i) = std::log(static_cast<double>(std::max<std::size_t>(1, units[i].terms.size())));
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    float* col = sim.col(j).data();
    for (Eigen::Index i = 0; i < j; ++i) {
      const double denom = log_len(i) + log_len(j);
      col[i] = denom > 0.0 ? static_cast<float>(col[i] / denom) : 0.0f;
    }
    col[j] = 0.0f;
  }
  return sim;
}

std::string join_units(const std::vector<SentenceUnit>& units, const std::vector<std::size_t>& keep) {
  std::string out;
  for (std::size_t k = 0; k < keep.size(); ++k) {
    if (k > 0) out.push_back(' ');
    out += units[keep[k]].text;
  }
  return out;
}

}  // namespace

void CompressorConfig::validate() const {
  const double sum = w_textrank + w_position + w_tfidf + w_novelty;
  if (w_textrank < 0 || w_position < 0 || w_tfidf < 0 || w_novelty < 0 || std::abs(sum - 1.0) > 1e-9) {
    throw InvalidArgument("signal weights must be nonnegative and sum to 1");
  }
  if (!(damping > 0.0 && damping < 1.0)) throw InvalidArgument("damping must lie in (0, 1)");
  if (max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");
  if (!(convergence_tol > 0.0)) throw InvalidArgument("convergence tolerance must be positive");
  if (!(bytes_per_token > 0.0)) throw InvalidArgument("bytes per token must be positive");
}

std::vector<SentenceUnit> split_sentences(std::string_view text, double bytes_per_token) {
  const auto spans = split_sentence_spans(text);
  if (spans.empty()) throw InvalidArgument("cannot split empty text");
  std::vector<SentenceUnit> units;
  units.reserve(spans.size());
  for (std::size_t i = 0; i < spans.size(); ++i) {
    SentenceUnit u;
    u.index = i;
    u.text = std::string(spans[i]);
    u.token_count = estimate_tokens(spans[i].size() + 1, bytes_per_token);
    u.terms = tokenize_terms(spans[i]);
    units.push_back(std::move(u));
  }
  return units;
}

Eigen::VectorXd min_max_normalize(const Eigen::VectorXd& raw) {
  if (raw.size() == 0) return raw;
  const double lo = raw.minCoeff();
  const double hi = raw.maxCoeff();
  if (hi - lo <= 1e-12 * std::max(1.0, std::abs(hi))) return Eigen::VectorXd::Ones(raw.size());
  return (raw.array() - lo) / (hi - lo);
}

Eigen::MatrixXd textrank_similarity(const std::vector<SentenceUnit>& units) {
  const Eigen::MatrixXf sim = upper_similarity(units).selfadjointView<Eigen::Upper>();
  return sim.cast<double>();
}

Eigen::VectorXd score_textrank(const std::vector<SentenceUnit>& units, const CompressorConfig& config) {
  const auto n = static_cast<Eigen::Index>(units.size());
  if (n == 0) throw InvalidArgument("no units to score");
  if (n == 1) return Eigen::VectorXd::Ones(1);

  // Transition matrix S D^-1 with S symmetric, so only its upper triangle is
  // stored. Dangling units link uniformly.
  const Eigen::MatrixXf sim = upper_similarity(units);
  const auto sym = sim.selfadjointView<Eigen::Upper>();
  const Eigen::VectorXd out = (sym * Eigen::VectorXf::Ones(n)).cast<double>();
  const Eigen::VectorXd inv_out = (out.array() > 0.0).select(out.cwiseInverse(), 0.0);
  const Eigen::VectorXd dangling = (out.array() > 0.0).select(Eigen::VectorXd::Zero(n), 1.0);
  const double uniform = 1.0 / static_cast<double>(n);
  const double teleport = (1.0 - config.damping) * uniform;
  Eigen::VectorXd score = Eigen::VectorXd::Constant(n, uniform);
  Eigen::VectorXd next(n);
  for (int it = 0; it < config.max_iterations; ++it) {
    next = (sym * score.cwiseProduct(inv_out).cast<float>()).cast<double>();
    next.array() += dangling.dot(score) * uniform;
    next = (config.damping * next).array() + teleport;
    const double change = (next - score).lpNorm<1>();
    score.swap(next);
    if (change < config.convergence_tol) break;
  }
  return min_max_normalize(score);
}

Eigen::VectorXd score_position(const std::vector<SentenceUnit>& units) {
  if (units.empty()) throw InvalidArgument("no units to score");
  const auto n = static_cast<Eigen::Index>(units.size());
  Eigen::VectorXd raw(n);
  for (Eigen::Index i = 0; i < n; ++i) raw(i) = 1.0 / (1.0 + static_cast<double>(i));
  return min_max_normalize(raw);
}

Eigen::VectorXd score_tfidf(const std::vector<SentenceUnit>& units) {
  if (units.empty()) throw InvalidArgument("no units to score");
  const TermIndex index = index_terms(units);
  const SparseMatrix weights = tfidf_matrix(index);
  Eigen::VectorXd raw = weights * Eigen::VectorXd::Ones(weights.cols());
  for (Eigen::Index u = 0; u < raw.size(); ++u) {
    const auto len = units[u].terms.size();
    raw(u) = len > 0 ? raw(u) / static_cast<double>(len) : 0.0;
  }
  return min_max_normalize(raw);
}

Eigen::VectorXd raw_novelty(const std::vector<SentenceUnit>& units) {
  if (units.empty()) throw InvalidArgument("no units to score");
  SparseMatrix weights = tfidf_matrix(index_terms(units));
  for (Eigen::Index u = 0; u < weights.outerSize(); ++u) {
    const double norm = weights.row(u).norm();
    if (norm > 0.0) weights.row(u) /= norm;
  }
  // With unit rows, dot products are cosines. Each unit only needs its
  // best match among earlier units, so accumulate one column at a time.
  const SparseMatrix by_term = weights.transpose();
  const auto n = static_cast<Eigen::Index>(units.size());
  Eigen::VectorXd raw = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd dots(n);
  for (Eigen::Index i = 1; i < n; ++i) {
    dots.head(i).setZero();
    for (SparseMatrix::InnerIterator term(weights, i); term; ++term) {
      for (SparseMatrix::InnerIterator earlier(by_term, term.col()); earlier && earlier.col() < i; ++earlier) {
        dots(earlier.col()) += term.value() * earlier.value();
      }
    }
    raw(i) = 1.0 - std::clamp(dots.head(i).maxCoeff(), 0.0, 1.0);
  }
  return raw;
}

Eigen::VectorXd score_novelty(const std::vector<SentenceUnit>& units) {
  return min_max_normalize(raw_novelty(units));
}

CompressionResult compress(std::string_view text, Tokens budget, const CompressorConfig& config,
                           bool with_fidelity) {
  const auto started = std::chrono::steady_clock::now();
  config.validate();
  if (budget < 1) throw InvalidArgument("compression budget must be >= 1");
  const auto units = split_sentences(text, config.bytes_per_token);
  const std::size_t n = units.size();

  CompressionResult result;
  result.unit_count = n;
  result.input_tokens = estimate_tokens(text.size(), config.bytes_per_token);

  auto keep_all = [&](bool success) {
    result.kept_indices.resize(n);
    std::iota(result.kept_indices.begin(), result.kept_indices.end(), std::size_t{0});
    result.output_text = std::string(text);
    result.output_tokens = result.input_tokens;
    result.success = success;
  };

  if (result.input_tokens <= budget) {
    keep_all(true);
  } else {
    std::vector<char> keep(n, 0);
    Tokens used = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i < config.keep_head || i + config.keep_tail >= n) {
        keep[i] = 1;
        used += units[i].token_count;
      }
    }
    if (used > budget) {
      keep_all(false);
    } else {
      const Eigen::VectorXd composite =
          config.w_textrank * score_textrank(units, config) + config.w_position * score_position(units) +
          config.w_tfidf * score_tfidf(units) + config.w_novelty * score_novelty(units);
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return composite(static_cast<Eigen::Index>(a)) > composite(static_cast<Eigen::Index>(b));
      });
      // Skip units that do not fit and keep filling with smaller ones.
      for (std::size_t i : order) {
        if (keep[i] || used + units[i].token_count > budget) continue;
        keep[i] = 1;
        used += units[i].token_count;
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (keep[i]) result.kept_indices.push_back(i);
      }
      result.output_text = join_units(units, result.kept_indices);
      result.output_tokens = estimate_tokens(result.output_text.size(), config.bytes_per_token);
      result.success = true;
    }
  }

  result.reduction = result.input_tokens > 0
                         ? 1.0 - static_cast<double>(result.output_tokens) /
                                     static_cast<double>(result.input_tokens)
                         : 0.0;
  if (with_fidelity) {
    result.fidelity = Fidelity{rouge_l_recall(text, result.output_text),
                               tfidf_cosine(text, result.output_text)};
  }
  result.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace fleetplan
