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

#ifndef FLEETPLAN_COMPRESSOR_HPP_
#define FLEETPLAN_COMPRESSOR_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "fleetplan/workload.hpp"

namespace fleetplan {

struct SentenceUnit {
  std::size_t index = 0;
  std::string text;
  // Estimated tokens of the text plus one joining separator, so a join of
  // any subset never estimates above the sum of its units.
  Tokens token_count = 0;
  std::vector<std::string> terms;
};

struct CompressorConfig {
  double w_textrank = 0.20;
  double w_position = 0.40;
  double w_tfidf = 0.35;
  double w_novelty = 0.05;
  std::size_t keep_head = 3;
  std::size_t keep_tail = 2;
  double damping = 0.85;
  int max_iterations = 100;
  double convergence_tol = 1e-6;
  // The router's bytes-per-token estimate for the request's category.
  double bytes_per_token = 4.0;

  void validate() const;
};

std::vector<SentenceUnit> split_sentences(std::string_view text, double bytes_per_token = 4.0);

// Each signal is min-max normalized to [0, 1]; a constant signal maps to 1.
Eigen::VectorXd score_textrank(const std::vector<SentenceUnit>& units,
                               const CompressorConfig& config = {});
Eigen::VectorXd score_position(const std::vector<SentenceUnit>& units);
Eigen::VectorXd score_tfidf(const std::vector<SentenceUnit>& units);
Eigen::VectorXd score_novelty(const std::vector<SentenceUnit>& units);

// Unnormalized similarity graph and novelty, exposed for tests.
Eigen::MatrixXd textrank_similarity(const std::vector<SentenceUnit>& units);
Eigen::VectorXd raw_novelty(const std::vector<SentenceUnit>& units);

Eigen::VectorXd min_max_normalize(const Eigen::VectorXd& raw);

struct Fidelity {
  double rouge_l_recall = 0.0;
  double tfidf_cosine = 0.0;
};

struct CompressionResult {
  std::vector<std::size_t> kept_indices;
  std::size_t unit_count = 0;
  std::string output_text;
  Tokens input_tokens = 0;
  Tokens output_tokens = 0;
  double reduction = 0.0;
  bool success = false;
  double elapsed_ms = 0.0;
  std::optional<Fidelity> fidelity;
};

// Extractive compression to at most `budget` estimated tokens.
CompressionResult compress(std::string_view text, Tokens budget, const CompressorConfig& config = {},
                           bool with_fidelity = false);

// Cosine of TF-IDF vectors built over the pair {a, b}.
double tfidf_cosine(std::string_view a, std::string_view b);
// LCS(reference terms, candidate terms) / |reference terms|.
double rouge_l_recall(std::string_view reference, std::string_view candidate);
std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

}  // namespace fleetplan

#endif  // FLEETPLAN_COMPRESSOR_HPP_
