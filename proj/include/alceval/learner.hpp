#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "alceval/matrix.hpp"
#include "alceval/random.hpp"
#include "alceval/ranks.hpp"

namespace alceval {

// ---------------------------------------------------------------------------
// Rank alignment and score blending
// ---------------------------------------------------------------------------

// Rearranges x1's values to carry x2's ranking: x3[i] is the (rank of x2[i])-th
// smallest value of x1. The multiset of values is x1's, the ordering is x2's,
// so downstream rank metrics see x2 unchanged. Ties in x2 resolve by original
// index order (stable sort); that ordering is part of the contract.
inline std::vector<double> rank_align(std::span<const double> x1, std::span<const double> x2) {
  if (x1.size() != x2.size()) throw std::invalid_argument("rank_align: length mismatch");
  if (x1.empty()) throw std::invalid_argument("rank_align: empty input");

  std::vector<double> sorted_x1(x1.begin(), x1.end());
  std::sort(sorted_x1.begin(), sorted_x1.end());

  const auto order = sort_permutation(x2);
  std::vector<double> x3(x2.size());
  for (std::size_t position = 0; position < order.size(); ++position)
    x3[order[position]] = sorted_x1[position];
  return x3;
}

// Two solutions, the second rank-adjusted onto the first's scale, and their
// convex combination x_ens = tau * x1 + (1 - tau) * x3.
struct EnsembleSpec {
  std::vector<double> x1;
  std::vector<double> x2;
  std::vector<double> x3;
  std::vector<double> x_ens;
  double tau = 0.5;
};

inline EnsembleSpec blend(std::span<const double> x1, std::span<const double> x2, double tau) {
  if (!(tau > 0.0) || !(tau < 1.0))
    throw std::invalid_argument("blend: tau must lie strictly inside (0,1)");
  EnsembleSpec spec;
  spec.tau = tau;
  spec.x1.assign(x1.begin(), x1.end());
  spec.x2.assign(x2.begin(), x2.end());
  spec.x3 = rank_align(x1, x2);
  spec.x_ens.resize(x1.size());
  for (std::size_t i = 0; i < x1.size(); ++i)
    spec.x_ens[i] = tau * x1[i] + (1.0 - tau) * spec.x3[i];
  return spec;
}

// ---------------------------------------------------------------------------
// Cold-start bootstrap scorer
// ---------------------------------------------------------------------------

struct BootstrapConfig {
  int num_sets = 64;             // random pseudo-negative sets to average over
  int negatives_per_set = 25;
  double distance_quantile = 0.5;  // pseudo-negatives must lie beyond this quantile
                                   // of distances to the positive
};

// Scores the whole pool from one positive plus a list of assumed negatives.
using BaseScorer = std::function<std::vector<double>(
    const RowMatrix& features, std::size_t positive_index,
    std::span<const std::size_t> negative_indices)>;

// Default base scorer: distance to the pseudo-negative centroid minus distance
// to the positive. Trainable from a single positive example.
inline std::vector<double> centroid_base_scorer(const RowMatrix& features,
                                                std::size_t positive_index,
                                                std::span<const std::size_t> negative_indices) {
  if (negative_indices.empty())
    throw std::invalid_argument("centroid_base_scorer: empty negative set");
  const auto positive = features.row(positive_index);
  std::vector<double> negative_centroid(features.cols, 0.0);
  for (std::size_t idx : negative_indices) {
    const auto row = features.row(idx);
    for (std::size_t c = 0; c < features.cols; ++c) negative_centroid[c] += row[c];
  }
  for (double& v : negative_centroid) v /= static_cast<double>(negative_indices.size());

  std::vector<double> scores(features.rows);
  for (std::size_t r = 0; r < features.rows; ++r) {
    const auto row = features.row(r);
    scores[r] = euclidean_distance(row, negative_centroid) - euclidean_distance(row, positive);
  }
  return scores;
}

// Samples the per-set pseudo-negative index lists. Eligible samples are those
// strictly beyond the distance_quantile of all distances to the positive.
// Set r draws from substream (seed, r), so set order never matters.
inline std::vector<std::vector<std::size_t>> bootstrap_sets(const RowMatrix& features,
                                                            std::size_t positive_index,
                                                            const BootstrapConfig& config,
                                                            std::uint64_t seed) {
  if (config.num_sets < 1) throw std::invalid_argument("bootstrap: num_sets must be >= 1");
  if (config.negatives_per_set < 1)
    throw std::invalid_argument("bootstrap: negatives_per_set must be >= 1");
  if (!(config.distance_quantile > 0.0) || !(config.distance_quantile < 1.0))
    throw std::invalid_argument("bootstrap: distance_quantile must lie in (0,1)");
  if (features.rows < static_cast<std::size_t>(config.negatives_per_set) + 1)
    throw std::invalid_argument("bootstrap: pool smaller than negatives_per_set + 1");
  if (positive_index >= features.rows)
    throw std::out_of_range("bootstrap: positive_index out of range");

  const auto positive = features.row(positive_index);
  std::vector<double> distances;
  std::vector<std::size_t> others;
  distances.reserve(features.rows - 1);
  others.reserve(features.rows - 1);
  for (std::size_t r = 0; r < features.rows; ++r) {
    if (r == positive_index) continue;
    others.push_back(r);
    distances.push_back(euclidean_distance(features.row(r), positive));
  }

  std::vector<double> sorted = distances;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t q_index = static_cast<std::size_t>(
      std::llround(config.distance_quantile * static_cast<double>(sorted.size() - 1)));
  const double threshold = sorted[q_index];

  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < others.size(); ++i)
    if (distances[i] > threshold) eligible.push_back(others[i]);
  if (eligible.empty())
    throw std::invalid_argument("bootstrap: no samples beyond the distance quantile");
  if (eligible.size() < static_cast<std::size_t>(config.negatives_per_set))
    throw std::invalid_argument("bootstrap: fewer eligible pseudo-negatives than requested");

  std::vector<std::vector<std::size_t>> sets;
  sets.reserve(config.num_sets);
  for (int r = 0; r < config.num_sets; ++r) {
    Rng rng(seed, static_cast<std::uint64_t>(r));
    sets.push_back(sample_without_replacement(
        eligible, static_cast<std::size_t>(config.negatives_per_set), rng));
  }
  return sets;
}

// Decision function = per-sample average of the base scorer over the given sets.
inline std::vector<double> bootstrap_score_sets(const RowMatrix& features,
                                                std::size_t positive_index,
                                                const std::vector<std::vector<std::size_t>>& sets,
                                                const BaseScorer& scorer = centroid_base_scorer) {
  if (sets.empty()) throw std::invalid_argument("bootstrap: no sets");
  std::vector<double> total(features.rows, 0.0);
  for (const auto& set : sets) {
    const auto scores = scorer(features, positive_index, set);
    for (std::size_t r = 0; r < features.rows; ++r) total[r] += scores[r];
  }
  for (double& v : total) v /= static_cast<double>(sets.size());
  return total;
}

inline std::vector<double> bootstrap_score(const RowMatrix& features, std::size_t positive_index,
                                           const BootstrapConfig& config, std::uint64_t seed,
                                           const BaseScorer& scorer = centroid_base_scorer) {
  return bootstrap_score_sets(features, positive_index,
                              bootstrap_sets(features, positive_index, config, seed), scorer);
}

// ---------------------------------------------------------------------------
// Regularized linear scorer
// ---------------------------------------------------------------------------

// Column standardizer fitted on the labeled rows. Constant columns map to
// zeros rather than dividing by a zero spread.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const RowMatrix& features, std::span<const std::size_t> rows) {
    if (rows.empty()) throw std::invalid_argument("standardizer: no rows");
    Standardizer s;
    s.mean.assign(features.cols, 0.0);
    s.scale.assign(features.cols, 1.0);
    for (std::size_t r : rows) {
      const auto row = features.row(r);
      for (std::size_t c = 0; c < features.cols; ++c) s.mean[c] += row[c];
    }
    for (double& m : s.mean) m /= static_cast<double>(rows.size());
    std::vector<double> var(features.cols, 0.0);
    for (std::size_t r : rows) {
      const auto row = features.row(r);
      for (std::size_t c = 0; c < features.cols; ++c) {
        const double d = row[c] - s.mean[c];
        var[c] += d * d;
      }
    }
    for (std::size_t c = 0; c < features.cols; ++c) {
      const double sd = std::sqrt(var[c] / static_cast<double>(rows.size()));
      s.scale[c] = sd > 0.0 ? sd : 1.0;
    }
    return s;
  }

  RowMatrix apply(const RowMatrix& features) const {
    RowMatrix out(features.rows, features.cols);
    for (std::size_t r = 0; r < features.rows; ++r)
      for (std::size_t c = 0; c < features.cols; ++c)
        out(r, c) = (features(r, c) - mean[c]) / scale[c];
    return out;
  }
};

struct LinearModel {
  std::vector<double> weights;
  double intercept = 0.0;
};

namespace detail {

// Solves A x = b for symmetric positive definite A, in place.
inline std::vector<double> cholesky_solve(std::vector<double> a, std::vector<double> b,
                                          std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) diag -= a[j * n + k] * a[j * n + k];
    if (!(diag > 0.0))
      throw std::runtime_error("linear_fit: system not positive definite (try a larger penalty)");
    const double root = std::sqrt(diag);
    a[j * n + j] = root;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) v -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = v / root;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {  // forward: L y = b
    double v = b[i];
    for (std::size_t k = 0; k < i; ++k) v -= a[i * n + k] * b[k];
    b[i] = v / a[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {  // backward: L^T x = y
    double v = b[i];
    for (std::size_t k = i + 1; k < n; ++k) v -= a[k * n + i] * b[k];
    b[i] = v / a[i * n + i];
  }
  return b;
}

}  // namespace detail

// Ridge least squares on +/-1 targets with an unpenalized intercept:
// minimizes ||X w + b - y||^2 + penalty * ||w||^2. Solved via centered
// normal equations and a Cholesky factorization.
inline LinearModel linear_fit(const RowMatrix& features, std::span<const int> labels,
                              double ridge_penalty) {
  if (features.rows != labels.size()) throw std::invalid_argument("linear_fit: length mismatch");
  if (features.rows < 2) throw std::invalid_argument("linear_fit: need at least 2 samples");
  if (ridge_penalty < 0.0) throw std::invalid_argument("linear_fit: negative penalty");

  std::size_t n_pos = 0;
  for (int y : labels) n_pos += (y != 0);
  if (n_pos == 0 || n_pos == labels.size())
    throw std::invalid_argument("linear_fit: labels contain a single class");

  const std::size_t n = features.rows;
  const std::size_t d = features.cols;

  std::vector<double> target(n);
  for (std::size_t i = 0; i < n; ++i) target[i] = labels[i] != 0 ? 1.0 : -1.0;

  std::vector<double> col_mean(d, 0.0);
  double y_mean = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = features.row(r);
    for (std::size_t c = 0; c < d; ++c) col_mean[c] += row[c];
    y_mean += target[r];
  }
  for (double& m : col_mean) m /= static_cast<double>(n);
  y_mean /= static_cast<double>(n);

  std::vector<double> gram(d * d, 0.0);
  std::vector<double> moment(d, 0.0);
  std::vector<double> centered(d);
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = features.row(r);
    for (std::size_t c = 0; c < d; ++c) centered[c] = row[c] - col_mean[c];
    const double yc = target[r] - y_mean;
    for (std::size_t i = 0; i < d; ++i) {
      moment[i] += centered[i] * yc;
      for (std::size_t j = i; j < d; ++j) gram[i * d + j] += centered[i] * centered[j];
    }
  }
  for (std::size_t i = 0; i < d; ++i) {
    gram[i * d + i] += ridge_penalty;
    for (std::size_t j = i + 1; j < d; ++j) gram[j * d + i] = gram[i * d + j];
  }

  LinearModel model;
  model.weights = detail::cholesky_solve(std::move(gram), std::move(moment), d);
  model.intercept = y_mean;
  for (std::size_t c = 0; c < d; ++c) model.intercept -= col_mean[c] * model.weights[c];
  return model;
}

inline std::vector<double> linear_score(const LinearModel& model, const RowMatrix& features) {
  if (features.cols != model.weights.size())
    throw std::invalid_argument("linear_score: feature width mismatch");
  std::vector<double> scores(features.rows, model.intercept);
  for (std::size_t r = 0; r < features.rows; ++r) {
    const auto row = features.row(r);
    double s = scores[r];
    for (std::size_t c = 0; c < features.cols; ++c) s += row[c] * model.weights[c];
    scores[r] = s;
  }
  return scores;
}

// ---------------------------------------------------------------------------
// Wilcoxon feature scoring
// ---------------------------------------------------------------------------

// Per-feature |standardized rank sum| of the positive class, average ranks
// for ties, no tie correction of the spread. Larger = more discriminative;
// a constant feature scores exactly zero.
inline std::vector<double> wilcoxon_scores(const RowMatrix& features,
                                           std::span<const int> labels) {
  if (features.rows != labels.size())
    throw std::invalid_argument("wilcoxon_scores: length mismatch");
  std::int64_t n_pos = 0;
  for (int y : labels) n_pos += (y != 0);
  const std::int64_t n_neg = static_cast<std::int64_t>(labels.size()) - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("wilcoxon_scores: labels contain a single class");

  const double n = static_cast<double>(labels.size());
  const double expected = static_cast<double>(n_pos) * (n + 1.0) / 2.0;
  const double spread =
      std::sqrt(static_cast<double>(n_pos) * static_cast<double>(n_neg) * (n + 1.0) / 12.0);

  std::vector<double> column(features.rows);
  std::vector<double> scores(features.cols);
  for (std::size_t c = 0; c < features.cols; ++c) {
    for (std::size_t r = 0; r < features.rows; ++r) column[r] = features(r, c);
    const auto ranks = average_ranks(column);
    double rank_sum = 0.0;
    for (std::size_t r = 0; r < features.rows; ++r)
      if (labels[r] != 0) rank_sum += ranks[r];
    scores[c] = std::abs(rank_sum - expected) / spread;
  }
  return scores;
}

// Indices of the k highest-scoring features, ties toward the lower index.
inline std::vector<std::size_t> top_k_features(std::span<const double> scores, std::size_t k) {
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  order.resize(std::min(k, order.size()));
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace alceval
