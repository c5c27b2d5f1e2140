#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "alceval/ranks.hpp"
#include "alceval/trajectory.hpp"

namespace alceval {

// ---------------------------------------------------------------------------
// AUC
// ---------------------------------------------------------------------------

// Mann-Whitney AUC with average ranks for ties:
//   P(score+ > score-) + 0.5 * P(score+ = score-).
// Rank sums over <= 2^26 samples are exact in doubles (all multiples of 0.5),
// so equal rankings produce bitwise-equal results.
inline double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("auc: length mismatch");
  if (scores.empty()) throw std::invalid_argument("auc: empty input");

  std::int64_t n_pos = 0;
  for (int y : labels) n_pos += (y != 0);
  const std::int64_t n_neg = static_cast<std::int64_t>(labels.size()) - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("AUC undefined: labels contain a single class");

  const auto ranks = average_ranks(scores);
  double rank_sum_pos = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] != 0) rank_sum_pos += ranks[i];

  const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// ---------------------------------------------------------------------------
// ALC and its weight decomposition
// ---------------------------------------------------------------------------

// Area under the learning curve: trapezoids of AUC over the log2 label axis,
// extended at constant AUC_N out to T, normalized to [-1, 1]:
//   ALC = (2 / log2 T) * sum_i avg(AUC_i, AUC_{i+1}) * log2(t_{i+1}/t_i) - 1
// with AUC_{N+1} = AUC_N and t_{N+1} = T.
inline double alc(const LearningTrajectory& curve) {
  if (curve.steps.empty()) throw std::invalid_argument("alc: empty trajectory");
  if (curve.total_pool_size < 2)
    throw std::invalid_argument("alc: pool size must be >= 2 (log2(T) would be zero)");

  const std::size_t n = curve.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double next_auc = (i + 1 < n) ? curve.auc_at(i + 1) : curve.auc_at(i);
    const double next_t =
        (i + 1 < n) ? static_cast<double>(curve.t(i + 1)) : static_cast<double>(curve.total_pool_size);
    const double avg = 0.5 * (curve.auc_at(i) + next_auc);
    sum += avg * std::log2(next_t / static_cast<double>(curve.t(i)));
  }
  return 2.0 * sum / std::log2(static_cast<double>(curve.total_pool_size)) - 1.0;
}

// Canonical middle weight w_i = log2(1 + 1/(i-1)), i >= 2: the weight a step
// carries under the constant-stride pattern t_i = (i-1) * t_2.
inline double alc_weight(std::size_t i) {
  if (i < 2) throw std::invalid_argument("alc_weight: defined for i >= 2");
  return std::log2(1.0 + 1.0 / static_cast<double>(i - 1));
}

// Per-step ALC weights and averaged AUC terms. first_weight multiplies
// avg(AUC_1, AUC_2), each middle weight multiplies the next averaged pair,
// last_weight multiplies AUC_N alone.
struct WeightDecomposition {
  double first_weight = 0.0;                // log2(t_2 / t_1) = log2(n_2 + 1)
  std::vector<double> middle_weights;       // i = 2..N-1: log2(t_{i+1} / t_i)
  double last_weight = 0.0;                 // log2(T / t_N)
  std::vector<double> averaged_aucs;        // size N; last entry is AUC_N
};

// Exact for any trajectory: weights are the actual log ratios, which reduce
// to the canonical w_i when the steps follow the constant-stride pattern.
inline WeightDecomposition decompose_weights(const LearningTrajectory& curve) {
  const std::size_t n = curve.size();
  if (n < 2) throw std::invalid_argument("decompose_weights: need at least 2 steps");

  WeightDecomposition d;
  d.first_weight = std::log2(static_cast<double>(curve.t(1)) / static_cast<double>(curve.t(0)));
  for (std::size_t i = 1; i + 1 < n; ++i)
    d.middle_weights.push_back(
        std::log2(static_cast<double>(curve.t(i + 1)) / static_cast<double>(curve.t(i))));
  d.last_weight = std::log2(static_cast<double>(curve.total_pool_size) /
                            static_cast<double>(curve.last_t()));

  d.averaged_aucs.reserve(n);
  for (std::size_t i = 0; i + 1 < n; ++i)
    d.averaged_aucs.push_back(0.5 * (curve.auc_at(i) + curve.auc_at(i + 1)));
  d.averaged_aucs.push_back(curve.auc_at(n - 1));
  return d;
}

// Reassembles ALC from a decomposition; agrees with alc() to rounding error.
inline double alc_from_decomposition(const WeightDecomposition& d, std::int64_t total_pool_size) {
  if (total_pool_size < 2) throw std::invalid_argument("alc_from_decomposition: pool size < 2");
  double sum = d.first_weight * d.averaged_aucs.front();
  for (std::size_t i = 0; i < d.middle_weights.size(); ++i)
    sum += d.middle_weights[i] * d.averaged_aucs[i + 1];
  sum += d.last_weight * d.averaged_aucs.back();
  return 2.0 * sum / std::log2(static_cast<double>(total_pool_size)) - 1.0;
}

// ---------------------------------------------------------------------------
// Binary (two-step) strategy score
// ---------------------------------------------------------------------------

// ALC of the two-step trajectory (1, auc1), (t2 - 1, auc2):
//   (2 / log2 T) * [ avg(auc1, auc2) * log2 t2 + auc2 * log2(T / t2) ] - 1.
inline double alc2(double auc1, double auc2, std::int64_t t2, std::int64_t total_pool_size) {
  if (auc1 < 0.0 || auc1 > 1.0 || auc2 < 0.0 || auc2 > 1.0)
    throw std::invalid_argument("alc2: AUC outside [0,1]");
  if (t2 <= 1) throw std::invalid_argument("alc2: t2 must exceed 1");
  if (t2 > total_pool_size) throw std::invalid_argument("alc2: t2 exceeds pool size");
  if (total_pool_size < 2) throw std::invalid_argument("alc2: pool size must be >= 2");

  const double log_t2 = std::log2(static_cast<double>(t2));
  const double log_total = std::log2(static_cast<double>(total_pool_size));
  return 2.0 * (0.5 * (auc1 + auc2) * log_t2 + auc2 * (log_total - log_t2)) / log_total - 1.0;
}

// Affine image of alc2 with the scale and shift dropped; shares its argmax
// over t. Used by optimal stopping to cross-check the exact form.
inline double alc2_affine_objective(double auc1, double auc2, double t, double total_pool_size) {
  return 0.5 * std::log2(t) * (auc1 - auc2) + auc2 * std::log2(total_pool_size);
}

// alc2 as a function of the first entry, emitted as a plot-ready table.
inline std::vector<std::pair<double, double>> alc2_sweep(std::span<const double> auc1_grid,
                                                         double auc2, std::int64_t t2,
                                                         std::int64_t total_pool_size) {
  std::vector<std::pair<double, double>> out;
  out.reserve(auc1_grid.size());
  for (double a1 : auc1_grid) out.emplace_back(a1, alc2(a1, auc2, t2, total_pool_size));
  return out;
}

// ---------------------------------------------------------------------------
// Proposed replacement criteria
// ---------------------------------------------------------------------------

// The ALC formula applied to the sub-curve with t_i >= delta, renormalized to
// the restricted log span log2(T / t_start). Steps below delta do not count.
inline double truncated_alc(const LearningTrajectory& curve, double delta) {
  if (delta < 1.0) throw std::invalid_argument("truncated_alc: delta must be >= 1");
  const std::size_t n = curve.size();
  std::size_t start = 0;
  while (start < n && static_cast<double>(curve.t(start)) < delta) ++start;
  if (start == n)
    throw std::invalid_argument("truncated_alc: trajectory ends before delta=" +
                                std::to_string(delta));

  const double t_start = static_cast<double>(curve.t(start));
  const double span = std::log2(static_cast<double>(curve.total_pool_size)) - std::log2(t_start);
  if (span <= 0.0) return 2.0 * curve.auc_at(n - 1) - 1.0;  // single point at t = T

  double sum = 0.0;
  for (std::size_t i = start; i < n; ++i) {
    const double next_auc = (i + 1 < n) ? curve.auc_at(i + 1) : curve.auc_at(i);
    const double next_t =
        (i + 1 < n) ? static_cast<double>(curve.t(i + 1)) : static_cast<double>(curve.total_pool_size);
    sum += 0.5 * (curve.auc_at(i) + next_auc) * std::log2(next_t / static_cast<double>(curve.t(i)));
  }
  return 2.0 * sum / span - 1.0;
}

// Regulation parameters for the penalized-maximum criterion, plus the
// calibration anchors used to derive the slope.
struct CriterionParams {
  double delta = 0.0;        // label count below which no penalty applies
  double alpha = 0.0;        // penalty slope per label beyond delta
  double horizon = 0.0;      // calibration horizon, the far anchor's label count
  double anchor_low = 0.0;   // expected AUC at delta
  double anchor_high = 0.0;  // expected AUC at horizon

  void validate(std::int64_t total_pool_size) const {
    if (!(delta > 0.0)) throw std::invalid_argument("criterion params: delta must be positive");
    if (!(alpha > 0.0)) throw std::invalid_argument("criterion params: alpha must be positive");
    if (!(delta < horizon) || !(horizon <= static_cast<double>(total_pool_size)))
      throw std::invalid_argument("criterion params: need 0 < delta < horizon <= pool size");
    if (anchor_high < anchor_low)
      throw std::invalid_argument("criterion params: high anchor below low anchor");
  }
};

// Slope that makes the anchors (delta, anchor_low) and (horizon, anchor_high)
// score equally:  alpha = delta / (horizon - delta) * (high / low - 1).
inline double calibrate_alpha(double delta, double horizon, double anchor_low,
                              double anchor_high) {
  if (!(delta > 0.0) || !(horizon > delta))
    throw std::invalid_argument("calibrate_alpha: need 0 < delta < horizon");
  if (!(anchor_low > 0.0)) throw std::invalid_argument("calibrate_alpha: low anchor must be > 0");
  const double alpha = delta / (horizon - delta) * (anchor_high / anchor_low - 1.0);
  if (!(alpha > 0.0))
    throw std::invalid_argument(
        "calibrate_alpha: anchors give a non-positive slope (high anchor must exceed low)");
  return alpha;
}

// Defaults for contest-scale pools: delta = min(0.01 T, 200), horizon = 0.2 T,
// and a 1.5x AUC growth expectation between the anchors.
inline CriterionParams default_criterion_params(std::int64_t total_pool_size) {
  CriterionParams p;
  p.delta = std::min(0.01 * static_cast<double>(total_pool_size), 200.0);
  p.horizon = 0.2 * static_cast<double>(total_pool_size);
  p.anchor_low = 0.5;
  p.anchor_high = 0.75;
  p.alpha = calibrate_alpha(p.delta, p.horizon, p.anchor_low, p.anchor_high);
  return p;
}

struct QCriterionResult {
  double q_max = 0.0;
  std::vector<double> per_step;
};

// Q = max_i  delta * AUC_i / (delta + alpha * max(0, t_i - delta)).
// Equal footing below delta, linear penalty beyond it.
inline QCriterionResult q_criterion(const LearningTrajectory& curve,
                                    const CriterionParams& params) {
  params.validate(curve.total_pool_size);
  QCriterionResult r;
  r.per_step.reserve(curve.size());
  for (const auto& step : curve.steps) {
    const double over = std::max(0.0, static_cast<double>(step.cumulative_labels) - params.delta);
    // below delta the ratio is exactly AUC_i; skip the round trip through it
    r.per_step.push_back(over == 0.0
                             ? step.auc
                             : params.delta * step.auc / (params.delta + params.alpha * over));
  }
  r.q_max = *std::max_element(r.per_step.begin(), r.per_step.end());
  return r;
}

// ---------------------------------------------------------------------------
// Sensitivity of ALC to the second entry
// ---------------------------------------------------------------------------

struct SensitivityResult {
  double alc_before = 0.0;
  double alc_after = 0.0;
};

// Replaces AUC_2 by the average of its neighbours and recomputes ALC. With a
// flat or sagging second entry this strictly raises the score, which is the
// lever the first-step weight hands to lucky starts.
inline SensitivityResult second_point_sensitivity(const LearningTrajectory& curve) {
  if (curve.size() < 3)
    throw std::invalid_argument("second_point_sensitivity: need at least 3 steps");
  SensitivityResult r;
  r.alc_before = alc(curve);
  LearningTrajectory modified = curve;
  modified.steps[1].auc = 0.5 * (curve.auc_at(0) + curve.auc_at(2));
  r.alc_after = alc(modified);
  return r;
}

}  // namespace alceval
