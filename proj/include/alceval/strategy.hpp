#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "alceval/criteria.hpp"
#include "alceval/random.hpp"

namespace alceval {

enum class QueryRationale { knee, random, jump, mixed };

inline const char* to_string(QueryRationale r) {
  switch (r) {
    case QueryRationale::knee: return "knee";
    case QueryRationale::random: return "random";
    case QueryRationale::jump: return "jump";
    case QueryRationale::mixed: return "mixed";
  }
  return "?";
}

// A set of pool indices to purchase, all unlabeled at issue time.
struct QueryBatch {
  std::vector<std::size_t> indices;
  QueryRationale rationale = QueryRationale::random;
};

// ---------------------------------------------------------------------------
// Knee detection on the sorted decision curve
// ---------------------------------------------------------------------------

struct KneeDetection {
  std::size_t knee_position = 0;   // position on the ascending-sorted curve
  bool fallback_median = false;    // curvature-free input, median used
  bool prefer_lower_side = true;   // which side of the knee is smoother
};

// Locates where the sorted decision curve settles from the steep high-score
// flank into the bulk: both axes normalized to [0,1], values smoothed with a
// centered moving average (window max(5, n/200), shrinking symmetrically at
// the edges), knee = argmax of discrete curvature with derivatives taken at
// the window scale, so the macro bend wins over per-sample noise. The search
// covers the upper half of the sorted order: the protocol assumes imbalanced
// pools whose positives gather at the top of the decision function, and the
// transition of interest is the one adjacent to that flank. Inputs whose
// curvature range is below 1e-9 (straight lines) fall back to the median.
inline KneeDetection detect_knee(std::span<const double> sorted_values) {
  const std::size_t n = sorted_values.size();
  KneeDetection result;
  result.knee_position = n / 2;
  if (n < 3) {
    result.fallback_median = true;
    return result;
  }

  const double lo = sorted_values.front();
  const double hi = sorted_values.back();
  if (!(hi > lo)) {
    result.fallback_median = true;
    return result;
  }

  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = (sorted_values[i] - lo) / (hi - lo);

  std::size_t window = std::max<std::size_t>(5, n / 200);
  window |= 1;  // centered average needs an odd width
  const std::size_t radius = window / 2;

  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + y[i];
  std::vector<double> smooth(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = std::min({radius, i, n - 1 - i});
    smooth[i] = (prefix[i + r + 1] - prefix[i - r]) / static_cast<double>(2 * r + 1);
  }

  const std::size_t stencil = std::min(window, (n - 1) / 2);
  const std::size_t search_from = std::max(stencil, n / 2);
  if (search_from + stencil >= n) {
    result.fallback_median = true;
    return result;
  }

  const double h = static_cast<double>(stencil) / static_cast<double>(n - 1);
  std::vector<double> curvature(n, 0.0);
  double max_curv = 0.0, min_curv = 0.0;
  bool first = true;
  std::size_t best = n / 2;
  for (std::size_t i = search_from; i + stencil < n; ++i) {
    const double d1 = (smooth[i + stencil] - smooth[i - stencil]) / (2.0 * h);
    const double d2 = (smooth[i + stencil] - 2.0 * smooth[i] + smooth[i - stencil]) / (h * h);
    const double k = std::abs(d2) / std::pow(1.0 + d1 * d1, 1.5);
    curvature[i] = k;
    if (first) {
      max_curv = min_curv = k;
      best = i;
      first = false;
    } else {
      if (k > max_curv) {  // strict: ties go to the lower position
        max_curv = k;
        best = i;
      }
      if (k < min_curv) min_curv = k;
    }
  }

  if (first || max_curv - min_curv < 1e-9) {
    result.fallback_median = true;
    result.knee_position = n / 2;
    return result;
  }

  result.knee_position = best;

  // Smoother side: the one with the smaller mean curvature over a window.
  double below = 0.0, above = 0.0;
  std::size_t below_count = 0, above_count = 0;
  for (std::size_t k = 1; k <= window; ++k) {
    if (best >= k + 1 && curvature[best - k] != 0.0) {
      below += curvature[best - k];
      ++below_count;
    }
    if (best + k + 1 < n && curvature[best + k] != 0.0) {
      above += curvature[best + k];
      ++above_count;
    }
  }
  if (below_count > 0) below /= static_cast<double>(below_count);
  if (above_count > 0) above /= static_cast<double>(above_count);
  result.prefer_lower_side = below <= above;
  return result;
}

// Selects the batch_size unlabeled samples whose positions on the
// ascending-sorted decision curve lie closest to the detected knee;
// equidistant candidates break toward the smoother side.
inline QueryBatch knee_select(std::span<const double> decision,
                              const std::vector<std::uint8_t>& unlabeled_mask,
                              std::size_t batch_size) {
  if (decision.size() != unlabeled_mask.size())
    throw std::invalid_argument("knee_select: mask length mismatch");
  if (batch_size == 0) throw std::invalid_argument("knee_select: empty batch");

  std::size_t available = 0;
  for (auto m : unlabeled_mask) available += (m != 0);
  if (available < batch_size)
    throw std::invalid_argument("knee_select: only " + std::to_string(available) +
                                " unlabeled samples for a batch of " + std::to_string(batch_size));

  const auto order = sort_permutation(decision);
  std::vector<double> sorted(decision.size());
  for (std::size_t p = 0; p < order.size(); ++p) sorted[p] = decision[order[p]];
  const KneeDetection knee = detect_knee(sorted);

  struct Candidate {
    std::size_t distance;
    int side_penalty;
    std::size_t position;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(available);
  for (std::size_t p = 0; p < order.size(); ++p) {
    if (!unlabeled_mask[order[p]]) continue;
    const std::size_t dist = p >= knee.knee_position ? p - knee.knee_position
                                                     : knee.knee_position - p;
    const bool lower = p < knee.knee_position;
    const int penalty = (lower == knee.prefer_lower_side) ? 0 : 1;
    candidates.push_back({dist, penalty, p});
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    if (a.side_penalty != b.side_penalty) return a.side_penalty < b.side_penalty;
    return a.position < b.position;
  });

  QueryBatch batch;
  batch.rationale = QueryRationale::knee;
  batch.indices.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) batch.indices.push_back(order[candidates[i].position]);
  std::sort(batch.indices.begin(), batch.indices.end());
  return batch;
}

// ---------------------------------------------------------------------------
// Random selection
// ---------------------------------------------------------------------------

inline QueryBatch random_select(const std::vector<std::uint8_t>& unlabeled_mask,
                                std::size_t batch_size, Rng& rng) {
  std::vector<std::size_t> unlabeled;
  for (std::size_t i = 0; i < unlabeled_mask.size(); ++i)
    if (unlabeled_mask[i]) unlabeled.push_back(i);
  if (batch_size > unlabeled.size())
    throw std::invalid_argument("random_select: batch exceeds unlabeled count");
  if (batch_size == 0) throw std::invalid_argument("random_select: empty batch");
  QueryBatch batch;
  batch.rationale = QueryRationale::random;
  batch.indices = sample_without_replacement(std::move(unlabeled), batch_size, rng);
  return batch;
}

inline QueryBatch random_select(const std::vector<std::uint8_t>& unlabeled_mask,
                                std::size_t batch_size, std::uint64_t seed) {
  Rng rng(seed);
  return random_select(unlabeled_mask, batch_size, rng);
}

// ---------------------------------------------------------------------------
// Big-jump schedule
// ---------------------------------------------------------------------------

// Two-step schedule: one initial label, then one large random purchase of
// round(fraction * T) labels, clamped so the total never exceeds the pool.
inline std::vector<std::int64_t> jump_schedule(std::int64_t total_pool_size, double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0)
    throw std::invalid_argument("jump_schedule: fraction must lie in (0,1]");
  const std::int64_t requested = std::llround(fraction * static_cast<double>(total_pool_size));
  if (requested < 1)
    throw std::invalid_argument("jump_schedule: fraction*T below one label");
  const std::int64_t second = std::min(requested, total_pool_size - 1);
  if (second < 1) throw std::invalid_argument("jump_schedule: pool too small for a second step");
  return {1, second};
}

// Multi-step schedule for the small-steps strategies: one initial label, a
// first batch, then geometrically growing requests until the budget is spent.
inline std::vector<std::int64_t> ramp_schedule(std::int64_t budget, std::int64_t first_batch = 50,
                                               double growth = 2.0) {
  if (budget < 2) throw std::invalid_argument("ramp_schedule: budget must be >= 2");
  if (first_batch < 1) throw std::invalid_argument("ramp_schedule: first batch must be >= 1");
  if (!(growth >= 1.0)) throw std::invalid_argument("ramp_schedule: growth must be >= 1");
  std::vector<std::int64_t> schedule{1};
  std::int64_t spent = 1;
  std::int64_t next = std::min(first_batch, budget - spent);
  while (spent < budget) {
    const std::int64_t batch = std::min(next, budget - spent);
    schedule.push_back(batch);
    spent += batch;
    next = std::max<std::int64_t>(1, std::llround(static_cast<double>(next) * growth));
  }
  return schedule;
}

// ---------------------------------------------------------------------------
// Optimal stopping for the binary strategy
// ---------------------------------------------------------------------------

enum class GrowthModelKind { table_interpolation, saturating_fit };

// AUC-versus-labels model used to plan the second request: either piecewise
// linear interpolation of observed points (constant beyond the ends) or a
// saturating a*t/(t+k) curve fitted by reciprocal regression.
struct AucGrowthModel {
  std::vector<std::pair<double, double>> observed;  // (t, auc), t strictly increasing
  GrowthModelKind kind = GrowthModelKind::table_interpolation;
  double sat_level = 0.0;  // fitted a
  double sat_scale = 0.0;  // fitted k

  static AucGrowthModel fit(std::vector<std::pair<double, double>> points,
                            GrowthModelKind kind = GrowthModelKind::table_interpolation) {
    if (points.empty()) throw std::invalid_argument("growth model: no observed points");
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (points[i].second < 0.0 || points[i].second > 1.0)
        throw std::invalid_argument("growth model: AUC outside [0,1]");
      if (i > 0 && !(points[i].first > points[i - 1].first))
        throw std::invalid_argument("growth model: t must be strictly increasing");
    }
    AucGrowthModel m;
    m.observed = std::move(points);
    m.kind = kind;
    if (kind == GrowthModelKind::saturating_fit) m.fit_saturating();
    return m;
  }

  double auc_at(double t) const {
    if (kind == GrowthModelKind::saturating_fit)
      return std::clamp(sat_level * t / (t + sat_scale), 0.0, 1.0);
    if (t <= observed.front().first) return observed.front().second;
    if (t >= observed.back().first) return observed.back().second;
    std::size_t hi = 1;
    while (observed[hi].first < t) ++hi;
    const auto& [t0, a0] = observed[hi - 1];
    const auto& [t1, a1] = observed[hi];
    const double w = (t - t0) / (t1 - t0);
    return a0 + w * (a1 - a0);
  }

 private:
  // 1/auc is linear in 1/t for auc = a*t/(t+k); fit that line by least squares.
  void fit_saturating() {
    double su = 0.0, sz = 0.0, suu = 0.0, suz = 0.0;
    std::size_t m = 0;
    for (const auto& [t, a] : observed) {
      if (a <= 0.0 || t <= 0.0) continue;
      const double u = 1.0 / t;
      const double z = 1.0 / a;
      su += u;
      sz += z;
      suu += u * u;
      suz += u * z;
      ++m;
    }
    if (m < 2) throw std::invalid_argument("growth model: saturating fit needs >= 2 usable points");
    const double denom = static_cast<double>(m) * suu - su * su;
    if (denom == 0.0) throw std::invalid_argument("growth model: degenerate saturating fit");
    const double slope = (static_cast<double>(m) * suz - su * sz) / denom;
    const double icpt = (sz - slope * su) / static_cast<double>(m);
    if (!(icpt > 0.0)) throw std::invalid_argument("growth model: saturating fit not increasing");
    sat_level = std::min(1.0 / icpt, 1.0);
    sat_scale = std::max(slope / icpt, 0.0);
  }
};

struct OptimalStop {
  std::int64_t t_star = 0;
  double alc2_star = 0.0;
};

namespace detail {

inline std::vector<std::int64_t> stopping_grid(std::int64_t total_pool_size) {
  std::vector<std::int64_t> grid;
  if (total_pool_size <= 100000) {
    grid.reserve(static_cast<std::size_t>(total_pool_size - 1));
    for (std::int64_t t = 2; t <= total_pool_size; ++t) grid.push_back(t);
    return grid;
  }
  // geometric grid, deduplicated, with integer neighbours added around each
  // node so local refinement is built in
  const int points = 10000;
  std::int64_t prev = 0;
  for (int j = 0; j < points; ++j) {
    const double x = 2.0 * std::pow(static_cast<double>(total_pool_size) / 2.0,
                                    static_cast<double>(j) / (points - 1));
    const std::int64_t t = std::clamp<std::int64_t>(std::llround(x), 2, total_pool_size);
    for (std::int64_t cand = std::max<std::int64_t>(2, t - 1);
         cand <= std::min(total_pool_size, t + 1); ++cand)
      if (cand > prev) {
        grid.push_back(cand);
        prev = cand;
      }
  }
  return grid;
}

}  // namespace detail

// Maximizes alc2(auc1, model(t), t, T) over the integer grid; lowest t wins
// ties. The affine-form objective is maximized alongside and must agree on
// the argmax (affine maps preserve it) -- a violated check is a logic error.
inline OptimalStop optimal_stop(const AucGrowthModel& model, double auc1,
                                std::int64_t total_pool_size) {
  if (model.kind == GrowthModelKind::table_interpolation && model.observed.empty())
    throw std::invalid_argument("optimal_stop: empty model");
  if (total_pool_size < 2) throw std::invalid_argument("optimal_stop: pool size must be >= 2");

  const auto grid = detail::stopping_grid(total_pool_size);
  OptimalStop best;
  double best_exact = 0.0, best_affine = 0.0;
  std::int64_t best_affine_t = 0;
  bool first = true;
  for (std::int64_t t : grid) {
    const double auc2 = model.auc_at(static_cast<double>(t));
    const double exact = alc2(auc1, auc2, t, total_pool_size);
    const double affine = alc2_affine_objective(auc1, auc2, static_cast<double>(t),
                                                static_cast<double>(total_pool_size));
    if (first || exact > best_exact) {
      best_exact = exact;
      best.t_star = t;
    }
    if (first || affine > best_affine) {
      best_affine = affine;
      best_affine_t = t;
    }
    first = false;
  }
  if (best_affine_t != best.t_star)
    throw std::logic_error("optimal_stop: exact and affine objectives disagree on the argmax");
  best.alc2_star = best_exact;
  return best;
}

}  // namespace alceval
