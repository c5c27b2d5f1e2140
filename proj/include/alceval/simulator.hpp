#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "alceval/criteria.hpp"
#include "alceval/learner.hpp"
#include "alceval/matrix.hpp"
#include "alceval/random.hpp"
#include "alceval/strategy.hpp"
#include "alceval/trajectory.hpp"

namespace alceval {

// ---------------------------------------------------------------------------
// Pools
// ---------------------------------------------------------------------------

// Generator settings for a synthetic stand-in pool: two Gaussian clusters
// whose means sit class_separation apart (in noise units), plus pure-noise
// columns, with a controlled positive fraction.
struct SyntheticSpec {
  std::int64_t n_samples = 1000;
  int n_features = 8;
  double positive_fraction = 0.2;
  double class_separation = 3.0;
  int noise_features = 0;
  std::uint64_t seed = 1;
};

// Full simulator state: the features, the labels the oracle hides, which
// labels have been purchased, and the learner's current decision function
// over the whole pool.
struct ScoredPool {
  RowMatrix features;
  std::vector<int> hidden_labels;
  std::vector<std::uint8_t> revealed_mask;
  std::vector<double> decision;
  std::vector<QueryBatch> purchase_log;

  std::int64_t size() const { return static_cast<std::int64_t>(features.rows); }

  std::int64_t revealed_count() const {
    std::int64_t c = 0;
    for (auto m : revealed_mask) c += (m != 0);
    return c;
  }

  std::vector<std::uint8_t> unlabeled_mask() const {
    std::vector<std::uint8_t> inv(revealed_mask.size());
    for (std::size_t i = 0; i < revealed_mask.size(); ++i) inv[i] = revealed_mask[i] ? 0 : 1;
    return inv;
  }
};

inline ScoredPool generate_pool(const SyntheticSpec& spec) {
  if (spec.n_samples < 10) throw std::invalid_argument("generate_pool: need >= 10 samples");
  if (spec.n_features < 1) throw std::invalid_argument("generate_pool: need >= 1 feature");
  if (spec.noise_features < 0) throw std::invalid_argument("generate_pool: negative noise count");
  if (!(spec.positive_fraction > 0.0) || !(spec.positive_fraction < 1.0))
    throw std::invalid_argument("generate_pool: positive_fraction must lie in (0,1)");
  if (spec.class_separation < 0.0)
    throw std::invalid_argument("generate_pool: negative separation");

  const std::size_t n = static_cast<std::size_t>(spec.n_samples);
  const std::int64_t n_pos = std::llround(spec.positive_fraction * static_cast<double>(n));
  if (n_pos < 1 || n_pos >= spec.n_samples)
    throw std::invalid_argument("generate_pool: spec produces a single class");

  ScoredPool pool;
  pool.hidden_labels.assign(n, 0);
  Rng label_rng(spec.seed, 0);
  const auto order = label_rng.permutation(n);
  for (std::int64_t i = 0; i < n_pos; ++i) pool.hidden_labels[order[i]] = 1;

  const std::size_t informative = static_cast<std::size_t>(spec.n_features);
  const std::size_t total_cols = informative + static_cast<std::size_t>(spec.noise_features);
  // per-dimension offset such that the class means sit class_separation apart
  const double offset = 0.5 * spec.class_separation / std::sqrt(static_cast<double>(informative));

  pool.features = RowMatrix(n, total_cols);
  Rng feature_rng(spec.seed, 1);
  for (std::size_t r = 0; r < n; ++r) {
    const double sign = pool.hidden_labels[r] ? 1.0 : -1.0;
    auto row = pool.features.row(r);
    for (std::size_t c = 0; c < informative; ++c) row[c] = sign * offset + feature_rng.gaussian();
    for (std::size_t c = informative; c < total_cols; ++c) row[c] = feature_rng.gaussian();
  }

  pool.revealed_mask.assign(n, 0);
  pool.decision.assign(n, 0.0);
  return pool;
}

// Pool CSV: header `label,f1,...,fk`, one row per sample, labels in {0,1}.
// Leading `#` comment lines (configuration echoes) are skipped on read.
// Runtime state (masks, decision, log) is not persisted.
inline void write_pool_csv(const ScoredPool& pool, const std::filesystem::path& path,
                           const std::vector<std::string>& leading_comments = {}) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  for (const auto& comment : leading_comments) out << "# " << comment << "\n";
  out << "label";
  for (std::size_t c = 0; c < pool.features.cols; ++c) out << ",f" << (c + 1);
  out << "\n";
  for (std::size_t r = 0; r < pool.features.rows; ++r) {
    out << pool.hidden_labels[r];
    const auto row = pool.features.row(r);
    for (double v : row) out << ',' << detail::format_g17(v);
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline ScoredPool read_pool_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  const std::string name = path.string();

  std::string line;
  std::size_t line_no = 0;
  auto where = [&](std::size_t l) { return name + ":" + std::to_string(l); };

  std::string_view header_view;
  for (;;) {
    if (!std::getline(in, line)) throw std::runtime_error(name + ": empty file");
    ++line_no;
    header_view = detail::strip_cr(line);
    if (!header_view.empty() && !header_view.starts_with("#")) break;
  }
  auto header = detail::split_csv(header_view);
  if (header.empty() || header[0] != "label")
    throw std::runtime_error(where(line_no) + ": header must start with 'label'");
  const std::size_t cols = header.size() - 1;
  if (cols == 0) throw std::runtime_error(where(line_no) + ": no feature columns");
  for (std::size_t c = 0; c < cols; ++c)
    if (header[c + 1] != "f" + std::to_string(c + 1))
      throw std::runtime_error(where(line_no) + ": header mismatch, expected f" +
                               std::to_string(c + 1));

  std::vector<int> labels;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = detail::strip_cr(line);
    if (view.empty()) continue;
    const auto fields = detail::split_csv(view);
    if (fields.size() != cols + 1)
      throw std::runtime_error(where(line_no) + ": expected " + std::to_string(cols + 1) +
                               " fields, got " + std::to_string(fields.size()));
    const std::int64_t label = detail::parse_int(fields[0], where(line_no));
    if (label != 0 && label != 1)
      throw std::runtime_error(where(line_no) + ": label must be 0 or 1");
    labels.push_back(static_cast<int>(label));
    for (std::size_t c = 0; c < cols; ++c)
      values.push_back(detail::parse_double(fields[c + 1], where(line_no)));
  }
  if (labels.empty()) throw std::runtime_error(name + ": no samples");

  ScoredPool pool;
  pool.features = RowMatrix(labels.size(), cols);
  pool.features.data = std::move(values);
  pool.hidden_labels = std::move(labels);
  pool.revealed_mask.assign(pool.features.rows, 0);
  pool.decision.assign(pool.features.rows, 0.0);
  return pool;
}

// ---------------------------------------------------------------------------
// Simulation protocol
// ---------------------------------------------------------------------------

struct LearnerConfig {
  std::int64_t switch_threshold = 30;  // revealed labels at which ridge takes over
  double ridge_penalty = 1.0;
  BootstrapConfig bootstrap;
};

enum class StrategyKind { knee, random, jump, mixed };

inline const char* to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::knee: return "knee";
    case StrategyKind::random: return "random";
    case StrategyKind::jump: return "jump";
    case StrategyKind::mixed: return "mixed";
  }
  return "?";
}

inline StrategyKind strategy_kind_from_string(const std::string& s) {
  if (s == "knee") return StrategyKind::knee;
  if (s == "random") return StrategyKind::random;
  if (s == "jump") return StrategyKind::jump;
  if (s == "mixed") return StrategyKind::mixed;
  throw std::invalid_argument("unknown strategy '" + s + "'");
}

struct StrategySpec {
  StrategyKind kind = StrategyKind::knee;
  double jump_fraction = 0.05;
  // Random share of each mixed batch, per step starting from step 2; zero
  // beyond the list. Default halves each step and stops after step 5.
  std::vector<double> mixed_random_fractions = {0.5, 0.25, 0.125, 0.0625};

  std::string name() const { return to_string(kind); }
};

// A finished run: the trajectory plus per-step bookkeeping the criteria
// reports need. carried_forward flags steps whose fit failed and reused the
// previous decision function.
struct SimulationResult {
  LearningTrajectory trajectory;
  std::vector<std::uint8_t> carried_forward;
  std::vector<double> final_decision;
  std::int64_t revealed_total = 0;
  std::int64_t revealed_positives = 0;
};

namespace detail {

inline QueryBatch select_batch(const ScoredPool& pool, const StrategySpec& strategy,
                               std::int64_t batch_size, std::size_t step_index,
                               std::uint64_t seed) {
  const auto unlabeled = pool.unlabeled_mask();
  const std::size_t k = static_cast<std::size_t>(batch_size);
  switch (strategy.kind) {
    case StrategyKind::knee:
      return knee_select(pool.decision, unlabeled, k);
    case StrategyKind::random: {
      Rng rng(seed, step_index);
      return random_select(unlabeled, k, rng);
    }
    case StrategyKind::jump: {
      Rng rng(seed, step_index);
      QueryBatch b = random_select(unlabeled, k, rng);
      b.rationale = QueryRationale::jump;
      return b;
    }
    case StrategyKind::mixed: {
      const std::size_t fraction_index = step_index - 1;  // step 2 -> entry 0
      const double r = fraction_index < strategy.mixed_random_fractions.size()
                           ? strategy.mixed_random_fractions[fraction_index]
                           : 0.0;
      const std::size_t n_random =
          std::min(k, static_cast<std::size_t>(std::llround(r * static_cast<double>(k))));
      QueryBatch batch;
      batch.rationale = QueryRationale::mixed;
      auto remaining = unlabeled;
      if (n_random > 0) {
        Rng rng(seed, step_index);
        const QueryBatch random_part = random_select(remaining, n_random, rng);
        batch.indices = random_part.indices;
        for (std::size_t idx : random_part.indices) remaining[idx] = 0;
      }
      if (n_random < k) {
        const QueryBatch knee_part = knee_select(pool.decision, remaining, k - n_random);
        batch.indices.insert(batch.indices.end(), knee_part.indices.begin(),
                             knee_part.indices.end());
      }
      std::sort(batch.indices.begin(), batch.indices.end());
      return batch;
    }
  }
  throw std::logic_error("select_batch: unreachable");
}

}  // namespace detail

// Replays the challenge protocol: reveal the first positive, then per step
// fit a scorer on the revealed labels (bootstrap below the switch threshold,
// ridge after), score the whole pool, record the full-pool AUC against the
// hidden labels, and purchase the next batch. A failed fit carries the
// previous decision function forward and flags the step.
inline SimulationResult run_simulation(ScoredPool pool, const StrategySpec& strategy,
                                       const LearnerConfig& learner,
                                       std::span<const std::int64_t> schedule,
                                       std::uint64_t seed) {
  if (schedule.empty()) throw std::invalid_argument("run_simulation: empty schedule");
  if (schedule.front() != 1)
    throw std::invalid_argument("run_simulation: schedule must start with the single given label");
  std::int64_t total_requested = 0;
  for (std::int64_t n : schedule) {
    if (n < 1) throw std::invalid_argument("run_simulation: request sizes must be >= 1");
    total_requested += n;
  }
  if (total_requested > pool.size())
    throw std::invalid_argument("run_simulation: schedule exhausts the pool");

  std::fill(pool.revealed_mask.begin(), pool.revealed_mask.end(), 0);
  pool.purchase_log.clear();

  // the one given label: the lowest-indexed positive
  std::size_t initial_positive = pool.hidden_labels.size();
  for (std::size_t i = 0; i < pool.hidden_labels.size(); ++i) {
    if (pool.hidden_labels[i] == 1) {
      initial_positive = i;
      break;
    }
  }
  if (initial_positive == pool.hidden_labels.size())
    throw std::invalid_argument("run_simulation: pool has no positive sample");

  std::vector<std::pair<std::int64_t, double>> requests;
  std::vector<std::uint8_t> carried;
  bool have_decision = false;

  for (std::size_t step = 0; step < schedule.size(); ++step) {
    if (step == 0) {
      pool.revealed_mask[initial_positive] = 1;
      pool.purchase_log.push_back(QueryBatch{{initial_positive}, QueryRationale::random});
    } else {
      QueryBatch batch = detail::select_batch(pool, strategy, schedule[step], step, seed);
      for (std::size_t idx : batch.indices) {
        if (pool.revealed_mask[idx])
          throw std::logic_error("run_simulation: strategy returned a revealed index");
        pool.revealed_mask[idx] = 1;
      }
      pool.purchase_log.push_back(std::move(batch));
    }

    const std::int64_t revealed = pool.revealed_count();
    bool fit_failed = false;
    if (revealed < learner.switch_threshold) {
      try {
        pool.decision = bootstrap_score(pool.features, initial_positive, learner.bootstrap,
                                        mix_seed(seed, 1000 + step));
        have_decision = true;
      } catch (const std::exception&) {
        fit_failed = true;
      }
    } else {
      std::vector<std::size_t> rows;
      std::vector<int> labels;
      for (std::size_t i = 0; i < pool.revealed_mask.size(); ++i) {
        if (pool.revealed_mask[i]) {
          rows.push_back(i);
          labels.push_back(pool.hidden_labels[i]);
        }
      }
      try {
        const RowMatrix revealed_rows = gather_rows(pool.features, rows);
        const Standardizer standardizer = Standardizer::fit(pool.features, rows);
        const LinearModel model =
            linear_fit(standardizer.apply(revealed_rows), labels, learner.ridge_penalty);
        pool.decision = linear_score(model, standardizer.apply(pool.features));
        have_decision = true;
      } catch (const std::exception&) {
        fit_failed = true;
      }
    }
    if (fit_failed && !have_decision)
      throw std::runtime_error("run_simulation: first fit failed, no decision to carry forward");
    carried.push_back(fit_failed ? 1 : 0);

    requests.emplace_back(schedule[step], auc(pool.decision, pool.hidden_labels));
  }

  SimulationResult result;
  result.trajectory = validate_trajectory(requests, pool.size());
  result.carried_forward = std::move(carried);
  result.final_decision = pool.decision;
  result.revealed_total = pool.revealed_count();
  for (std::size_t i = 0; i < pool.revealed_mask.size(); ++i)
    if (pool.revealed_mask[i] && pool.hidden_labels[i] == 1) ++result.revealed_positives;
  return result;
}

// AUC of the decision function on a uniformly drawn unrevealed subset,
// mirroring the random-holdout validation of the challenge protocol.
// Single-class draws are resampled up to a bounded retry count.
inline double random_holdout_auc(const ScoredPool& pool, std::span<const double> decision,
                                 std::int64_t holdout_size, std::uint64_t seed) {
  if (decision.size() != pool.features.rows)
    throw std::invalid_argument("random_holdout_auc: decision length mismatch");
  std::vector<std::size_t> unrevealed;
  for (std::size_t i = 0; i < pool.revealed_mask.size(); ++i)
    if (!pool.revealed_mask[i]) unrevealed.push_back(i);
  if (holdout_size < 2 || holdout_size > static_cast<std::int64_t>(unrevealed.size()))
    throw std::invalid_argument("random_holdout_auc: holdout size out of range");

  constexpr int max_retries = 100;
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    Rng rng(seed, static_cast<std::uint64_t>(attempt));
    const auto subset =
        sample_without_replacement(unrevealed, static_cast<std::size_t>(holdout_size), rng);
    std::vector<double> scores;
    std::vector<int> labels;
    scores.reserve(subset.size());
    labels.reserve(subset.size());
    bool has_pos = false, has_neg = false;
    for (std::size_t idx : subset) {
      scores.push_back(decision[idx]);
      labels.push_back(pool.hidden_labels[idx]);
      (pool.hidden_labels[idx] ? has_pos : has_neg) = true;
    }
    if (has_pos && has_neg) return auc(scores, labels);
  }
  throw std::runtime_error("random_holdout_auc: single-class holdout after " +
                           std::to_string(max_retries) + " retries");
}

// ---------------------------------------------------------------------------
// Strategy comparison report
// ---------------------------------------------------------------------------

struct ComparisonConfig {
  std::int64_t budget = 0;          // matched total labels per strategy
  std::int64_t first_batch = 50;    // multi-step schedules: first purchase
  double growth = 2.0;              //                       batch growth
  double truncation_delta = -1.0;   // < 0: min(0.01 T, 200)
  LearnerConfig learner;
};

struct StrategyReport {
  std::string strategy;
  SimulationResult run;
  std::int64_t used_samples = 0;
  double percent_positives = 0.0;  // share of positives among revealed labels
  double auc_first = 0.0;
  double auc_final = 0.0;
  double alc_value = 0.0;
  double alc2_value = 0.0;       // binary-equivalent score of the same endpoints
  double truncated_value = 0.0;
  double q_value = 0.0;
};

inline std::vector<std::int64_t> schedule_for(const StrategySpec& strategy,
                                              const ComparisonConfig& config) {
  if (strategy.kind == StrategyKind::jump) {
    // matched budget: one initial label plus one big purchase
    return {1, config.budget - 1};
  }
  return ramp_schedule(config.budget, config.first_batch, config.growth);
}

inline std::vector<StrategyReport> compare_strategies(const ScoredPool& pool,
                                                      std::span<const StrategySpec> strategies,
                                                      const ComparisonConfig& config,
                                                      std::uint64_t seed) {
  if (strategies.size() < 2)
    throw std::invalid_argument("compare_strategies: need at least 2 strategies");
  if (config.budget < 2 || config.budget > pool.size())
    throw std::invalid_argument("compare_strategies: budget out of range");

  const double delta = config.truncation_delta > 0.0
                           ? config.truncation_delta
                           : std::min(0.01 * static_cast<double>(pool.size()), 200.0);
  const CriterionParams params = default_criterion_params(pool.size());

  std::vector<StrategyReport> reports;
  for (const auto& strategy : strategies) {
    StrategyReport r;
    r.strategy = strategy.name();
    r.run = run_simulation(pool, strategy, config.learner, schedule_for(strategy, config),
                           seed);
    const auto& curve = r.run.trajectory;
    r.used_samples = curve.last_t();
    r.percent_positives = 100.0 * static_cast<double>(r.run.revealed_positives) /
                          static_cast<double>(r.run.revealed_total);
    r.auc_first = curve.auc_at(0);
    r.auc_final = curve.auc_at(curve.size() - 1);
    r.alc_value = alc(curve);
    r.alc2_value = alc2(r.auc_first, r.auc_final, curve.last_t(), curve.total_pool_size);
    r.truncated_value = truncated_alc(curve, delta);
    r.q_value = q_criterion(curve, params).q_max;
    reports.push_back(std::move(r));
  }
  return reports;
}

// Table-style TSV: one column per strategy, rows named as in the challenge
// write-ups. `header_lines` are echoed first as `# `-comments.
inline std::string render_comparison_tsv(std::span<const StrategyReport> reports,
                                         std::span<const std::string> header_lines) {
  std::ostringstream out;
  for (const auto& line : header_lines) out << "# " << line << "\n";

  auto row = [&](const std::string& label, auto&& value) {
    out << label;
    for (const auto& r : reports) out << '\t' << value(r);
    out << "\n";
  };
  auto fixed4 = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return std::string(buf);
  };

  row("Strategy", [](const StrategyReport& r) { return r.strategy; });
  row("Used samples", [](const StrategyReport& r) { return std::to_string(r.used_samples); });
  row("Percent (positives)",
      [&](const StrategyReport& r) { return fixed4(r.percent_positives) + "%"; });
  row("AUC1", [&](const StrategyReport& r) { return fixed4(r.auc_first); });
  row("AUC", [&](const StrategyReport& r) { return fixed4(r.auc_final); });
  row("ALC", [&](const StrategyReport& r) { return fixed4(r.alc_value); });
  row("ALC2", [&](const StrategyReport& r) { return fixed4(r.alc2_value); });
  row("Truncated ALC", [&](const StrategyReport& r) { return fixed4(r.truncated_value); });
  row("Q", [&](const StrategyReport& r) { return fixed4(r.q_value); });
  return out.str();
}

}  // namespace alceval
