// alceval: evaluate active-learning trajectories, sweep and compare criteria,
// and drive the deterministic challenge-protocol simulator. All randomness is
// seeded through flags, so any invocation reproduces byte-identical outputs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "alceval/criteria.hpp"
#include "alceval/simulator.hpp"
#include "alceval/strategy.hpp"
#include "alceval/svg.hpp"
#include "alceval/trajectory.hpp"

namespace {

using namespace alceval;

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string g6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void emit(const std::string& content, const std::string& output_path) {
  if (output_path.empty())
    std::cout << content;
  else
    write_text(output_path, content);
}

std::vector<std::int64_t> parse_schedule(const std::string& text) {
  std::vector<std::int64_t> schedule;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    schedule.push_back(detail::parse_int(item, "--schedule"));
  return schedule;
}

std::vector<std::uint64_t> read_seeds_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::vector<std::uint64_t> seeds;
  std::string line;
  while (std::getline(in, line)) {
    const auto view = detail::strip_cr(line);
    if (view.empty() || view.starts_with("#")) continue;
    seeds.push_back(static_cast<std::uint64_t>(detail::parse_int(view, path.string())));
  }
  if (seeds.empty()) throw std::runtime_error(path.string() + ": no seeds");
  return seeds;
}

// Shared criterion-parameter flags: explicit --delta/--alpha win; otherwise
// --calibrate (anchor_low anchor_high horizon) sets the slope; otherwise the
// built-in defaults for the trajectory's pool size.
struct CriterionFlags {
  double delta = -1.0;
  double alpha = -1.0;
  std::vector<double> calibrate;  // anchor_low anchor_high horizon

  void attach(CLI::App* cmd) {
    cmd->add_option("--delta", delta, "Label-count threshold (default min(0.01*T, 200))");
    cmd->add_option("--alpha", alpha, "Penalty slope (default calibrated)");
    cmd->add_option("--calibrate", calibrate,
                    "Calibration anchors: AUC-at-delta AUC-at-horizon horizon")
        ->expected(3);
  }

  CriterionParams resolve(std::int64_t total_pool_size) const {
    CriterionParams p = default_criterion_params(total_pool_size);
    if (delta > 0.0) p.delta = delta;
    if (!calibrate.empty()) {
      p.anchor_low = calibrate[0];
      p.anchor_high = calibrate[1];
      p.horizon = calibrate[2];
      p.alpha = calibrate_alpha(p.delta, p.horizon, p.anchor_low, p.anchor_high);
    } else if (delta > 0.0) {
      p.alpha = calibrate_alpha(p.delta, p.horizon, p.anchor_low, p.anchor_high);
    }
    if (alpha > 0.0) p.alpha = alpha;
    return p;
  }
};

struct LearnerFlags {
  LearnerConfig config;

  void attach(CLI::App* cmd) {
    cmd->add_option("--switch-threshold", config.switch_threshold,
                    "Revealed labels at which the ridge scorer takes over");
    cmd->add_option("--ridge", config.ridge_penalty, "Ridge penalty");
    cmd->add_option("--bootstrap-sets", config.bootstrap.num_sets,
                    "Random pseudo-negative sets in the cold-start scorer");
    cmd->add_option("--negatives-per-set", config.bootstrap.negatives_per_set,
                    "Pseudo-negatives per random set");
    cmd->add_option("--distance-quantile", config.bootstrap.distance_quantile,
                    "Distance quantile a pseudo-negative must exceed");
  }
};

struct PoolFlags {
  SyntheticSpec spec;

  void attach(CLI::App* cmd) {
    cmd->add_option("--samples", spec.n_samples, "Pool size")->required();
    cmd->add_option("--features", spec.n_features, "Informative feature count")->required();
    cmd->add_option("--noise-features", spec.noise_features, "Pure-noise feature count");
    cmd->add_option("--positive-fraction", spec.positive_fraction, "Positive class share");
    cmd->add_option("--separation", spec.class_separation, "Class-mean distance in noise units");
  }

  std::string describe() const {
    std::ostringstream out;
    out << "samples=" << spec.n_samples << " features=" << spec.n_features
        << " noise_features=" << spec.noise_features
        << " positive_fraction=" << g6(spec.positive_fraction)
        << " separation=" << g6(spec.class_separation);
    return out.str();
  }
};

// ---------------------------------------------------------------------------

int cmd_evaluate(const std::string& input, bool relax_first, const CriterionFlags& criterion,
                 const std::string& emit_weights) {
  const LearningTrajectory curve =
      read_trajectory_csv(input, TrajectoryOptions{.relax_first = relax_first});
  const CriterionParams params = criterion.resolve(curve.total_pool_size);
  const double delta =
      criterion.delta > 0.0
          ? criterion.delta
          : std::min(0.01 * static_cast<double>(curve.total_pool_size), 200.0);

  std::ostringstream out;
  out << "# evaluate input=" << input << "\n";
  out << "N=" << curve.size() << " T=" << curve.total_pool_size << " t_N=" << curve.last_t()
      << "\n";
  out << "ALC " << fixed4(alc(curve)) << "\n";

  const QCriterionResult q = q_criterion(curve, params);
  if (curve.size() >= 2) {
    const WeightDecomposition d = decompose_weights(curve);
    auto step_weight = [&](std::size_t i) {
      if (i == 0) return d.first_weight;
      if (i + 1 == curve.size()) return d.last_weight;
      return d.middle_weights[i - 1];
    };
    out << "step\tn\tt\tauc\tweight\tavg_auc\tq\n";
    for (std::size_t i = 0; i < curve.size(); ++i) {
      out << (i + 1) << '\t' << curve.steps[i].request_size << '\t' << curve.t(i) << '\t'
          << g6(curve.auc_at(i)) << '\t' << g6(step_weight(i)) << '\t'
          << g6(d.averaged_aucs[i]) << '\t' << g6(q.per_step[i]) << "\n";
    }
    if (!emit_weights.empty()) {
      std::ostringstream csv;
      csv << "step,t,weight,avg_auc\n";
      for (std::size_t i = 0; i < curve.size(); ++i) {
        csv << (i + 1) << ',' << curve.t(i) << ',' << detail::format_g17(step_weight(i)) << ','
            << detail::format_g17(d.averaged_aucs[i]) << "\n";
      }
      write_text(emit_weights, csv.str());
    }
  } else {
    out << "single-step trajectory: no weight decomposition\n";
  }

  out << "truncated_ALC delta=" << g6(delta) << " " << fixed4(truncated_alc(curve, delta))
      << "\n";
  out << "Q delta=" << g6(params.delta) << " alpha=" << g6(params.alpha) << " "
      << fixed4(q.q_max) << "\n";
  std::cout << out.str();
  return 0;
}

int cmd_binary_sweep(double auc2, std::int64_t t2, std::int64_t total, int grid_points,
                     double auc1_min, double auc1_max, const std::string& output) {
  if (grid_points < 2) throw std::invalid_argument("--grid must be >= 2");
  std::vector<double> grid(grid_points);
  for (int i = 0; i < grid_points; ++i)
    grid[i] = auc1_min + (auc1_max - auc1_min) * i / (grid_points - 1);
  const auto table = alc2_sweep(grid, auc2, t2, total);

  std::ostringstream out;
  out << "# binary-sweep auc2=" << detail::format_g17(auc2) << " t2=" << t2 << " T=" << total
      << "\n";
  out << "auc1,alc2\n";
  for (const auto& [a1, value] : table)
    out << detail::format_g17(a1) << ',' << detail::format_g17(value) << "\n";
  emit(out.str(), output);
  return 0;
}

int cmd_criteria_compare(const std::vector<std::string>& inputs, bool relax_first,
                         const CriterionFlags& criterion, const std::string& output) {
  std::ostringstream out;
  out << "file\tN\tT\tused\tauc1\tauc\talc\talc2\ttruncated\tq\n";
  for (const auto& input : inputs) {
    const LearningTrajectory curve =
        read_trajectory_csv(input, TrajectoryOptions{.relax_first = relax_first});
    const CriterionParams params = criterion.resolve(curve.total_pool_size);
    const double delta =
        criterion.delta > 0.0
            ? criterion.delta
            : std::min(0.01 * static_cast<double>(curve.total_pool_size), 200.0);
    const double first = curve.auc_at(0);
    const double last = curve.auc_at(curve.size() - 1);
    out << input << '\t' << curve.size() << '\t' << curve.total_pool_size << '\t'
        << curve.last_t() << '\t' << fixed4(first) << '\t' << fixed4(last) << '\t'
        << fixed4(alc(curve)) << '\t'
        << (curve.last_t() > 1
                ? fixed4(alc2(first, last, curve.last_t(), curve.total_pool_size))
                : std::string("-"))
        << '\t' << fixed4(truncated_alc(curve, delta)) << '\t'
        << fixed4(q_criterion(curve, params).q_max) << "\n";
  }
  emit(out.str(), output);
  return 0;
}

int cmd_gen_data(const PoolFlags& pool_flags, std::uint64_t seed, const std::string& output) {
  SyntheticSpec spec = pool_flags.spec;
  spec.seed = seed;
  const ScoredPool pool = generate_pool(spec);
  write_pool_csv(pool, output, {"gen-data " + pool_flags.describe() + " seed=" + std::to_string(seed)});
  return 0;
}

int cmd_simulate(const std::string& input, const std::string& strategy_name, double fraction,
                 std::int64_t budget, std::int64_t first_batch, double growth,
                 const std::string& schedule_text, std::uint64_t seed,
                 const LearnerFlags& learner, const std::string& output,
                 const std::string& emit_svg) {
  const ScoredPool pool = read_pool_csv(input);

  StrategySpec strategy;
  strategy.kind = strategy_kind_from_string(strategy_name);
  strategy.jump_fraction = fraction;

  std::vector<std::int64_t> schedule;
  if (!schedule_text.empty()) {
    schedule = parse_schedule(schedule_text);
  } else if (strategy.kind == StrategyKind::jump) {
    schedule = jump_schedule(pool.size(), fraction);
  } else {
    if (budget < 2)
      throw std::invalid_argument("simulate: --budget (>= 2) required without --schedule");
    schedule = ramp_schedule(budget, first_batch, growth);
  }

  const SimulationResult result = run_simulation(pool, strategy, learner.config, schedule, seed);

  std::ostringstream config;
  config << "simulate input=" << input << " strategy=" << strategy_name << " seed=" << seed;
  if (strategy.kind == StrategyKind::jump) config << " fraction=" << g6(fraction);
  std::ostringstream sched;
  for (std::size_t i = 0; i < schedule.size(); ++i) sched << (i ? "," : "") << schedule[i];
  write_trajectory_csv(result.trajectory, output,
                       {config.str(), "schedule=" + sched.str(),
                        "switch_threshold=" + std::to_string(learner.config.switch_threshold) +
                            " ridge=" + g6(learner.config.ridge_penalty)});

  if (!emit_svg.empty()) {
    SvgSeries series;
    series.label = strategy_name;
    for (const auto& step : result.trajectory.steps)
      series.points.emplace_back(std::log2(static_cast<double>(step.cumulative_labels)),
                                 step.auc);
    series.points.emplace_back(std::log2(static_cast<double>(result.trajectory.total_pool_size)),
                               result.trajectory.steps.back().auc);
    write_line_svg(emit_svg, "Learning trajectory", "log2(labels)", "AUC", {{series}});
  }
  return 0;
}

int cmd_report(const PoolFlags& pool_flags, const std::vector<std::uint64_t>& seeds,
               std::int64_t budget, std::int64_t first_batch, double growth, double delta,
               const std::string& strategies_text, const LearnerFlags& learner,
               const std::string& output, bool emit_svg) {
  std::vector<StrategySpec> strategies;
  {
    std::stringstream ss(strategies_text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      StrategySpec s;
      s.kind = strategy_kind_from_string(item);
      strategies.push_back(s);
    }
  }
  if (strategies.size() < 2) throw std::invalid_argument("report: need >= 2 strategies");

  ComparisonConfig config;
  config.budget = budget;
  config.first_batch = first_batch;
  config.growth = growth;
  config.truncation_delta = delta;
  config.learner = learner.config;
  const double resolved_delta =
      delta > 0.0 ? delta
                  : std::min(0.01 * static_cast<double>(pool_flags.spec.n_samples), 200.0);

  struct Row {
    std::uint64_t seed;
    StrategyReport report;
  };
  std::vector<Row> rows;
  for (std::uint64_t seed : seeds) {
    SyntheticSpec spec = pool_flags.spec;
    spec.seed = seed;
    const ScoredPool pool = generate_pool(spec);
    auto reports = compare_strategies(pool, strategies, config, seed);
    for (auto& r : reports) rows.push_back({seed, std::move(r)});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.seed != b.seed) return a.seed < b.seed;
    return a.report.strategy < b.report.strategy;
  });

  std::ostringstream out;
  out << "# report pool: " << pool_flags.describe() << "\n";
  out << "# budget=" << budget << " first_batch=" << first_batch << " growth=" << g6(growth)
      << " delta=" << g6(resolved_delta) << " strategies=" << strategies_text << "\n";
  out << "# seeds=";
  for (std::size_t i = 0; i < seeds.size(); ++i) out << (i ? "," : "") << seeds[i];
  out << "\n";
  out << "seed\tstrategy\tused\tpercent_pos\tauc1\tauc\talc\talc2\ttruncated\tq\n";
  for (const auto& row : rows) {
    const auto& r = row.report;
    out << row.seed << '\t' << r.strategy << '\t' << r.used_samples << '\t'
        << fixed4(r.percent_positives) << '\t' << fixed4(r.auc_first) << '\t'
        << fixed4(r.auc_final) << '\t' << fixed4(r.alc_value) << '\t' << fixed4(r.alc2_value)
        << '\t' << fixed4(r.truncated_value) << '\t' << fixed4(r.q_value) << "\n";
  }

  if (strategies.size() == 2) {
    const std::string a = strategies[0].name();
    const std::string b = strategies[1].name();
    int alc_a = 0, alc_b = 0, trunc_a = 0, trunc_b = 0, q_a = 0, q_b = 0;
    for (std::uint64_t seed : seeds) {
      const StrategyReport* ra = nullptr;
      const StrategyReport* rb = nullptr;
      for (const auto& row : rows) {
        if (row.seed != seed) continue;
        if (row.report.strategy == a && !ra) ra = &row.report;
        else if (row.report.strategy == b) rb = &row.report;
      }
      alc_a += ra->alc_value >= rb->alc_value;
      alc_b += rb->alc_value >= ra->alc_value;
      trunc_a += ra->truncated_value >= rb->truncated_value;
      trunc_b += rb->truncated_value >= ra->truncated_value;
      q_a += ra->q_value >= rb->q_value;
      q_b += rb->q_value >= ra->q_value;
    }
    out << "# summary over " << seeds.size() << " seeds (ties count for both sides)\n";
    out << "metric\t" << a << "_at_least\t" << b << "_at_least\n";
    out << "ALC\t" << alc_a << '\t' << alc_b << "\n";
    out << "Truncated ALC\t" << trunc_a << '\t' << trunc_b << "\n";
    out << "Q\t" << q_a << '\t' << q_b << "\n";
  }
  emit(out.str(), output);

  if (emit_svg && !output.empty()) {
    const std::filesystem::path base(output);
    const std::uint64_t seed = seeds.front();
    std::vector<SvgSeries> auc_series, q_series;
    for (const auto& row : rows) {
      if (row.seed != seed) continue;
      const auto& curve = row.report.run.trajectory;
      SvgSeries s;
      s.label = row.report.strategy;
      for (const auto& step : curve.steps)
        s.points.emplace_back(std::log2(static_cast<double>(step.cumulative_labels)), step.auc);
      auc_series.push_back(std::move(s));

      const auto q = q_criterion(curve, default_criterion_params(curve.total_pool_size));
      SvgSeries qs;
      qs.label = row.report.strategy;
      for (std::size_t i = 0; i < curve.size(); ++i)
        qs.points.emplace_back(static_cast<double>(curve.t(i)), q.per_step[i]);
      q_series.push_back(std::move(qs));
    }
    std::filesystem::path auc_path = base;
    auc_path.replace_extension(".trajectories.svg");
    std::filesystem::path q_path = base;
    q_path.replace_extension(".q.svg");
    write_line_svg(auc_path, "Learning trajectories (seed " + std::to_string(seed) + ")",
                   "log2(labels)", "AUC", auc_series);
    write_line_svg(q_path, "Per-step Q values (seed " + std::to_string(seed) + ")", "labels",
                   "Q", q_series);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning-curve evaluation criteria for pool-based active learning"};
  app.require_subcommand(1);

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Score a trajectory file with every criterion");
  std::string eval_input;
  bool eval_relax = false;
  CriterionFlags eval_criterion;
  std::string eval_weights;
  evaluate->add_option("--input", eval_input, "Trajectory CSV")->required();
  evaluate->add_flag("--relax-first", eval_relax, "Allow a first request larger than one label");
  eval_criterion.attach(evaluate);
  evaluate->add_option("--emit-weights", eval_weights, "Write the weight decomposition as CSV");

  // binary-sweep
  auto* sweep = app.add_subcommand("binary-sweep",
                                   "Tabulate the two-step score as a function of the first AUC");
  double sweep_auc2 = 0.0;
  std::int64_t sweep_t2 = 0, sweep_total = 0;
  int sweep_grid = 101;
  double sweep_min = 0.0, sweep_max = 1.0;
  std::string sweep_output;
  sweep->add_option("--auc2", sweep_auc2, "Second-step AUC")->required();
  sweep->add_option("--t2", sweep_t2, "Second-step label count")->required();
  sweep->add_option("--T", sweep_total, "Pool size")->required();
  sweep->add_option("--grid", sweep_grid, "Grid points (default 101)");
  sweep->add_option("--auc1-min", sweep_min, "Grid start (default 0)");
  sweep->add_option("--auc1-max", sweep_max, "Grid end (default 1)");
  sweep->add_option("--output", sweep_output, "Output CSV (default stdout)");

  // criteria-compare
  auto* compare = app.add_subcommand("criteria-compare",
                                     "Tabulate every criterion across trajectory files");
  std::vector<std::string> compare_inputs;
  bool compare_relax = false;
  CriterionFlags compare_criterion;
  std::string compare_output;
  compare->add_option("--input", compare_inputs, "Trajectory CSVs")->required();
  compare->add_flag("--relax-first", compare_relax, "Allow a first request larger than one label");
  compare_criterion.attach(compare);
  compare->add_option("--output", compare_output, "Output TSV (default stdout)");

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic pool CSV");
  PoolFlags gen_pool;
  std::uint64_t gen_seed = 1;
  std::string gen_output;
  gen_pool.attach(gen);
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--output", gen_output, "Pool CSV path")->required();

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Run the challenge protocol on a pool");
  std::string sim_input, sim_strategy = "knee", sim_schedule, sim_output, sim_svg;
  double sim_fraction = 0.05, sim_growth = 2.0;
  std::int64_t sim_budget = 0, sim_first = 50;
  std::uint64_t sim_seed = 1;
  LearnerFlags sim_learner;
  simulate->add_option("--input", sim_input, "Pool CSV")->required();
  simulate->add_option("--strategy", sim_strategy, "knee|random|jump|mixed");
  simulate->add_option("--fraction", sim_fraction, "Jump purchase as a fraction of the pool");
  simulate->add_option("--budget", sim_budget, "Total labels for multi-step strategies");
  simulate->add_option("--first-batch", sim_first, "First purchase of multi-step schedules");
  simulate->add_option("--growth", sim_growth, "Batch growth of multi-step schedules");
  simulate->add_option("--schedule", sim_schedule, "Explicit request sizes, e.g. 1,50,100");
  simulate->add_option("--seed", sim_seed, "Simulation seed");
  sim_learner.attach(simulate);
  simulate->add_option("--output", sim_output, "Trajectory CSV path")->required();
  simulate->add_option("--emit-svg", sim_svg, "Write an SVG of the trajectory");

  // report
  auto* report = app.add_subcommand("report",
                                    "Multi-seed strategy comparison with a criteria summary");
  PoolFlags report_pool;
  int report_seeds = 20;
  std::string report_seeds_file, report_strategies = "jump,knee", report_output, report_delta_s;
  std::int64_t report_budget = 0, report_first = 50;
  double report_growth = 2.0, report_delta = -1.0;
  bool report_svg = false;
  LearnerFlags report_learner;
  report_pool.attach(report);
  report->add_option("--seeds", report_seeds, "Number of seeds (1..N)");
  report->add_option("--seeds-file", report_seeds_file, "File with one seed per line");
  report->add_option("--budget", report_budget, "Matched label budget per strategy")->required();
  report->add_option("--first-batch", report_first, "First purchase of multi-step schedules");
  report->add_option("--growth", report_growth, "Batch growth of multi-step schedules");
  report->add_option("--delta", report_delta, "Truncation threshold (default min(0.01*T,200))");
  report->add_option("--strategies", report_strategies, "Comma list, e.g. jump,knee");
  report_learner.attach(report);
  report->add_option("--output", report_output, "Report TSV path (default stdout)");
  report->add_flag("--emit-svg", report_svg, "Write trajectory and Q-curve SVGs next to --output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (evaluate->parsed())
      return cmd_evaluate(eval_input, eval_relax, eval_criterion, eval_weights);
    if (sweep->parsed())
      return cmd_binary_sweep(sweep_auc2, sweep_t2, sweep_total, sweep_grid, sweep_min,
                              sweep_max, sweep_output);
    if (compare->parsed())
      return cmd_criteria_compare(compare_inputs, compare_relax, compare_criterion,
                                  compare_output);
    if (gen->parsed()) return cmd_gen_data(gen_pool, gen_seed, gen_output);
    if (simulate->parsed())
      return cmd_simulate(sim_input, sim_strategy, sim_fraction, sim_budget, sim_first,
                          sim_growth, sim_schedule, sim_seed, sim_learner, sim_output, sim_svg);
    if (report->parsed()) {
      std::vector<std::uint64_t> seeds;
      if (!report_seeds_file.empty()) {
        seeds = read_seeds_file(report_seeds_file);
      } else {
        if (report_seeds < 1) throw std::invalid_argument("report: --seeds must be >= 1");
        for (int i = 1; i <= report_seeds; ++i) seeds.push_back(static_cast<std::uint64_t>(i));
      }
      return cmd_report(report_pool, seeds, report_budget, report_first, report_growth,
                        report_delta, report_strategies, report_learner, report_output,
                        report_svg);
    }
  } catch (const std::exception& e) {
    std::cerr << "alceval: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
