#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace alceval {

namespace detail {

// 17 significant digits round-trips every double exactly.
inline std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double parse_double(std::string_view s, const std::string& context) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last)
    throw std::runtime_error(context + ": bad number '" + std::string(s) + "'");
  return v;
}

inline std::int64_t parse_int(std::string_view s, const std::string& context) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::runtime_error(context + ": bad integer '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

inline std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

}  // namespace detail

// One purchase step: request size n_i, running label count t_i, full-pool
// AUC of the decision function submitted at that step.
struct TrajectoryStep {
  std::int64_t request_size = 0;
  std::int64_t cumulative_labels = 0;
  double auc = 0.0;

  bool operator==(const TrajectoryStep&) const = default;
};

// The (n_i, t_i, AUC_i) sequence plus the total pool size T. Immutable after
// construction; validated by validate_trajectory / the CSV reader.
struct LearningTrajectory {
  std::vector<TrajectoryStep> steps;
  std::int64_t total_pool_size = 0;

  std::size_t size() const { return steps.size(); }
  std::int64_t t(std::size_t i) const { return steps[i].cumulative_labels; }
  double auc_at(std::size_t i) const { return steps[i].auc; }
  std::int64_t last_t() const { return steps.back().cumulative_labels; }

  bool operator==(const LearningTrajectory&) const = default;
};

struct TrajectoryOptions {
  // Permit a first request larger than one label (analyses that start from a
  // jump). The challenge protocol itself always starts from a single
  // positive, so the default is strict.
  bool relax_first = false;
};

// Builds a trajectory from (request size, auc) pairs, computing cumulative
// label counts and checking every invariant.
inline LearningTrajectory validate_trajectory(
    const std::vector<std::pair<std::int64_t, double>>& requests, std::int64_t total_pool_size,
    const TrajectoryOptions& options = {}) {
  if (requests.empty()) throw std::invalid_argument("trajectory: no steps");
  if (total_pool_size < 1) throw std::invalid_argument("trajectory: pool size must be positive");

  LearningTrajectory out;
  out.total_pool_size = total_pool_size;
  out.steps.reserve(requests.size());

  std::int64_t running = 0;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto [n, auc] = requests[i];
    if (n < 1)
      throw std::invalid_argument("trajectory: request size must be >= 1 at step " +
                                  std::to_string(i + 1));
    if (auc < 0.0 || auc > 1.0)
      throw std::invalid_argument("trajectory: AUC outside [0,1] at step " +
                                  std::to_string(i + 1));
    running += n;
    out.steps.push_back({n, running, auc});
  }

  if (!options.relax_first && out.steps.front().request_size != 1)
    throw std::invalid_argument(
        "trajectory: first request must be a single label (use relax_first to override)");
  if (running > total_pool_size)
    throw std::invalid_argument("trajectory exceeds pool: t_N=" + std::to_string(running) +
                                " > T=" + std::to_string(total_pool_size));
  return out;
}

// CSV format (fixed): comment line `# T=<int>`, header `step,n,t,auc`, one
// row per step. Reals carry 17 significant digits so read(write(x)) == x.
// Extra comment lines (configuration echoes) may follow the `# T=` line and
// are ignored on read.
inline void write_trajectory_csv(const LearningTrajectory& trajectory,
                                 const std::filesystem::path& path,
                                 const std::vector<std::string>& extra_comments = {}) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << "# T=" << trajectory.total_pool_size << "\n";
  for (const auto& comment : extra_comments) out << "# " << comment << "\n";
  out << "step,n,t,auc\n";
  for (std::size_t i = 0; i < trajectory.steps.size(); ++i) {
    const auto& s = trajectory.steps[i];
    out << (i + 1) << ',' << s.request_size << ',' << s.cumulative_labels << ','
        << detail::format_g17(s.auc) << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

// Stored t is cross-checked against the running sum of n; a mismatch is an
// error (catches hand-edited files), never silently recomputed.
inline LearningTrajectory read_trajectory_csv(const std::filesystem::path& path,
                                              const TrajectoryOptions& options = {}) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());

  const std::string name = path.string();
  auto where = [&](std::size_t line_no) { return name + ":" + std::to_string(line_no); };

  std::string line;
  std::size_t line_no = 0;

  auto next_content_line = [&](std::string_view& out_view) -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      out_view = detail::strip_cr(line);
      if (!out_view.empty()) return true;
    }
    return false;
  };

  std::string_view view;
  if (!next_content_line(view)) throw std::runtime_error(name + ": empty file");
  if (!view.starts_with("# T="))
    throw std::runtime_error(where(line_no) + ": expected '# T=<int>' comment line");
  const std::int64_t total = detail::parse_int(view.substr(4), where(line_no));

  if (!next_content_line(view)) throw std::runtime_error(name + ": missing header");
  while (view.starts_with("#")) {  // configuration echoes
    if (!next_content_line(view)) throw std::runtime_error(name + ": missing header");
  }
  if (view != "step,n,t,auc")
    throw std::runtime_error(where(line_no) + ": header mismatch, expected 'step,n,t,auc'");

  std::vector<std::pair<std::int64_t, double>> requests;
  std::vector<std::int64_t> stored_t;
  while (next_content_line(view)) {
    const auto fields = detail::split_csv(view);
    if (fields.size() != 4)
      throw std::runtime_error(where(line_no) + ": expected 4 fields, got " +
                               std::to_string(fields.size()));
    const std::int64_t step = detail::parse_int(fields[0], where(line_no));
    const std::int64_t n = detail::parse_int(fields[1], where(line_no));
    const std::int64_t t = detail::parse_int(fields[2], where(line_no));
    const double auc = detail::parse_double(fields[3], where(line_no));

    if (step != static_cast<std::int64_t>(requests.size()) + 1)
      throw std::runtime_error(where(line_no) + ": step index out of order");
    if (n < 1) throw std::runtime_error(where(line_no) + ": request size must be >= 1");
    if (auc < 0.0 || auc > 1.0)
      throw std::runtime_error(where(line_no) + ": AUC outside [0,1]");
    if (!stored_t.empty() && t <= stored_t.back())
      throw std::runtime_error(where(line_no) + ": t not strictly increasing");

    const std::int64_t expected = (stored_t.empty() ? 0 : stored_t.back()) + n;
    if (t != expected)
      throw std::runtime_error(where(line_no) + ": t=" + std::to_string(t) +
                               " does not match running sum of n (" + std::to_string(expected) +
                               ")");
    stored_t.push_back(t);
    requests.emplace_back(n, auc);
  }

  try {
    return validate_trajectory(requests, total, options);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(name + ": " + e.what());
  }
}

}  // namespace alceval
