#pragma once

// Experiment sweeps over (n, p): planted endpoint pairs, SSAF solves, and
// per-cell averages, with CSV or aligned-table output.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "stiefel/problem_gen.hpp"

namespace stiefel::bench {

enum class OutputFormat { Csv, Table };

struct ExperimentConfig {
  std::vector<Eigen::Index> n_values;
  std::vector<Eigen::Index> p_values;
  double prescribed_distance = 0.5 * std::numbers::pi;
  double tol = 1e-5;
  int max_iter = 100;
  int trials = 10;
  std::uint64_t seed = 0;
  bool use_small_formulation = true;
  OutputFormat output_format = OutputFormat::Table;
  std::optional<std::string> output_path;
  bool parallel_trials = false;

  void validate() const {
    if (n_values.empty() || p_values.empty()) {
      throw Error(ErrorKind::InvalidArgument, "ExperimentConfig: empty sweep list");
    }
    if (trials < 1) throw Error(ErrorKind::InvalidArgument, "ExperimentConfig: trials must be >= 1");
    if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "ExperimentConfig: tol must be positive");
    if (max_iter < 1) throw Error(ErrorKind::InvalidArgument, "ExperimentConfig: max_iter must be >= 1");
    if (!(prescribed_distance >= 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "ExperimentConfig: distance must be >= 0");
    }
  }
};

struct ExperimentRow {
  Eigen::Index n = 0;
  Eigen::Index p = 0;
  double prescribed_distance = 0.0;
  double tol = 0.0;
  int trials = 0;
  double mean_iterations = 0.0;
  double mean_time_s = 0.0;
  double convergence_rate = 0.0;
  double mean_abs_distance_error = 0.0;
  std::string error;  // nonempty when the (n, p) cell is not a valid configuration

  bool ok() const noexcept { return error.empty(); }
};

struct TrialOutcome {
  bool converged = false;
  int iterations = 0;
  double seconds = 0.0;
  double distance = 0.0;
};

inline TrialOutcome run_trial(const GeneratorSpec& spec, std::uint64_t trial_index, const SolverOptions& options) {
  const PlantedPair pair = pair_with_distance(spec, trial_index, options);
  const SsafReport report = solve_log(pair.problem);
  return {report.converged, report.iterations, report.wall_time, report.distance};
}

/// Averages trial outcomes; non-converged trials only count toward the rate.
inline ExperimentRow aggregate(const GeneratorSpec& spec, double tol, const std::vector<TrialOutcome>& outcomes) {
  ExperimentRow row;
  row.n = spec.n;
  row.p = spec.p;
  row.prescribed_distance = spec.prescribed_distance;
  row.tol = tol;
  row.trials = static_cast<int>(outcomes.size());

  int converged = 0;
  double iterations = 0.0;
  double seconds = 0.0;
  double abs_error = 0.0;
  for (const TrialOutcome& o : outcomes) {
    seconds += o.seconds;
    if (!o.converged) continue;
    ++converged;
    iterations += o.iterations;
    abs_error += std::abs(o.distance - spec.prescribed_distance);
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  row.mean_time_s = outcomes.empty() ? nan : seconds / static_cast<double>(outcomes.size());
  row.convergence_rate = outcomes.empty() ? nan : static_cast<double>(converged) / static_cast<double>(outcomes.size());
  row.mean_iterations = converged > 0 ? iterations / converged : nan;
  row.mean_abs_distance_error = converged > 0 ? abs_error / converged : nan;
  return row;
}

/// One row per (n, p) pair. Identical config and seed give identical
/// non-timing fields regardless of `parallel_trials`.
inline std::vector<ExperimentRow> run_experiment(const ExperimentConfig& config) {
  config.validate();
  SolverOptions options;
  options.tol = config.tol;
  options.max_iter = config.max_iter;
  options.use_small_formulation = config.use_small_formulation;

  std::vector<ExperimentRow> rows;
  for (const Eigen::Index n : config.n_values) {
    for (const Eigen::Index p : config.p_values) {
      GeneratorSpec spec{n, p, config.prescribed_distance, config.seed, config.trials};
      if (p < 1 || p > n) {
        ExperimentRow bad;
        bad.n = n;
        bad.p = p;
        bad.prescribed_distance = config.prescribed_distance;
        bad.tol = config.tol;
        bad.trials = config.trials;
        bad.error = "invalid dimensions: need 1 <= p <= n";
        rows.push_back(std::move(bad));
        continue;
      }

      std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(config.trials));
      const unsigned workers =
          config.parallel_trials ? std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), config.trials))
                                 : 1u;
      if (workers <= 1) {
        for (int t = 0; t < config.trials; ++t) outcomes[t] = run_trial(spec, static_cast<std::uint64_t>(t), options);
      } else {
        std::atomic<int> next{0};
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
          pool.emplace_back([&] {
            for (int t = next++; t < config.trials; t = next++) {
              outcomes[t] = run_trial(spec, static_cast<std::uint64_t>(t), options);
            }
          });
        }
      }
      rows.push_back(aggregate(spec, config.tol, outcomes));
    }
  }
  return rows;
}

inline constexpr std::string_view kCsvHeader =
    "n,p,distance,tol,trials,mean_iterations,mean_time_s,convergence_rate,mean_abs_distance_error";

namespace detail {

// Shortest round-trip decimal form; independent of the global locale.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorKind::InvalidArgument, "parse_csv: bad number '" + std::string(s) + "'");
  }
  return v;
}

template <typename Int>
Int parse_int(std::string_view s) {
  Int v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorKind::InvalidArgument, "parse_csv: bad integer '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace detail

/// Valid rows only; invalid cells are the caller's to report.
inline void write_csv(std::ostream& out, const std::vector<ExperimentRow>& rows) {
  out << kCsvHeader << '\n';
  for (const ExperimentRow& r : rows) {
    if (!r.ok()) continue;
    out << r.n << ',' << r.p << ',' << detail::format_double(r.prescribed_distance) << ','
        << detail::format_double(r.tol) << ',' << r.trials << ',' << detail::format_double(r.mean_iterations) << ','
        << detail::format_double(r.mean_time_s) << ',' << detail::format_double(r.convergence_rate) << ','
        << detail::format_double(r.mean_abs_distance_error) << '\n';
  }
}

inline std::vector<ExperimentRow> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw Error(ErrorKind::InvalidArgument, "parse_csv: missing or unexpected header");
  }
  std::vector<ExperimentRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos; rest.remove_prefix(pos + 1)) {
      fields.push_back(rest.substr(0, pos));
    }
    fields.push_back(rest);
    if (fields.size() != 9) throw Error(ErrorKind::InvalidArgument, "parse_csv: expected 9 fields");
    ExperimentRow r;
    r.n = detail::parse_int<Eigen::Index>(fields[0]);
    r.p = detail::parse_int<Eigen::Index>(fields[1]);
    r.prescribed_distance = detail::parse_double(fields[2]);
    r.tol = detail::parse_double(fields[3]);
    r.trials = detail::parse_int<int>(fields[4]);
    r.mean_iterations = detail::parse_double(fields[5]);
    r.mean_time_s = detail::parse_double(fields[6]);
    r.convergence_rate = detail::parse_double(fields[7]);
    r.mean_abs_distance_error = detail::parse_double(fields[8]);
    rows.push_back(r);
  }
  return rows;
}

/// Aligned columns, one line per cell.
inline void write_table(std::ostream& out, const std::vector<ExperimentRow>& rows) {
  std::ostringstream body;
  body.imbue(std::locale::classic());
  body << std::right << std::setw(7) << "n" << std::setw(7) << "p" << std::setw(12) << "distance" << std::setw(10)
       << "tol" << std::setw(8) << "trials" << std::setw(16) << "avg time (s)" << std::setw(12) << "avg iters"
       << std::setw(11) << "conv rate" << std::setw(14) << "avg |d err|" << '\n';
  body << std::string(97, '-') << '\n';
  for (const ExperimentRow& r : rows) {
    body << std::setw(7) << r.n << std::setw(7) << r.p;
    if (!r.ok()) {
      body << "  error: " << r.error << '\n';
      continue;
    }
    body << std::fixed << std::setprecision(5) << std::setw(12) << r.prescribed_distance << std::scientific
         << std::setprecision(1) << std::setw(10) << r.tol << std::setw(8) << r.trials << std::fixed
         << std::setprecision(5) << std::setw(16) << r.mean_time_s << std::setprecision(2) << std::setw(12)
         << r.mean_iterations << std::setw(11) << r.convergence_rate << std::scientific << std::setprecision(2)
         << std::setw(14) << r.mean_abs_distance_error << '\n';
  }
  out << body.str();
}

/// Writes to `path`, or standard output when no path is given. Throws Io when
/// the file cannot be written.
inline void emit(const std::vector<ExperimentRow>& rows, OutputFormat format,
                 const std::optional<std::string>& path = std::nullopt) {
  if (rows.empty()) throw Error(ErrorKind::InvalidArgument, "emit: no rows");
  auto write = [&](std::ostream& out) {
    if (format == OutputFormat::Csv) {
      write_csv(out, rows);
    } else {
      write_table(out, rows);
    }
  };
  if (!path || path->empty()) {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream file(*path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorKind::Io, "emit: cannot open '" + *path + "' for writing");
  write(file);
  file.flush();
  if (!file) throw Error(ErrorKind::Io, "emit: write to '" + *path + "' failed");
}

}  // namespace stiefel::bench
