#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "smoothgreed/smoothgreed.hpp"

namespace smoothgreed::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitBreach = 2,
  kExitInfeasible = 3,
  kExitBadInput = 4,
};

/// Reads JSON from a path, or parses the argument itself when it starts with '{'.
nlohmann::json load_json_arg(const std::string& arg);

enum class SmoothingKind { none, nesterov, grid };

struct SmoothingChoice {
  SmoothingKind kind = SmoothingKind::none;
  std::optional<SmoothedScalar> grid;
  std::optional<double> beta;  // certified beta of a grid design, when known
};

/// "none", "nesterov", or the path of a design CSV (its companion .json, if
/// present, supplies the certified beta and tail mode).
SmoothingChoice load_smoothing(const std::string& arg);

/// Builds the objective for an instance. An empty spec picks the family default.
std::unique_ptr<Objective> make_objective(const nlohmann::json& spec, const OnlineInstance& inst,
                                          const SmoothingChoice& smoothing);

/// The applicable certificate bound for a finished run.
CertifyOptions certify_options(const Objective& obj, const SmoothingChoice& smoothing,
                               const RunTrace& trace);

struct RunOutcome {
  RunTrace trace;
  CertificateReport certificate;
  GapReport gaps;
  nlohmann::json summary;
};

RunOutcome run_and_certify(const OnlineInstance& inst, const nlohmann::json& objective_spec,
                           const SmoothingChoice& smoothing, Algorithm algo);

/// Table with named columns, written as CSV after a provenance comment line.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::vector<std::string>> labels;  // optional leading string columns
  std::vector<std::string> label_columns;
};

std::string provenance_line(std::uint64_t seed, const std::string& flags);
void write_csv(std::ostream& os, const Table& table, const std::string& provenance);
void write_csv_file(const std::string& path, const Table& table, const std::string& provenance);

/// Reads numeric CSV columns, skipping '#' comment lines; the header names columns.
Table read_csv(const std::string& path);

Table design_csv_table(const DesignResult& r);

/// Worker count: SMOOTHGREED_THREADS if set, else hardware concurrency.
std::size_t worker_count();
/// Runs body(i) for i in [0, n) on worker threads; exceptions are rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

struct FigureOptions {
  std::size_t d = 400;
  std::size_t points = 10;
  double beta_tol = 1e-7;
};

/// Ratio curves: "1e" (log1p vs u_max), "1f" (sqrt vs u_max), "2a" (the
/// piecewise-linear min(.75, u, .5u + .25) and cap vs c), "2b" (log1p vs c).
Table figure_table(const std::string& which, const FigureOptions& opts);
const std::vector<std::string>& figure_names();

/// The piecewise-linear function min(.75, u, .5u + .25).
ScalarConcave three_piece_function();

struct SweepOptions {
  std::vector<std::size_t> n_list{10};
  std::vector<std::size_t> phase_list{1, 2, 5, 10};
  Algorithm algo = Algorithm::simultaneous;
  std::string smoothing = "none";
};

Table sweep_table(const SweepOptions& opts);

}  // namespace smoothgreed::cli
