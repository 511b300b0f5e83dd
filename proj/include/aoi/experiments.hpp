#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "aoi/properties.hpp"
#include "aoi/sim.hpp"
#include "aoi/solver.hpp"

namespace aoi {

/// Invalid experiment configuration (bad flag value, inconsistent lists).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class CaseSelect { NoSensing, Delayed, Both };

std::string_view case_name(Sensing sensing);
CaseSelect parse_case(std::string_view text);

struct ChannelParams {
  double p11 = 0.7;
  double p01 = 0.3;
};

enum class Command { Tradeoff, FrameLength, GreedyCompare, Properties, Solve };

struct ExperimentSpec {
  CaseSelect cases = CaseSelect::Both;
  std::vector<int> frame_lengths{3};
  std::vector<ChannelParams> channels{{0.7, 0.3}};
  std::vector<double> e_max{0.3};
  int bound_n = 1000;
  double eps = 1e-6;
  double eps_lambda = 1e-4;
  SimConfig sim;
  unsigned workers = 1;
  MixtureMode mixture_mode = MixtureMode::InitialRandomization;
  /// Property suite: number of pseudo-random instances.
  std::size_t property_instances = 6;
  /// Property suite: run the threshold-aware solvers with a broken tie rule.
  bool inject_fault = false;

  /// Defaults mirroring the experiment setups of each subcommand.
  static ExperimentSpec defaults_for(Command command);

  /// Re-checks every parameter; throws ConfigError.
  void validate() const;
  std::vector<Sensing> sensing_cases() const;
};

/// In-memory CSV: `,` delimiter, `.` decimals, LF line endings, header first.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void write(std::ostream& os) const;
  void save(const std::string& path) const;
  std::size_t column(std::string_view name) const;
  const std::string& cell(std::size_t row, std::string_view name) const;
  double number(std::size_t row, std::string_view name) const;
};

/// Shortest round-trippable decimal text; "inf" for infinity.
std::string format_number(double x);

/// Columns shared by all sweep outputs, so every row can be regenerated.
std::vector<std::string> provenance_header();

/// One row per (case, channel, K, E_max) with the solved mixture, plus one
/// unconstrained (lambda = 0) row per (case, channel, K).
CsvTable run_tradeoff_sweep(const ExperimentSpec& spec);

/// Same row layout as the tradeoff sweep, swept over K at each E_max.
CsvTable run_framelength_sweep(const ExperimentSpec& spec);

struct GreedyComparison {
  CsvTable table;
  /// Spearman correlation between E_max and the greedy-minus-optimal gap,
  /// per case, over the rows of the first (channel, K) pair.
  double gap_trend_no_sensing = 0.0;
  double gap_trend_delayed = 0.0;
};

/// Rows (E_max, optimal AoI without sensing, with delayed sensing, greedy
/// AoI) on common channel paths.
GreedyComparison run_greedy_comparison(const ExperimentSpec& spec);

double spearman_correlation(const std::vector<double>& x, const std::vector<double>& y);

struct PropertyReport {
  CsvTable table;
  bool all_passed = true;
};

/// Structural checks on pseudo-random desk-scale instances. N is reduced to
/// at most 60 for value-function checks and to the smallest admissible
/// value for the exhaustive oracle.
PropertyReport run_property_suite(const ExperimentSpec& spec);

/// Thresholds of both components of the solved mixture, per case, at the
/// first E_max of every (channel, K).
CsvTable run_single_solve(const ExperimentSpec& spec);

struct TruncationStudy {
  std::vector<int> bounds;
  std::vector<double> gains;
  std::vector<double> differences;
  CheckOutcome outcome;
};

/// Optimal average Lagrangian cost over a sequence of truncation bounds.
/// Passes when successive differences decrease (differences below
/// `noise_floor` count as converged) and the last one is under `final_tol`.
TruncationStudy truncation_study(Sensing sensing, int K, ChannelParams ch, double lambda,
                                 const std::vector<int>& bounds, const SolveOptions& opts,
                                 double final_tol = 1e-3, double noise_floor = 1e-9);

struct DualityStudy {
  std::vector<DualPoint> curve;
  double best_dual = 0.0;
  double best_lambda = 0.0;
  double primal_aoi = 0.0;
  double gap = 0.0;
  /// Largest second difference along the curve; non-positive when concave.
  double max_curvature = 0.0;
};

DualityStudy duality_study(Sensing sensing, const Instance& inst, double e_max,
                           const std::vector<double>& lambdas, const BisectionOptions& opts);

struct OracleStudy {
  double rvi_gain = 0.0;
  double oracle_gain = 0.0;
  std::size_t states = 0;
  std::size_t policies = 0;
  std::size_t threshold_violations = 0;
};

/// Exhaustive oracle against plain RVI. Threshold shape is judged on the
/// states the oracle policy visits in the long run.
OracleStudy oracle_study(Sensing sensing, const Instance& inst, double lambda,
                         const SolveOptions& opts, std::size_t state_cap);

}  // namespace aoi
