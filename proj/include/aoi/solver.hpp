#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "aoi/mdp.hpp"

namespace aoi {

/// RVI or power iteration ran out of its iteration budget.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double last_residual)
      : std::runtime_error(what), last_residual_(last_residual) {}
  double last_residual() const { return last_residual_; }

 private:
  double last_residual_;
};

/// Deterministic stationary policy indexed like FiniteMdp states.
using Policy = std::vector<Action>;

enum class TieBreak { PreferIdle, PreferTransmit };

struct SolveOptions {
  double tolerance = 1e-6;  ///< span threshold on successive relative values
  std::size_t max_iterations = 2'000'000;
  /// Self-loop weight of the aperiodicity transform P' = tau P + (1 - tau) I.
  /// Every induced chain advances k cyclically, so the untransformed
  /// iteration oscillates with period K.
  double aperiodicity = 0.5;
  TieBreak tie_break = TieBreak::PreferIdle;
  /// Q-values closer than this count as tied. Zero means exact equality.
  double tie_tolerance = 0.0;
  /// Optional warm start for the relative values (same size as the model).
  std::vector<double> initial_bias;
};

struct SolveReport {
  double gain = 0.0;          ///< optimal average Lagrangian cost of the truncated MDP
  std::vector<double> bias;   ///< relative values h, with h(reference) = 0
  Policy policy;
  std::size_t iterations = 0;
  double span = 0.0;          ///< final max |h - h_prev|
  std::size_t argmin_evaluations = 0;
};

/// Relative value iteration with a full argmin at every state that may transmit.
SolveReport rvi_plain(const FiniteMdp& mdp, double lambda, const SolveOptions& opts = {});

/// Threshold-aware RVI without channel sensing. For every (aoi, k) the
/// beliefs are swept in increasing order and, once transmission wins at some
/// belief, every larger belief in the same sweep transmits without an argmin.
SolveReport rvi_threshold_no_sensing(const NoSensingModel& model, double lambda,
                                     const SolveOptions& opts = {});

/// Threshold-aware RVI with delayed sensing: per k, AoI thresholds are found
/// for g = 0 first and carried over to g = 1 through
/// threshold(k, 1) = min(threshold(k, 1), aoi).
SolveReport rvi_threshold_delayed(const DelayedModel& model, double lambda,
                                  const SolveOptions& opts = {});

/// Finite-horizon discounted costs V_n from V_0 = 0. Stops early once the
/// sup-norm change drops below `stop_below` (if positive).
std::vector<double> discounted_vi(const FiniteMdp& mdp, double lambda, double beta,
                                  std::size_t n_iters, double stop_below = 0.0);

/// Optimal discounted action for each state given a converged V.
Policy discounted_greedy_policy(const FiniteMdp& mdp, const std::vector<double>& value,
                                double lambda, double beta);

struct PolicyAverages {
  double avg_aoi = 0.0;
  double avg_energy = 0.0;
  std::size_t iterations = 0;
};

struct EvaluationOptions {
  double tolerance = 1e-10;  ///< L1 change between successive distributions
  std::size_t max_iterations = 5'000'000;
  double damping = 0.5;      ///< weight kept on the current distribution
};

/// Limiting state distribution of the induced chain started at the
/// reference state, by damped power iteration. Full model size; zero off the
/// reachable set.
std::vector<double> stationary_distribution(const FiniteMdp& mdp, const Policy& policy,
                                            const EvaluationOptions& opts = {});
/// Same through a dense linear solve (small models only).
std::vector<double> stationary_distribution_exact(const FiniteMdp& mdp, const Policy& policy);

/// Long-run averages from the stationary law of the induced chain started
/// at the reference state (damped power iteration).
PolicyAverages evaluate_policy(const FiniteMdp& mdp, const Policy& policy,
                               const EvaluationOptions& opts = {});

double average_energy_of_policy(const FiniteMdp& mdp, const Policy& policy,
                                const EvaluationOptions& opts = {});

/// Belief thresholds omega*(aoi, k). +infinity means never transmit.
struct ThresholdPolicyBelief {
  std::map<std::pair<int, int>, double> threshold;  ///< key (aoi, k)
  int frame_length = 1;

  Action action(int aoi, int k, double belief) const;
};

/// AoI thresholds Delta*(k, g). Absent or max() means never transmit.
struct ThresholdPolicyAoI {
  static constexpr int kNever = std::numeric_limits<int>::max();
  std::map<std::pair<int, int>, int> threshold;  ///< key (k, g)
  int frame_length = 1;

  Action action(int aoi, int k, int g) const;
  int at(int k, int g) const;
};

/// Number of (aoi, k) groups whose action over ascending beliefs goes
/// 1 -> 0 somewhere. Zero means the policy is threshold-shaped. A non-empty
/// `only` restricts the check to the flagged states.
std::size_t threshold_violations(const NoSensingModel& model, const Policy& policy,
                                 const std::vector<bool>& only = {});
/// Same for AoI thresholds per (k, g).
std::size_t threshold_violations(const DelayedModel& model, const Policy& policy,
                                 const std::vector<bool>& only = {});

ThresholdPolicyBelief extract_thresholds(const NoSensingModel& model, const Policy& policy);
ThresholdPolicyAoI extract_thresholds(const DelayedModel& model, const Policy& policy);

/// Randomized mixture: with probability q use `minus` (the lambda*- policy),
/// otherwise `plus` (the lambda*+ policy).
struct MixturePolicy {
  Policy minus;
  Policy plus;
  double q = 1.0;
  double lambda_minus = 0.0;
  double lambda_plus = 0.0;
  PolicyAverages minus_averages;
  PolicyAverages plus_averages;
  std::size_t solves = 0;

  double avg_aoi() const;
  double avg_energy() const;
};

/// q from the two policies' average energies; 1 when they coincide.
double mixture_weight(double e_max, double energy_minus, double energy_plus);

struct BisectionOptions {
  SolveOptions solve;
  EvaluationOptions evaluation;
  double lambda_tolerance = 1e-4;
  double lambda_hi_init = 1.0;
  int max_doublings = 40;
  bool warm_start = true;
};

/// Lagrange multiplier search. Returns the unconstrained policy (q = 1) when
/// it already meets E_max.
MixturePolicy bisect_lambda(const NoSensingModel& model, double e_max,
                            const BisectionOptions& opts = {});
MixturePolicy bisect_lambda(const DelayedModel& model, double e_max,
                            const BisectionOptions& opts = {});

struct OracleResult {
  double gain = 0.0;
  Policy policy;
  std::size_t policies_evaluated = 0;
};

/// Exhaustive search over all deterministic admissible policies. Each one is
/// evaluated exactly through its stationary distribution from the reference
/// state.
OracleResult enumerate_and_evaluate(const FiniteMdp& mdp, double lambda,
                                    std::size_t state_cap = 14);

/// Exact long-run averages via a dense linear solve (small models only).
PolicyAverages evaluate_policy_exact(const FiniteMdp& mdp, const Policy& policy);

struct DualPoint {
  double lambda = 0.0;
  double gain = 0.0;  ///< L^{N*}(lambda)
  double dual = 0.0;  ///< gain - lambda * E_max
};

std::vector<DualPoint> dual_value_sweep(const NoSensingModel& model, double e_max,
                                        const std::vector<double>& lambdas,
                                        const SolveOptions& opts = {});
std::vector<DualPoint> dual_value_sweep(const DelayedModel& model, double e_max,
                                        const std::vector<double>& lambdas,
                                        const SolveOptions& opts = {});

}  // namespace aoi
