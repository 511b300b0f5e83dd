#include "aoi/solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

namespace aoi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Q-value of action u under the aperiodicity-transformed kernel.
inline double q_value(const FiniteMdp& mdp, std::size_t s, Action u, double lambda, double tau,
                      const std::vector<double>& h) {
  double expect = 0.0;
  for (const Transition& t : mdp.successors(s, u)) expect += t.probability * h[t.to];
  return stage_cost(mdp.aoi(s), u, lambda) + tau * expect + (1.0 - tau) * h[s];
}

inline bool transmit_wins(double q_idle, double q_send, const SolveOptions& opts) {
  if (opts.tie_break == TieBreak::PreferIdle) return q_send < q_idle - opts.tie_tolerance;
  return q_send <= q_idle + opts.tie_tolerance;
}

void validate(const FiniteMdp& mdp, double lambda, const SolveOptions& opts) {
  if (mdp.size() == 0) throw DomainError("empty model");
  if (!(lambda >= 0.0)) throw DomainError("lambda must be non-negative");
  if (!(opts.tolerance > 0.0)) throw DomainError("RVI tolerance must be positive");
  if (!(opts.aperiodicity > 0.0 && opts.aperiodicity <= 1.0)) {
    throw DomainError("aperiodicity weight must lie in (0,1]");
  }
  if (!opts.initial_bias.empty() && opts.initial_bias.size() != mdp.size()) {
    throw DomainError("warm-start bias has the wrong size");
  }
}

/// Shared RVI driver. `sweep(h, V, policy)` performs one Jacobi sweep and
/// returns the number of argmin evaluations it needed.
template <class Sweep>
SolveReport run_rvi(const FiniteMdp& mdp, double lambda, const SolveOptions& opts, Sweep&& sweep) {
  validate(mdp, lambda, opts);
  const std::size_t n = mdp.size();
  const std::size_t ref = mdp.reference();
  const double tau = opts.aperiodicity;

  std::vector<double> h(n, 0.0);
  if (!opts.initial_bias.empty()) {
    for (std::size_t s = 0; s < n; ++s) h[s] = (opts.initial_bias[s] - opts.initial_bias[ref]) / tau;
  }
  std::vector<double> v(n, 0.0);
  SolveReport report;
  report.policy.assign(n, Action::Idle);
  double span = kInf;

  for (std::size_t it = 1; it <= opts.max_iterations; ++it) {
    report.argmin_evaluations += sweep(h, v, report.policy);
    const double anchor = v[ref];
    span = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      const double next = v[s] - anchor;
      span = std::max(span, std::abs(next - h[s]));
      h[s] = next;
    }
    report.gain = anchor;
    report.iterations = it;
    if (span < opts.tolerance) {
      report.span = span;
      report.bias.resize(n);
      for (std::size_t s = 0; s < n; ++s) report.bias[s] = tau * h[s];
      return report;
    }
  }
  throw NonConvergence("RVI did not converge within " + std::to_string(opts.max_iterations) +
                           " sweeps (last span " + std::to_string(span) + ")",
                       span);
}

}  // namespace

SolveReport rvi_plain(const FiniteMdp& mdp, double lambda, const SolveOptions& opts) {
  const double tau = opts.aperiodicity;
  return run_rvi(mdp, lambda, opts,
                 [&](const std::vector<double>& h, std::vector<double>& v, Policy& policy) {
                   std::size_t evaluations = 0;
                   for (std::size_t s = 0; s < mdp.size(); ++s) {
                     const double q0 = q_value(mdp, s, Action::Idle, lambda, tau, h);
                     if (!mdp.can_transmit(s)) {
                       policy[s] = Action::Idle;
                       v[s] = q0;
                       continue;
                     }
                     ++evaluations;
                     const double q1 = q_value(mdp, s, Action::Transmit, lambda, tau, h);
                     const bool send = transmit_wins(q0, q1, opts);
                     policy[s] = send ? Action::Transmit : Action::Idle;
                     v[s] = send ? q1 : q0;
                   }
                   return evaluations;
                 });
}

SolveReport rvi_threshold_no_sensing(const NoSensingModel& model, double lambda,
                                     const SolveOptions& opts) {
  const FiniteMdp& mdp = model.mdp();
  const auto& states = model.states();
  const double tau = opts.aperiodicity;

  // Visit order: (aoi, k) groups, beliefs ascending by value within a group.
  std::vector<std::size_t> order(states.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& sa = states[a];
    const auto& sb = states[b];
    if (sa.k != sb.k) return sa.k < sb.k;
    if (sa.aoi != sb.aoi) return sa.aoi < sb.aoi;
    return sa.belief.value < sb.belief.value;
  });

  return run_rvi(mdp, lambda, opts,
                 [&](const std::vector<double>& h, std::vector<double>& v, Policy& policy) {
                   std::size_t evaluations = 0;
                   double threshold = kInf;
                   int group_aoi = -1;
                   int group_k = -1;
                   for (std::size_t s : order) {
                     const auto& st = states[s];
                     if (st.aoi != group_aoi || st.k != group_k) {
                       group_aoi = st.aoi;
                       group_k = st.k;
                       threshold = kInf;
                     }
                     if (!mdp.can_transmit(s)) {
                       policy[s] = Action::Idle;
                       v[s] = q_value(mdp, s, Action::Idle, lambda, tau, h);
                       continue;
                     }
                     if (st.belief.value >= threshold) {
                       policy[s] = Action::Transmit;
                       v[s] = q_value(mdp, s, Action::Transmit, lambda, tau, h);
                       continue;
                     }
                     ++evaluations;
                     const double q0 = q_value(mdp, s, Action::Idle, lambda, tau, h);
                     const double q1 = q_value(mdp, s, Action::Transmit, lambda, tau, h);
                     const bool send = transmit_wins(q0, q1, opts);
                     if (send) threshold = st.belief.value;
                     policy[s] = send ? Action::Transmit : Action::Idle;
                     v[s] = send ? q1 : q0;
                   }
                   return evaluations;
                 });
}

SolveReport rvi_threshold_delayed(const DelayedModel& model, double lambda,
                                  const SolveOptions& opts) {
  const FiniteMdp& mdp = model.mdp();
  const auto& states = model.states();
  const double tau = opts.aperiodicity;
  const int K = model.instance().frame.length();

  // Visit order: per k, the g = 0 states by ascending AoI, then g = 1.
  std::vector<std::size_t> order(states.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& sa = states[a];
    const auto& sb = states[b];
    if (sa.k != sb.k) return sa.k < sb.k;
    if (sa.g != sb.g) return sa.g < sb.g;
    return sa.aoi < sb.aoi;
  });

  constexpr int kNever = std::numeric_limits<int>::max();
  std::vector<std::array<int, 2>> threshold(static_cast<std::size_t>(K) + 1);

  return run_rvi(mdp, lambda, opts,
                 [&](const std::vector<double>& h, std::vector<double>& v, Policy& policy) {
                   for (auto& t : threshold) t = {kNever, kNever};
                   std::size_t evaluations = 0;
                   for (std::size_t s : order) {
                     const auto& st = states[s];
                     auto& th = threshold[static_cast<std::size_t>(st.k)];
                     if (!mdp.can_transmit(s)) {
                       policy[s] = Action::Idle;
                       v[s] = q_value(mdp, s, Action::Idle, lambda, tau, h);
                       continue;
                     }
                     if (st.aoi >= th[static_cast<std::size_t>(st.g)]) {
                       policy[s] = Action::Transmit;
                       v[s] = q_value(mdp, s, Action::Transmit, lambda, tau, h);
                       continue;
                     }
                     ++evaluations;
                     const double q0 = q_value(mdp, s, Action::Idle, lambda, tau, h);
                     const double q1 = q_value(mdp, s, Action::Transmit, lambda, tau, h);
                     const bool send = transmit_wins(q0, q1, opts);
                     if (send) {
                       th[static_cast<std::size_t>(st.g)] = st.aoi;
                       th[1] = std::min(th[1], st.aoi);
                     }
                     policy[s] = send ? Action::Transmit : Action::Idle;
                     v[s] = send ? q1 : q0;
                   }
                   return evaluations;
                 });
}

// ---------------------------------------------------------------------------
// Discounted value iteration

std::vector<double> discounted_vi(const FiniteMdp& mdp, double lambda, double beta,
                                  std::size_t n_iters, double stop_below) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("discount factor must lie in (0,1)");
  const std::size_t n = mdp.size();
  std::vector<double> v(n, 0.0);
  std::vector<double> next(n, 0.0);
  auto q = [&](std::size_t s, Action u) {
    double expect = 0.0;
    for (const Transition& t : mdp.successors(s, u)) expect += t.probability * v[t.to];
    return stage_cost(mdp.aoi(s), u, lambda) + beta * expect;
  };
  for (std::size_t it = 0; it < n_iters; ++it) {
    double change = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      double best = q(s, Action::Idle);
      if (mdp.can_transmit(s)) best = std::min(best, q(s, Action::Transmit));
      change = std::max(change, std::abs(best - v[s]));
      next[s] = best;
    }
    v.swap(next);
    if (stop_below > 0.0 && change < stop_below) break;
  }
  return v;
}

Policy discounted_greedy_policy(const FiniteMdp& mdp, const std::vector<double>& value,
                                double lambda, double beta) {
  Policy policy(mdp.size(), Action::Idle);
  for (std::size_t s = 0; s < mdp.size(); ++s) {
    if (!mdp.can_transmit(s)) continue;
    auto q = [&](Action u) {
      double expect = 0.0;
      for (const Transition& t : mdp.successors(s, u)) expect += t.probability * value[t.to];
      return stage_cost(mdp.aoi(s), u, lambda) + beta * expect;
    };
    if (q(Action::Transmit) < q(Action::Idle)) policy[s] = Action::Transmit;
  }
  return policy;
}

// ---------------------------------------------------------------------------
// Policy evaluation

namespace {

void check_policy(const FiniteMdp& mdp, const Policy& policy) {
  if (policy.size() != mdp.size()) throw DomainError("policy size differs from the model");
  for (std::size_t s = 0; s < mdp.size(); ++s) {
    if (policy[s] == Action::Transmit && !mdp.can_transmit(s)) {
      throw DomainError("policy transmits at a state where AoI < K");
    }
  }
}

/// States reachable from the reference state under the policy.
std::vector<std::size_t> reachable_under(const FiniteMdp& mdp, const Policy& policy) {
  std::vector<std::uint8_t> seen(mdp.size(), 0);
  std::vector<std::size_t> out;
  std::deque<std::size_t> queue{mdp.reference()};
  seen[mdp.reference()] = 1;
  while (!queue.empty()) {
    const std::size_t s = queue.front();
    queue.pop_front();
    out.push_back(s);
    for (const Transition& t : mdp.successors(s, policy[s])) {
      if (t.probability > 0.0 && !seen[t.to]) {
        seen[t.to] = 1;
        queue.push_back(t.to);
      }
    }
  }
  return out;
}

}  // namespace

std::vector<double> stationary_distribution(const FiniteMdp& mdp, const Policy& policy,
                                            const EvaluationOptions& opts) {
  check_policy(mdp, policy);
  const auto support = reachable_under(mdp, policy);
  const std::size_t n = support.size();
  std::vector<std::int64_t> local(mdp.size(), -1);
  for (std::size_t i = 0; i < n; ++i) local[support[i]] = static_cast<std::int64_t>(i);

  std::vector<double> x(n, 0.0);
  std::vector<double> pushed(n, 0.0);
  x[static_cast<std::size_t>(local[mdp.reference()])] = 1.0;
  const double keep = opts.damping;

  double residual = kInf;
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    std::fill(pushed.begin(), pushed.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (x[i] == 0.0) continue;
      for (const Transition& t : mdp.successors(support[i], policy[support[i]])) {
        pushed[static_cast<std::size_t>(local[t.to])] += x[i] * t.probability;
      }
    }
    residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double next = keep * x[i] + (1.0 - keep) * pushed[i];
      residual += std::abs(next - x[i]);
      x[i] = next;
    }
    if (residual < opts.tolerance) break;
  }
  if (!(residual < opts.tolerance)) {
    throw NonConvergence("stationary distribution did not converge (residual " +
                             std::to_string(residual) + ")",
                         residual);
  }
  double mass = 0.0;
  for (double p : x) mass += p;
  std::vector<double> out(mdp.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) out[support[i]] = x[i] / mass;
  return out;
}

std::vector<double> stationary_distribution_exact(const FiniteMdp& mdp, const Policy& policy) {
  check_policy(mdp, policy);
  const auto support = reachable_under(mdp, policy);
  const auto n = static_cast<Eigen::Index>(support.size());
  std::vector<Eigen::Index> local(mdp.size(), -1);
  for (Eigen::Index i = 0; i < n; ++i) local[support[static_cast<std::size_t>(i)]] = i;

  // Rows of A are balance equations pi (P - I) = 0; the last one is replaced
  // by the normalization sum(pi) = 1.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t s = support[static_cast<std::size_t>(i)];
    for (const Transition& t : mdp.successors(s, policy[s])) a(local[t.to], i) += t.probability;
    a(i, i) -= 1.0;
  }
  a.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (lu.rank() < n) {
    // Several closed classes reachable from the reference state.
    return stationary_distribution(mdp, policy);
  }
  const Eigen::VectorXd pi = lu.solve(rhs);
  std::vector<double> out(mdp.size(), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) out[support[static_cast<std::size_t>(i)]] = pi(i);
  return out;
}

namespace {

PolicyAverages averages_from(const FiniteMdp& mdp, const Policy& policy,
                             const std::vector<double>& pi) {
  PolicyAverages out;
  for (std::size_t s = 0; s < mdp.size(); ++s) {
    if (pi[s] == 0.0) continue;
    out.avg_aoi += pi[s] * mdp.aoi(s);
    out.avg_energy += pi[s] * as_int(policy[s]);
  }
  return out;
}

}  // namespace

PolicyAverages evaluate_policy(const FiniteMdp& mdp, const Policy& policy,
                               const EvaluationOptions& opts) {
  return averages_from(mdp, policy, stationary_distribution(mdp, policy, opts));
}

double average_energy_of_policy(const FiniteMdp& mdp, const Policy& policy,
                                const EvaluationOptions& opts) {
  return evaluate_policy(mdp, policy, opts).avg_energy;
}

PolicyAverages evaluate_policy_exact(const FiniteMdp& mdp, const Policy& policy) {
  return averages_from(mdp, policy, stationary_distribution_exact(mdp, policy));
}

// ---------------------------------------------------------------------------
// Threshold structure

Action ThresholdPolicyBelief::action(int aoi, int k, double belief) const {
  if (aoi < frame_length) return Action::Idle;
  auto it = threshold.find({aoi, k});
  if (it == threshold.end()) throw DomainError("no belief threshold stored for this (AoI, k)");
  return belief >= it->second ? Action::Transmit : Action::Idle;
}

int ThresholdPolicyAoI::at(int k, int g) const {
  auto it = threshold.find({k, g});
  return it == threshold.end() ? kNever : it->second;
}

Action ThresholdPolicyAoI::action(int aoi, int k, int g) const {
  if (aoi < frame_length) return Action::Idle;
  return aoi >= at(k, g) ? Action::Transmit : Action::Idle;
}

namespace {

/// Counts groups whose consecutive actions (in the given order) go 1 -> 0.
template <class Key>
std::size_t count_switch_violations(const std::vector<std::pair<Key, Action>>& ordered) {
  std::size_t bad = 0;
  bool flagged = false;
  bool seen_transmit = false;
  const Key* current = nullptr;
  for (const auto& [key, u] : ordered) {
    if (current == nullptr || !(*current == key)) {
      current = &key;
      seen_transmit = false;
      flagged = false;
    }
    if (u == Action::Transmit) {
      seen_transmit = true;
    } else if (seen_transmit && !flagged) {
      ++bad;
      flagged = true;
    }
  }
  return bad;
}

}  // namespace

std::size_t threshold_violations(const NoSensingModel& model, const Policy& policy,
                                 const std::vector<bool>& only) {
  const auto& states = model.states();
  std::vector<std::size_t> idx;
  for (std::size_t s = 0; s < states.size(); ++s) {
    if (model.mdp().can_transmit(s) && (only.empty() || only.at(s))) idx.push_back(s);
  }
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const auto& sa = states[a];
    const auto& sb = states[b];
    if (sa.k != sb.k) return sa.k < sb.k;
    if (sa.aoi != sb.aoi) return sa.aoi < sb.aoi;
    return sa.belief.value < sb.belief.value;
  });
  std::vector<std::pair<std::pair<int, int>, Action>> ordered;
  ordered.reserve(idx.size());
  for (std::size_t s : idx) ordered.push_back({{states[s].aoi, states[s].k}, policy.at(s)});
  return count_switch_violations(ordered);
}

std::size_t threshold_violations(const DelayedModel& model, const Policy& policy,
                                 const std::vector<bool>& only) {
  const auto& states = model.states();
  std::vector<std::pair<std::pair<int, int>, Action>> ordered;
  // states() is sorted by (k, aoi, g); regroup by (k, g) with AoI ascending.
  std::vector<std::size_t> idx;
  for (std::size_t s = 0; s < states.size(); ++s) {
    if (model.mdp().can_transmit(s) && (only.empty() || only.at(s))) idx.push_back(s);
  }
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const auto& sa = states[a];
    const auto& sb = states[b];
    if (sa.k != sb.k) return sa.k < sb.k;
    if (sa.g != sb.g) return sa.g < sb.g;
    return sa.aoi < sb.aoi;
  });
  for (std::size_t s : idx) ordered.push_back({{states[s].k, states[s].g}, policy.at(s)});
  return count_switch_violations(ordered);
}

ThresholdPolicyBelief extract_thresholds(const NoSensingModel& model, const Policy& policy) {
  ThresholdPolicyBelief out;
  out.frame_length = model.instance().frame.length();
  const auto& states = model.states();
  for (std::size_t s = 0; s < states.size(); ++s) {
    const auto key = std::make_pair(states[s].aoi, states[s].k);
    auto [it, inserted] = out.threshold.try_emplace(key, kInf);
    if (policy.at(s) == Action::Transmit) it->second = std::min(it->second, states[s].belief.value);
  }
  return out;
}

ThresholdPolicyAoI extract_thresholds(const DelayedModel& model, const Policy& policy) {
  ThresholdPolicyAoI out;
  out.frame_length = model.instance().frame.length();
  const auto& states = model.states();
  for (std::size_t s = 0; s < states.size(); ++s) {
    const auto key = std::make_pair(states[s].k, states[s].g);
    auto [it, inserted] = out.threshold.try_emplace(key, ThresholdPolicyAoI::kNever);
    if (policy.at(s) == Action::Transmit) it->second = std::min(it->second, states[s].aoi);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lagrangian machinery

double MixturePolicy::avg_aoi() const {
  return q * minus_averages.avg_aoi + (1.0 - q) * plus_averages.avg_aoi;
}

double MixturePolicy::avg_energy() const {
  return q * minus_averages.avg_energy + (1.0 - q) * plus_averages.avg_energy;
}

double mixture_weight(double e_max, double energy_minus, double energy_plus) {
  if (energy_minus == energy_plus) return 1.0;
  const double q = (e_max - energy_plus) / (energy_minus - energy_plus);
  return std::clamp(q, 0.0, 1.0);
}

namespace {

template <class Model, class Solve>
MixturePolicy bisect_impl(const Model& model, double e_max, const BisectionOptions& opts,
                          Solve&& solve) {
  if (!(e_max > 0.0 && e_max <= 1.0)) throw DomainError("E_max must lie in (0,1]");
  if (!(opts.lambda_tolerance > 0.0)) throw DomainError("lambda tolerance must be positive");
  if (!(opts.lambda_hi_init > 0.0)) throw DomainError("initial lambda_hi must be positive");

  const FiniteMdp& mdp = model.mdp();
  SolveOptions solve_opts = opts.solve;
  MixturePolicy out;

  auto run = [&](double lambda) {
    SolveReport rep = solve(model, lambda, solve_opts);
    ++out.solves;
    if (opts.warm_start) solve_opts.initial_bias = rep.bias;
    PolicyAverages avg = evaluate_policy(mdp, rep.policy, opts.evaluation);
    return std::make_pair(std::move(rep.policy), avg);
  };

  auto [policy0, avg0] = run(0.0);
  if (avg0.avg_energy <= e_max) {
    out.minus = policy0;
    out.plus = std::move(policy0);
    out.minus_averages = avg0;
    out.plus_averages = avg0;
    out.q = 1.0;
    return out;
  }

  double lo = 0.0;
  Policy lo_policy = std::move(policy0);
  PolicyAverages lo_avg = avg0;

  double hi = opts.lambda_hi_init;
  auto [hi_policy, hi_avg] = run(hi);
  int doublings = 0;
  while (hi_avg.avg_energy > e_max) {
    if (++doublings > opts.max_doublings) {
      throw NonConvergence("lambda doubling budget exhausted before E_max was met",
                           hi_avg.avg_energy - e_max);
    }
    lo = hi;
    lo_policy = std::move(hi_policy);
    lo_avg = hi_avg;
    hi *= 2.0;
    std::tie(hi_policy, hi_avg) = run(hi);
  }

  while (hi - lo > opts.lambda_tolerance) {
    const double mid = 0.5 * (lo + hi);
    auto [policy, avg] = run(mid);
    if (avg.avg_energy > e_max) {
      lo = mid;
      lo_policy = std::move(policy);
      lo_avg = avg;
    } else {
      hi = mid;
      hi_policy = std::move(policy);
      hi_avg = avg;
    }
  }

  out.minus = std::move(lo_policy);
  out.plus = std::move(hi_policy);
  out.minus_averages = lo_avg;
  out.plus_averages = hi_avg;
  out.lambda_minus = lo;
  out.lambda_plus = hi;
  out.q = mixture_weight(e_max, lo_avg.avg_energy, hi_avg.avg_energy);
  return out;
}

}  // namespace

MixturePolicy bisect_lambda(const NoSensingModel& model, double e_max,
                            const BisectionOptions& opts) {
  return bisect_impl(model, e_max, opts, [](const NoSensingModel& m, double l, const SolveOptions& o) {
    return rvi_threshold_no_sensing(m, l, o);
  });
}

MixturePolicy bisect_lambda(const DelayedModel& model, double e_max,
                            const BisectionOptions& opts) {
  return bisect_impl(model, e_max, opts, [](const DelayedModel& m, double l, const SolveOptions& o) {
    return rvi_threshold_delayed(m, l, o);
  });
}

// ---------------------------------------------------------------------------
// Brute-force oracle

OracleResult enumerate_and_evaluate(const FiniteMdp& mdp, double lambda, std::size_t state_cap) {
  if (mdp.size() > state_cap) {
    throw DomainError("oracle state cap exceeded (" + std::to_string(mdp.size()) + " > " +
                      std::to_string(state_cap) + ")");
  }
  std::vector<std::size_t> free;
  for (std::size_t s = 0; s < mdp.size(); ++s) {
    if (mdp.can_transmit(s)) free.push_back(s);
  }
  OracleResult best;
  best.gain = kInf;
  double best_energy = kInf;
  Policy policy(mdp.size(), Action::Idle);
  const std::uint64_t combos = std::uint64_t{1} << free.size();
  for (std::uint64_t mask = 0; mask < combos; ++mask) {
    for (std::size_t i = 0; i < free.size(); ++i) {
      policy[free[i]] = (mask >> i) & 1U ? Action::Transmit : Action::Idle;
    }
    const PolicyAverages avg = evaluate_policy_exact(mdp, policy);
    const double gain = avg.avg_aoi + lambda * avg.avg_energy;
    ++best.policies_evaluated;
    // Equal gains keep the lower-energy policy, mirroring the idle tie-break.
    const bool better = gain < best.gain - 1e-12 ||
                        (gain <= best.gain + 1e-12 && avg.avg_energy < best_energy - 1e-12);
    if (better) {
      best.gain = gain;
      best_energy = avg.avg_energy;
      best.policy = policy;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Dual function

namespace {

template <class Model, class Solve>
std::vector<DualPoint> dual_impl(const Model& model, double e_max,
                                 const std::vector<double>& lambdas, SolveOptions opts,
                                 Solve&& solve) {
  if (lambdas.empty()) throw DomainError("lambda grid must be non-empty");
  std::vector<DualPoint> out;
  out.reserve(lambdas.size());
  for (double lambda : lambdas) {
    if (!(lambda >= 0.0)) throw DomainError("lambda grid must be non-negative");
    SolveReport rep = solve(model, lambda, opts);
    opts.initial_bias = rep.bias;
    out.push_back({lambda, rep.gain, rep.gain - lambda * e_max});
  }
  return out;
}

}  // namespace

std::vector<DualPoint> dual_value_sweep(const NoSensingModel& model, double e_max,
                                        const std::vector<double>& lambdas,
                                        const SolveOptions& opts) {
  return dual_impl(model, e_max, lambdas, opts,
                   [](const NoSensingModel& m, double l, const SolveOptions& o) {
                     return rvi_threshold_no_sensing(m, l, o);
                   });
}

std::vector<DualPoint> dual_value_sweep(const DelayedModel& model, double e_max,
                                        const std::vector<double>& lambdas,
                                        const SolveOptions& opts) {
  return dual_impl(model, e_max, lambdas, opts,
                   [](const DelayedModel& m, double l, const SolveOptions& o) {
                     return rvi_threshold_delayed(m, l, o);
                   });
}

}  // namespace aoi
