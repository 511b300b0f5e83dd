#include "aoi/properties.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <tuple>

namespace aoi {

void CheckOutcome::merge(const CheckOutcome& other) {
  checked += other.checked;
  violations += other.violations;
  if (counterexample.empty()) counterexample = other.counterexample;
}

void CheckOutcome::flag(const std::string& where) {
  ++violations;
  if (counterexample.empty()) counterexample = where;
}

namespace {

double slack(double tol, double a, double b) {
  return tol * std::max({1.0, std::abs(a), std::abs(b)});
}

std::string describe(const StateNoSensing& s) {
  std::ostringstream os;
  os << "(aoi=" << s.aoi << ",k=" << s.k << ",w=" << s.belief.value << ")";
  return os.str();
}

std::string describe(const StateDelayed& s) {
  std::ostringstream os;
  os << "(aoi=" << s.aoi << ",k=" << s.k << ",g=" << s.g << ")";
  return os.str();
}

/// Interior no-sensing states grouped by (aoi, k), beliefs ascending.
std::map<std::pair<int, int>, std::vector<std::size_t>> belief_groups(
    const NoSensingModel& model, const std::vector<bool>& interior) {
  const auto& states = model.states();
  std::map<std::pair<int, int>, std::vector<std::size_t>> groups;
  for (std::size_t s = 0; s < states.size(); ++s) {
    if (interior[s]) groups[{states[s].aoi, states[s].k}].push_back(s);
  }
  for (auto& [key, members] : groups) {
    std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return states[a].belief.value < states[b].belief.value;
    });
  }
  return groups;
}

}  // namespace

std::vector<bool> interior_states(const NoSensingModel& model) {
  const int N = model.instance().bound.cap();
  std::vector<bool> out;
  out.reserve(model.states().size());
  for (const auto& s : model.states()) out.push_back(s.aoi < N && s.belief.steps < N);
  return out;
}

std::vector<bool> interior_states(const DelayedModel& model) {
  const int N = model.instance().bound.cap();
  std::vector<bool> out;
  out.reserve(model.states().size());
  for (const auto& s : model.states()) out.push_back(s.aoi < N);
  return out;
}

std::vector<double> converged_discounted_values(const FiniteMdp& mdp, double lambda, double beta) {
  return discounted_vi(mdp, lambda, beta, 1'000'000, (1.0 - beta) * 1e-8);
}

CheckOutcome check_value_monotone_in_aoi(const NoSensingModel& model,
                                         const std::vector<double>& value, double tol) {
  const auto interior = interior_states(model);
  const auto& states = model.states();
  const int K = model.instance().frame.length();
  CheckOutcome out;
  for (std::size_t s = 0; s < states.size(); ++s) {
    if (!interior[s]) continue;
    StateNoSensing older = states[s];
    older.aoi += K;
    const auto o = model.index_of(older);
    if (!o || !interior[*o]) continue;
    ++out.checked;
    if (value[*o] < value[s] - slack(tol, value[*o], value[s])) {
      out.flag("V" + describe(older) + " < V" + describe(states[s]));
    }
  }
  return out;
}

CheckOutcome check_value_monotone_in_aoi(const DelayedModel& model,
                                         const std::vector<double>& value, double tol) {
  const auto interior = interior_states(model);
  const auto& states = model.states();
  const int K = model.instance().frame.length();
  CheckOutcome out;
  for (std::size_t s = 0; s < states.size(); ++s) {
    if (!interior[s]) continue;
    StateDelayed older = states[s];
    older.aoi += K;
    const auto o = model.index_of(older);
    if (!o || !interior[*o]) continue;
    ++out.checked;
    if (value[*o] < value[s] - slack(tol, value[*o], value[s])) {
      out.flag("V" + describe(older) + " < V" + describe(states[s]));
    }
  }
  return out;
}

CheckOutcome check_value_monotone_in_belief(const NoSensingModel& model,
                                            const std::vector<double>& value, double tol) {
  const auto& states = model.states();
  CheckOutcome out;
  for (const auto& [key, members] : belief_groups(model, interior_states(model))) {
    for (std::size_t i = 1; i < members.size(); ++i) {
      const std::size_t lo = members[i - 1];
      const std::size_t hi = members[i];
      ++out.checked;
      if (value[hi] > value[lo] + slack(tol, value[hi], value[lo])) {
        out.flag("V" + describe(states[hi]) + " > V" + describe(states[lo]));
      }
    }
  }
  return out;
}

CheckOutcome check_belief_mixing_inequality(const NoSensingModel& model,
                                            const std::vector<double>& value, double lambda,
                                            double tol) {
  const auto& states = model.states();
  CheckOutcome out;
  for (const auto& [key, members] : belief_groups(model, interior_states(model))) {
    const std::size_t n = members.size();
    for (std::size_t iy = 0; iy < n; ++iy) {
      const double y = states[members[iy]].belief.value;
      const double vy = value[members[iy]];
      for (std::size_t ix = iy + 2; ix < n; ++ix) {
        const double x = states[members[ix]].belief.value;
        const double vx = value[members[ix]];
        for (std::size_t iz = iy + 1; iz < ix; ++iz) {
          const double z = states[members[iz]].belief.value;
          const double w = (z - y) / (x - y);
          const double lhs = (1.0 - w) * lambda + w * vx + (1.0 - w) * vy;
          const double rhs = value[members[iz]];
          ++out.checked;
          if (lhs < rhs - slack(tol, lhs, rhs)) {
            std::ostringstream os;
            os << "mixing at " << describe(states[members[iz]]) << " with y=" << y << " x=" << x
               << ": " << lhs << " < " << rhs;
            out.flag(os.str());
          }
        }
      }
    }
  }
  return out;
}

CheckOutcome check_threshold_shape(const NoSensingModel& model, const Policy& policy,
                                   const std::vector<bool>& only) {
  CheckOutcome out;
  out.checked = policy.size();
  const std::size_t bad = threshold_violations(model, policy, only);
  if (bad > 0) {
    out.violations = bad;
    out.counterexample = std::to_string(bad) + " (aoi,k) groups switch back to idle";
  }
  return out;
}

CheckOutcome check_threshold_shape(const DelayedModel& model, const Policy& policy,
                                   const std::vector<bool>& only) {
  CheckOutcome out;
  out.checked = policy.size();
  const std::size_t bad = threshold_violations(model, policy, only);
  if (bad > 0) {
    out.violations = bad;
    out.counterexample = std::to_string(bad) + " (k,g) groups switch back to idle";
  }
  return out;
}

CheckOutcome check_threshold_ordering(const DelayedModel& model, const Policy& policy,
                                      const std::vector<bool>& only) {
  const auto& states = model.states();
  const int K = model.instance().frame.length();
  std::vector<std::array<int, 2>> threshold(static_cast<std::size_t>(K) + 1,
                                            {ThresholdPolicyAoI::kNever, ThresholdPolicyAoI::kNever});
  for (std::size_t s = 0; s < states.size(); ++s) {
    if (!only.empty() && !only.at(s)) continue;
    if (policy.at(s) != Action::Transmit) continue;
    int& t = threshold[static_cast<std::size_t>(states[s].k)][static_cast<std::size_t>(states[s].g)];
    t = std::min(t, states[s].aoi);
  }
  CheckOutcome out;
  for (int k = 1; k <= K; ++k) {
    const auto& t = threshold[static_cast<std::size_t>(k)];
    ++out.checked;
    if (t[1] > t[0]) {
      std::ostringstream os;
      os << "k=" << k << ": threshold(g=1)=" << t[1] << " > threshold(g=0)=" << t[0];
      out.flag(os.str());
    }
  }
  return out;
}

}  // namespace aoi
