#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "aoi/mdp.hpp"
#include "aoi/solver.hpp"

namespace aoi {

/// Result of one structural check over a computed value function or policy.
struct CheckOutcome {
  std::size_t checked = 0;
  std::size_t violations = 0;
  std::string counterexample;  ///< first violation found, empty if none

  bool passed() const { return violations == 0; }
  void merge(const CheckOutcome& other);
  void flag(const std::string& where);
};

/// States whose successors are not altered by truncation: AoI below N and,
/// without sensing, fewer than N unobserved steps.
std::vector<bool> interior_states(const NoSensingModel& model);
std::vector<bool> interior_states(const DelayedModel& model);

/// Discounted values iterated from zero until the sup-norm change falls
/// below (1 - beta) * 1e-8.
std::vector<double> converged_discounted_values(const FiniteMdp& mdp, double lambda, double beta);

/// V(aoi + K, k, w) >= V(aoi, k, w) for interior pairs with the same belief.
CheckOutcome check_value_monotone_in_aoi(const NoSensingModel& model,
                                         const std::vector<double>& value, double tol = 1e-9);
/// V(aoi + K, k, g) >= V(aoi, k, g) for interior pairs.
CheckOutcome check_value_monotone_in_aoi(const DelayedModel& model,
                                         const std::vector<double>& value, double tol = 1e-9);

/// V(aoi, k, w) is non-increasing in w over interior states.
CheckOutcome check_value_monotone_in_belief(const NoSensingModel& model,
                                            const std::vector<double>& value, double tol = 1e-9);

/// For interior beliefs y < z < x at one (aoi, k) and w = (z - y) / (x - y):
/// (1 - w) lambda + w V(x) + (1 - w) V(y) >= V(z).
CheckOutcome check_belief_mixing_inequality(const NoSensingModel& model,
                                            const std::vector<double>& value, double lambda,
                                            double tol = 1e-9);

/// At most one idle -> transmit switch per group, over the flagged states.
CheckOutcome check_threshold_shape(const NoSensingModel& model, const Policy& policy,
                                   const std::vector<bool>& only = {});
CheckOutcome check_threshold_shape(const DelayedModel& model, const Policy& policy,
                                   const std::vector<bool>& only = {});

/// AoI threshold with g = 1 never exceeds the one with g = 0, per slot k.
CheckOutcome check_threshold_ordering(const DelayedModel& model, const Policy& policy,
                                      const std::vector<bool>& only = {});

}  // namespace aoi
