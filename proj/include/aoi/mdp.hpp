#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "aoi/channel.hpp"

namespace aoi {

/// K slots per frame; slot indices run 1..K.
class FrameSpec {
 public:
  explicit FrameSpec(int slots_per_frame);

  int length() const { return K_; }
  /// (k)_+
  int next(int k) const { return k % K_ + 1; }
  /// (k)_-
  int prev(int k) const { return (K_ + k - 2) % K_ + 1; }
  /// aoi in A_k = { mK + (k)_- : m >= 0 }.
  bool aoi_admissible(int aoi, int k) const;

 private:
  int K_;
};

/// Cap N on AoI and on the number of unobserved belief steps. Requires N > K.
class TruncationBound {
 public:
  TruncationBound(int cap, const FrameSpec& frame);

  int cap() const { return N_; }
  /// phi(x) = min(x, N)
  int clamp(int aoi) const { return aoi < N_ ? aoi : N_; }

 private:
  int N_;
};

/// One problem instance: frame, channel and truncation together.
struct Instance {
  Instance(int K, double p11, double p01, int N);

  FrameSpec frame;
  ChannelModel channel;
  TruncationBound bound;
};

/// The finite set of symbolic beliefs used by the truncated belief MDP.
///
/// Beliefs are T^m(p01) and T^m(p11) for 0 <= m <= N. Symbolic beliefs whose
/// values agree within kDedupTolerance collapse onto the one with the smaller
/// m (FromGood first on equal m), which keeps the set finite and free of
/// rounding twins once T^m has converged numerically.
class BeliefLattice {
 public:
  static constexpr double kDedupTolerance = 1e-12;

  BeliefLattice(const ChannelModel& ch, int cap);

  const ChannelModel& channel() const { return channel_; }
  int cap() const { return cap_; }

  /// Canonical representative of T^steps(origin), steps <= N.
  Belief make(BeliefOrigin origin, int steps) const;
  Belief canonical(const Belief& b) const { return make(b.origin, b.steps); }

  Belief after_success() const { return make(BeliefOrigin::FromGood, 0); }
  Belief after_failure() const { return make(BeliefOrigin::FromBad, 0); }
  /// psi(T(w)) expressed symbolically.
  Belief after_idle(const Belief& b) const;

  /// (T^N(p01), T^N(p11)): open interval that psi lifts to T^N(p11).
  double gap_low() const { return bad_[cap_]; }
  double gap_high() const { return good_[cap_]; }

  /// Canonical beliefs, ascending by value.
  const std::vector<Belief>& members() const { return members_; }

  /// Closest canonical belief to `value` among those with steps <= max_steps.
  Belief nearest(double value, int max_steps) const;

 private:
  ChannelModel channel_;
  int cap_;
  std::vector<double> good_;
  std::vector<double> bad_;
  std::vector<Belief> canon_good_;
  std::vector<Belief> canon_bad_;
  std::vector<Belief> members_;
};

struct StateNoSensing {
  int aoi = 1;
  int k = 1;
  Belief belief;

  friend bool operator==(const StateNoSensing&, const StateNoSensing&) = default;
  friend std::strong_ordering operator<=>(const StateNoSensing& a, const StateNoSensing& b) {
    if (auto c = a.k <=> b.k; c != 0) return c;
    if (auto c = a.aoi <=> b.aoi; c != 0) return c;
    return a.belief <=> b.belief;
  }
};

struct StateDelayed {
  int aoi = 1;
  int k = 1;
  int g = 1;  ///< channel state of the previous slot

  friend bool operator==(const StateDelayed&, const StateDelayed&) = default;
  friend std::strong_ordering operator<=>(const StateDelayed& a, const StateDelayed& b) {
    if (auto c = a.k <=> b.k; c != 0) return c;
    if (auto c = a.aoi <=> b.aoi; c != 0) return c;
    return a.g <=> b.g;
  }
};

template <class State>
struct Successor {
  State state;
  double probability;
};

/// Untruncated AoI recursion: k after a delivery, aoi + 1 otherwise.
int aoi_step(const FrameSpec& frame, int aoi, int k, Action u, Observation obs);

/// Transmission is forbidden once this frame's update has been delivered.
inline bool transmit_allowed(const FrameSpec& frame, int aoi) { return aoi >= frame.length(); }

/// Lagrangian stage cost aoi + lambda * u.
double stage_cost(int aoi, Action u, double lambda);

std::vector<Successor<StateNoSensing>> kernel_no_sensing(const Instance& inst,
                                                         const BeliefLattice& lattice,
                                                         const StateNoSensing& s, Action u);

std::vector<Successor<StateDelayed>> kernel_delayed(const Instance& inst, const StateDelayed& s,
                                                    Action u);

/// Reference state (K, 1, p11).
StateNoSensing reference_state_no_sensing(const Instance& inst, const BeliefLattice& lattice);
/// Reference state (K, 1, g = 1).
StateDelayed reference_state_delayed(const Instance& inst);

/// Simulation start (K, 1, w) where w is the in-space belief nearest to the
/// stationary good probability.
StateNoSensing initial_state_no_sensing(const Instance& inst, const BeliefLattice& lattice);

/// All states reachable from the reference state and from the simulation
/// start states under admissible actions, ordered by (k, aoi, origin, steps).
std::vector<StateNoSensing> enumerate_states_no_sensing(const Instance& inst,
                                                        const BeliefLattice& lattice);
std::vector<StateDelayed> enumerate_states_delayed(const Instance& inst);

struct Transition {
  std::uint32_t to = 0;
  double probability = 0.0;
};

/// Index-based finite MDP with at most two successors per (state, action).
class FiniteMdp {
 public:
  struct Row {
    std::array<Transition, 2> out{};
    std::uint8_t count = 0;

    void push(std::uint32_t to, double p);
    std::span<const Transition> view() const { return {out.data(), count}; }
  };

  FiniteMdp() = default;
  FiniteMdp(int frame_length, std::size_t reference) : K_(frame_length), reference_(reference) {}

  /// Appends a state. `transmit` is ignored when transmission is not admissible.
  std::size_t add_state(int aoi, int k, bool can_transmit, Row idle, Row transmit);
  void set_reference(std::size_t s) { reference_ = s; }

  std::size_t size() const { return aoi_.size(); }
  int aoi(std::size_t s) const { return aoi_[s]; }
  int slot(std::size_t s) const { return k_[s]; }
  bool can_transmit(std::size_t s) const { return can_transmit_[s] != 0; }
  std::span<const Transition> successors(std::size_t s, Action u) const {
    return u == Action::Idle ? idle_[s].view() : transmit_[s].view();
  }
  std::size_t reference() const { return reference_; }
  int frame_length() const { return K_; }

 private:
  int K_ = 1;
  std::size_t reference_ = 0;
  std::vector<int> aoi_;
  std::vector<int> k_;
  std::vector<std::uint8_t> can_transmit_;
  std::vector<Row> idle_;
  std::vector<Row> transmit_;
};

/// Enumerated belief MDP for the case without channel sensing.
class NoSensingModel {
 public:
  explicit NoSensingModel(const Instance& inst);

  const Instance& instance() const { return inst_; }
  const BeliefLattice& lattice() const { return lattice_; }
  const std::vector<StateNoSensing>& states() const { return states_; }
  const FiniteMdp& mdp() const { return mdp_; }
  std::optional<std::size_t> index_of(const StateNoSensing& s) const;
  StateNoSensing initial_state() const { return initial_state_no_sensing(inst_, lattice_); }

 private:
  Instance inst_;
  BeliefLattice lattice_;
  std::vector<StateNoSensing> states_;
  FiniteMdp mdp_;
};

/// Enumerated MDP for the case with delayed channel sensing.
class DelayedModel {
 public:
  explicit DelayedModel(const Instance& inst);

  const Instance& instance() const { return inst_; }
  const std::vector<StateDelayed>& states() const { return states_; }
  const FiniteMdp& mdp() const { return mdp_; }
  std::optional<std::size_t> index_of(const StateDelayed& s) const;

 private:
  Instance inst_;
  std::vector<StateDelayed> states_;
  FiniteMdp mdp_;
};

}  // namespace aoi
