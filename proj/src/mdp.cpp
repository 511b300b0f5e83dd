#include "aoi/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iterator>
#include <map>
#include <set>
#include <stdexcept>
#include <string>

namespace aoi {

FrameSpec::FrameSpec(int slots_per_frame) : K_(slots_per_frame) {
  if (slots_per_frame < 1) throw DomainError("frame length K must be >= 1");
}

bool FrameSpec::aoi_admissible(int aoi, int k) const {
  if (k < 1 || k > K_ || aoi < 1) return false;
  const int base = prev(k);
  return aoi >= base && (aoi - base) % K_ == 0;
}

TruncationBound::TruncationBound(int cap, const FrameSpec& frame) : N_(cap) {
  if (cap <= frame.length()) {
    throw DomainError("truncation bound N must exceed K (N=" + std::to_string(cap) +
                      ", K=" + std::to_string(frame.length()) + ")");
  }
}

Instance::Instance(int K, double p11, double p01, int N)
    : frame(K), channel(p11, p01), bound(N, frame) {}

// ---------------------------------------------------------------------------
// Belief lattice

BeliefLattice::BeliefLattice(const ChannelModel& ch, int cap) : channel_(ch), cap_(cap) {
  if (cap < 1) throw DomainError("belief cap must be >= 1");
  const auto n = static_cast<std::size_t>(cap) + 1;
  good_.resize(n);
  bad_.resize(n);
  good_[0] = ch.p11();
  bad_[0] = ch.p01();
  for (std::size_t m = 1; m < n; ++m) {
    good_[m] = good_[m - 1] * ch.p11() + (1.0 - good_[m - 1]) * ch.p01();
    bad_[m] = bad_[m - 1] * ch.p11() + (1.0 - bad_[m - 1]) * ch.p01();
  }

  // value -> canonical belief
  std::map<double, Belief> seen;
  auto canonicalize = [&](BeliefOrigin origin, int m, double v) {
    auto it = seen.lower_bound(v - kDedupTolerance);
    if (it != seen.end() && it->first <= v + kDedupTolerance) return it->second;
    Belief b{origin, m, v};
    seen.emplace(v, b);
    return b;
  };
  canon_good_.resize(n);
  canon_bad_.resize(n);
  for (std::size_t m = 0; m < n; ++m) {
    canon_good_[m] = canonicalize(BeliefOrigin::FromGood, static_cast<int>(m), good_[m]);
    canon_bad_[m] = canonicalize(BeliefOrigin::FromBad, static_cast<int>(m), bad_[m]);
  }
  members_.reserve(seen.size());
  for (const auto& [v, b] : seen) members_.push_back(b);
}

Belief BeliefLattice::make(BeliefOrigin origin, int steps) const {
  if (steps < 0 || steps > cap_) {
    throw DomainError("belief steps " + std::to_string(steps) + " outside [0, N]");
  }
  const auto m = static_cast<std::size_t>(steps);
  return origin == BeliefOrigin::FromGood ? canon_good_[m] : canon_bad_[m];
}

Belief BeliefLattice::after_idle(const Belief& b) const {
  if (b.steps < cap_) return make(b.origin, b.steps + 1);
  const double y = b.value * channel_.p11() + (1.0 - b.value) * channel_.p01();
  if (gap_low() < y && y < gap_high()) return make(BeliefOrigin::FromGood, cap_);
  // y sits on an end point of the gap; snap to the matching lattice member.
  for (const Belief& m : members_) {
    if (std::abs(m.value - y) <= kDedupTolerance) return m;
  }
  return make(b.origin, cap_);
}

Belief BeliefLattice::nearest(double value, int max_steps) const {
  const Belief* best = nullptr;
  for (const Belief& m : members_) {
    if (m.steps > max_steps) continue;
    if (best == nullptr || std::abs(m.value - value) < std::abs(best->value - value)) best = &m;
  }
  if (best == nullptr) throw DomainError("no lattice belief within the step limit");
  return *best;
}

// ---------------------------------------------------------------------------
// Dynamics

int aoi_step(const FrameSpec& frame, int aoi, int k, Action u, Observation obs) {
  if (aoi < 1) throw DomainError("AoI must be >= 1");
  if (k < 1 || k > frame.length()) throw DomainError("slot index outside 1..K");
  if (u == Action::Idle && obs == Observation::Success) {
    throw DomainError("suspension cannot produce a success observation");
  }
  return (u == Action::Transmit && obs == Observation::Success) ? k : aoi + 1;
}

double stage_cost(int aoi, Action u, double lambda) {
  return static_cast<double>(aoi) + lambda * static_cast<double>(as_int(u));
}

namespace {

void check_slot(const FrameSpec& frame, int k) {
  if (k < 1 || k > frame.length()) throw DomainError("slot index outside 1..K");
}

void check_transmit(const FrameSpec& frame, int aoi, Action u) {
  if (u == Action::Transmit && !transmit_allowed(frame, aoi)) {
    throw DomainError("transmission is not admissible when AoI < K (update already delivered)");
  }
}

}  // namespace

std::vector<Successor<StateNoSensing>> kernel_no_sensing(const Instance& inst,
                                                         const BeliefLattice& lattice,
                                                         const StateNoSensing& s, Action u) {
  check_slot(inst.frame, s.k);
  check_transmit(inst.frame, s.aoi, u);
  const int k_next = inst.frame.next(s.k);
  const int aged = inst.bound.clamp(s.aoi + 1);
  std::vector<Successor<StateNoSensing>> out;
  if (u == Action::Idle) {
    out.push_back({{aged, k_next, lattice.after_idle(s.belief)}, 1.0});
    return out;
  }
  const double w = s.belief.value;
  if (w > 0.0) out.push_back({{s.k, k_next, lattice.after_success()}, w});
  if (w < 1.0) out.push_back({{aged, k_next, lattice.after_failure()}, 1.0 - w});
  return out;
}

std::vector<Successor<StateDelayed>> kernel_delayed(const Instance& inst, const StateDelayed& s,
                                                    Action u) {
  check_slot(inst.frame, s.k);
  check_transmit(inst.frame, s.aoi, u);
  if (s.g != 0 && s.g != 1) throw DomainError("channel state g must be 0 or 1");
  const int k_next = inst.frame.next(s.k);
  const int aged = inst.bound.clamp(s.aoi + 1);
  const double good = inst.channel.good_after(s.g);
  std::vector<Successor<StateDelayed>> out;
  const int aoi_if_good = u == Action::Transmit ? s.k : aged;
  if (good > 0.0) out.push_back({{aoi_if_good, k_next, 1}, good});
  if (good < 1.0) out.push_back({{aged, k_next, 0}, 1.0 - good});
  return out;
}

StateNoSensing reference_state_no_sensing(const Instance& inst, const BeliefLattice& lattice) {
  return {inst.frame.length(), 1, lattice.after_success()};
}

StateDelayed reference_state_delayed(const Instance& inst) {
  return {inst.frame.length(), 1, 1};
}

StateNoSensing initial_state_no_sensing(const Instance& inst, const BeliefLattice& lattice) {
  const int K = inst.frame.length();
  return {K, 1, lattice.nearest(stationary_good_probability(inst.channel), K - 1)};
}

namespace {

template <class State, class Kernel>
std::vector<State> reachable(const FrameSpec& frame, std::initializer_list<State> roots,
                             Kernel&& kernel) {
  std::set<State> seen(roots.begin(), roots.end());
  std::deque<State> queue(roots.begin(), roots.end());
  while (!queue.empty()) {
    const State s = queue.front();
    queue.pop_front();
    for (Action u : {Action::Idle, Action::Transmit}) {
      if (u == Action::Transmit && !transmit_allowed(frame, s.aoi)) continue;
      for (const auto& next : kernel(s, u)) {
        if (seen.insert(next.state).second) queue.push_back(next.state);
      }
    }
  }
  return {seen.begin(), seen.end()};
}

template <class State>
std::optional<std::size_t> find_sorted(const std::vector<State>& states, const State& s) {
  auto it = std::lower_bound(states.begin(), states.end(), s);
  if (it == states.end() || !(*it == s)) return std::nullopt;
  return static_cast<std::size_t>(std::distance(states.begin(), it));
}

template <class State, class Kernel>
FiniteMdp index_model(const FrameSpec& frame, const std::vector<State>& states,
                      const State& reference, Kernel&& kernel) {
  auto locate = [&](const State& s) {
    auto idx = find_sorted(states, s);
    if (!idx) throw std::logic_error("kernel produced a state outside the enumerated space");
    return static_cast<std::uint32_t>(*idx);
  };
  FiniteMdp mdp(frame.length(), locate(reference));
  for (const State& s : states) {
    FiniteMdp::Row idle;
    FiniteMdp::Row send;
    for (const auto& next : kernel(s, Action::Idle)) idle.push(locate(next.state), next.probability);
    const bool allowed = transmit_allowed(frame, s.aoi);
    if (allowed) {
      for (const auto& next : kernel(s, Action::Transmit)) {
        send.push(locate(next.state), next.probability);
      }
    }
    mdp.add_state(s.aoi, s.k, allowed, idle, send);
  }
  return mdp;
}

}  // namespace

std::vector<StateNoSensing> enumerate_states_no_sensing(const Instance& inst,
                                                        const BeliefLattice& lattice) {
  if (lattice.cap() != inst.bound.cap()) throw DomainError("lattice cap differs from N");
  return reachable(inst.frame,
                   {reference_state_no_sensing(inst, lattice), initial_state_no_sensing(inst, lattice)},
                   [&](const StateNoSensing& s, Action u) {
                     return kernel_no_sensing(inst, lattice, s, u);
                   });
}

std::vector<StateDelayed> enumerate_states_delayed(const Instance& inst) {
  const int K = inst.frame.length();
  return reachable(inst.frame, {StateDelayed{K, 1, 1}, StateDelayed{K, 1, 0}},
                   [&](const StateDelayed& s, Action u) { return kernel_delayed(inst, s, u); });
}

// ---------------------------------------------------------------------------
// Finite models

void FiniteMdp::Row::push(std::uint32_t to, double p) {
  for (std::uint8_t i = 0; i < count; ++i) {
    if (out[i].to == to) {
      out[i].probability += p;
      return;
    }
  }
  if (count == out.size()) throw std::logic_error("row holds at most two successors");
  out[count++] = Transition{to, p};
}

std::size_t FiniteMdp::add_state(int aoi, int k, bool can_transmit, Row idle, Row transmit) {
  aoi_.push_back(aoi);
  k_.push_back(k);
  can_transmit_.push_back(can_transmit ? 1 : 0);
  idle_.push_back(idle);
  transmit_.push_back(can_transmit ? transmit : Row{});
  return aoi_.size() - 1;
}

NoSensingModel::NoSensingModel(const Instance& inst)
    : inst_(inst), lattice_(inst.channel, inst.bound.cap()) {
  states_ = enumerate_states_no_sensing(inst_, lattice_);
  mdp_ = index_model(inst_.frame, states_, reference_state_no_sensing(inst_, lattice_),
                     [&](const StateNoSensing& s, Action u) {
                       return kernel_no_sensing(inst_, lattice_, s, u);
                     });
}

std::optional<std::size_t> NoSensingModel::index_of(const StateNoSensing& s) const {
  return find_sorted(states_, s);
}

DelayedModel::DelayedModel(const Instance& inst) : inst_(inst) {
  states_ = enumerate_states_delayed(inst_);
  mdp_ = index_model(inst_.frame, states_, reference_state_delayed(inst_),
                     [&](const StateDelayed& s, Action u) { return kernel_delayed(inst_, s, u); });
}

std::optional<std::size_t> DelayedModel::index_of(const StateDelayed& s) const {
  return find_sorted(states_, s);
}

}  // namespace aoi
