#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>

namespace aoi {

/// Raised when a model parameter or an argument violates its domain.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Action : std::uint8_t { Idle = 0, Transmit = 1 };

/// Feedback at the end of a slot: Success only when a transmission met a
/// good channel. Suspension always yields None.
enum class Observation : std::uint8_t { None = 0, Success = 1 };

constexpr int as_int(Action u) { return static_cast<int>(u); }

/// Two-state Gilbert-Elliott channel with positive memory.
///
/// p11 = P(good -> good), p01 = P(bad -> good). Construction rejects
/// p01 > p11 and the fully absorbing chain p11 = 1, p01 = 0.
class ChannelModel {
 public:
  ChannelModel(double p11, double p01);

  double p11() const { return p11_; }
  double p01() const { return p01_; }
  double memory() const { return p11_ - p01_; }

  /// P(h_{t+1} = 1 | h_t = g).
  double good_after(int g) const { return g != 0 ? p11_ : p01_; }

 private:
  double p11_;
  double p01_;
};

/// T(w) = w p11 + (1 - w) p01.
double one_step_update(const ChannelModel& ch, double belief);

/// T^m(w). Stops early once the iterate is a fixed point.
double m_step_update(const ChannelModel& ch, double belief, std::uint64_t m);

/// Belief after one slot given the action and its feedback.
double observed_update(const ChannelModel& ch, double belief, Action u, Observation obs);

/// p01 / (1 - p11 + p01).
double stationary_good_probability(const ChannelModel& ch);

enum class BeliefOrigin : std::uint8_t { FromBad = 0, FromGood = 1 };

/// Symbolic belief T^steps(origin) where origin is p01 or p11.
///
/// Identity and ordering use (origin, steps) only; value is a cache.
struct Belief {
  BeliefOrigin origin = BeliefOrigin::FromGood;
  int steps = 0;
  double value = 0.0;

  static Belief make(const ChannelModel& ch, BeliefOrigin origin, int steps);
  /// Incremental T applied to the cached value.
  Belief advanced(const ChannelModel& ch) const;

  friend bool operator==(const Belief& a, const Belief& b) {
    return a.origin == b.origin && a.steps == b.steps;
  }
  friend std::strong_ordering operator<=>(const Belief& a, const Belief& b) {
    if (auto c = a.origin <=> b.origin; c != 0) return c;
    return a.steps <=> b.steps;
  }
};

}  // namespace aoi
