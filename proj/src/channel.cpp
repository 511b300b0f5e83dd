#include "aoi/channel.hpp"

#include <cmath>
#include <string>

namespace aoi {

namespace {

void require_probability(double w, const char* what) {
  if (!(w >= 0.0 && w <= 1.0)) {
    throw DomainError(std::string(what) + " must lie in [0,1], got " + std::to_string(w));
  }
}

}  // namespace

ChannelModel::ChannelModel(double p11, double p01) : p11_(p11), p01_(p01) {
  require_probability(p11, "p11");
  require_probability(p01, "p01");
  if (p01 > p11) {
    throw DomainError("channel must be positively correlated (p01 <= p11)");
  }
  if (p11 == 1.0 && p01 == 0.0) {
    throw DomainError("p11 = 1, p01 = 0 gives two absorbing states; chain is not unichain");
  }
}

double one_step_update(const ChannelModel& ch, double belief) {
  require_probability(belief, "belief");
  return belief * ch.p11() + (1.0 - belief) * ch.p01();
}

double m_step_update(const ChannelModel& ch, double belief, std::uint64_t m) {
  require_probability(belief, "belief");
  double w = belief;
  for (std::uint64_t i = 0; i < m; ++i) {
    const double next = w * ch.p11() + (1.0 - w) * ch.p01();
    if (next == w) break;
    w = next;
  }
  return w;
}

double observed_update(const ChannelModel& ch, double belief, Action u, Observation obs) {
  require_probability(belief, "belief");
  if (u == Action::Idle) {
    if (obs == Observation::Success) {
      throw DomainError("suspension cannot produce a success observation");
    }
    return one_step_update(ch, belief);
  }
  return obs == Observation::Success ? ch.p11() : ch.p01();
}

double stationary_good_probability(const ChannelModel& ch) {
  if (ch.memory() >= 1.0) {
    throw DomainError("degenerate chain: stationary law is not unique when memory = 1");
  }
  return ch.p01() / (1.0 - ch.p11() + ch.p01());
}

Belief Belief::make(const ChannelModel& ch, BeliefOrigin origin, int steps) {
  if (steps < 0) throw DomainError("belief steps must be non-negative");
  const double start = origin == BeliefOrigin::FromGood ? ch.p11() : ch.p01();
  return Belief{origin, steps, m_step_update(ch, start, static_cast<std::uint64_t>(steps))};
}

Belief Belief::advanced(const ChannelModel& ch) const {
  return Belief{origin, steps + 1, value * ch.p11() + (1.0 - value) * ch.p01()};
}

}  // namespace aoi
