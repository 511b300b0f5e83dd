#include <doctest.h>

#include <cmath>
#include <random>

#include "aoi/channel.hpp"

using namespace aoi;

TEST_CASE("one-step update") {
  const ChannelModel ch(0.7, 0.3);
  CHECK(one_step_update(ch, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(one_step_update(ch, 1.0) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(one_step_update(ChannelModel(0.9, 0.2), 0.4) == doctest::Approx(0.48).epsilon(1e-15));
  CHECK_THROWS_AS(one_step_update(ch, -0.1), DomainError);
  CHECK_THROWS_AS(one_step_update(ch, 1.1), DomainError);
}

TEST_CASE("m-step update") {
  const ChannelModel ch(0.7, 0.3);
  CHECK(m_step_update(ch, 0.123, 0) == 0.123);
  CHECK(std::abs(m_step_update(ch, 1.0, 10'000) - 0.5) < 1e-12);
  CHECK(m_step_update(ChannelModel(0.4, 0.4), 0.9, 1) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(m_step_update(ch, 0.2, 3) ==
        doctest::Approx(one_step_update(ch, one_step_update(ch, one_step_update(ch, 0.2)))));
}

TEST_CASE("observation-conditioned update") {
  const ChannelModel ch(0.7, 0.3);
  CHECK(observed_update(ch, 0.12, Action::Transmit, Observation::Success) == 0.7);
  CHECK(observed_update(ch, 0.88, Action::Transmit, Observation::None) == 0.3);
  CHECK(observed_update(ch, 0.5, Action::Idle, Observation::None) == doctest::Approx(0.5));
  CHECK_THROWS_AS(observed_update(ch, 0.5, Action::Idle, Observation::Success), DomainError);
}

TEST_CASE("stationary good probability") {
  CHECK(stationary_good_probability(ChannelModel(0.7, 0.3)) == doctest::Approx(0.5));
  CHECK(stationary_good_probability(ChannelModel(0.9, 0.9)) == doctest::Approx(0.9));
  CHECK(stationary_good_probability(ChannelModel(0.8, 0.2)) == doctest::Approx(0.5));
  const ChannelModel ch(0.93, 0.11);
  const double pi = stationary_good_probability(ch);
  CHECK(std::abs(one_step_update(ch, pi) - pi) < 1e-15);
}

TEST_CASE("channel construction validates parameters") {
  CHECK_THROWS_AS(ChannelModel(1.0, 0.0), DomainError);
  CHECK_THROWS_AS(ChannelModel(0.3, 0.7), DomainError);
  CHECK_THROWS_AS(ChannelModel(1.2, 0.1), DomainError);
  CHECK_THROWS_AS(ChannelModel(0.5, -0.1), DomainError);
  CHECK_NOTHROW(ChannelModel(1.0, 1.0));
  CHECK_NOTHROW(ChannelModel(0.0, 0.0));
  CHECK(ChannelModel(0.9, 0.3).memory() == doctest::Approx(0.6));
}

TEST_CASE("update map is affine, monotone and contracts by the memory") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const double p01 = unit(rng);
    const double p11 = p01 + (1.0 - p01) * unit(rng);
    if (p11 == 1.0 && p01 == 0.0) continue;
    const ChannelModel ch(p11, p01);
    const double a = unit(rng);
    const double b = unit(rng);
    const double alpha = unit(rng);
    const double mixed = one_step_update(ch, alpha * a + (1 - alpha) * b);
    CHECK(std::abs(mixed - (alpha * one_step_update(ch, a) + (1 - alpha) * one_step_update(ch, b))) <
          1e-12);
    if (a <= b) CHECK(one_step_update(ch, a) <= one_step_update(ch, b));
    CHECK(std::abs(std::abs(one_step_update(ch, a) - one_step_update(ch, b)) -
                   ch.memory() * std::abs(a - b)) < 1e-12);
  }
}

TEST_CASE("symbolic beliefs agree with incremental updates") {
  const ChannelModel ch(0.83, 0.17);
  Belief good = Belief::make(ch, BeliefOrigin::FromGood, 0);
  Belief bad = Belief::make(ch, BeliefOrigin::FromBad, 0);
  CHECK(good.value == 0.83);
  CHECK(bad.value == 0.17);
  for (int m = 1; m <= 10'000; ++m) {
    const Belief g_next = good.advanced(ch);
    const Belief b_next = bad.advanced(ch);
    CHECK(g_next.value <= good.value);
    CHECK(b_next.value >= bad.value);
    good = g_next;
    bad = b_next;
    if (m % 997 == 0 || m == 10'000) {
      CHECK(std::abs(Belief::make(ch, BeliefOrigin::FromGood, m).value - good.value) < 1e-12);
      CHECK(std::abs(Belief::make(ch, BeliefOrigin::FromBad, m).value - bad.value) < 1e-12);
    }
  }
  CHECK(good.steps == 10'000);
  CHECK(Belief::make(ch, BeliefOrigin::FromGood, 3) == Belief{BeliefOrigin::FromGood, 3, -1.0});
  CHECK(Belief::make(ch, BeliefOrigin::FromBad, 9) < Belief::make(ch, BeliefOrigin::FromGood, 0));
  CHECK_THROWS_AS(Belief::make(ch, BeliefOrigin::FromBad, -1), DomainError);
}
