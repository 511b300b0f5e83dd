#include <doctest.h>

#include <cmath>
#include <set>

#include "aoi/sim.hpp"

using namespace aoi;

namespace {

SimConfig config(std::uint64_t horizon, std::uint64_t warmup, std::uint64_t seed = 11) {
  SimConfig c;
  c.horizon = horizon;
  c.warmup = warmup;
  c.seed = seed;
  return c;
}

bool same(const SimResult& a, const SimResult& b) {
  return a.avg_aoi == b.avg_aoi && a.avg_energy == b.avg_energy && a.aoi_stderr == b.aoi_stderr &&
         a.energy_stderr == b.energy_stderr && a.aoi_histogram == b.aoi_histogram &&
         a.delivered_count == b.delivered_count && a.averaged_slots == b.averaged_slots;
}

}  // namespace

TEST_CASE("SplitMix64 streams") {
  SplitMix64 a(5, 1);
  SplitMix64 b(5, 1);
  SplitMix64 c(5, 2);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t x = a.next();
    CHECK(x == b.next());
    seen.insert(x);
    seen.insert(c.next());
  }
  CHECK(seen.size() == 2000);
  SplitMix64 u(9, 1);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double x = u.uniform();
    REQUIRE(x >= 0.0);
    REQUIRE(x < 1.0);
    sum += x;
  }
  CHECK(std::abs(sum / 100000 - 0.5) < 0.005);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(config(0, 0).validate(), DomainError);
  CHECK_THROWS_AS(config(10, 10).validate(), DomainError);
  CHECK_NOTHROW(config(10, 9).validate());
}

TEST_CASE("equal seeds reproduce bit-for-bit") {
  const Instance inst(3, 0.7, 0.3, 200);
  const NoSensingModel ns(inst);
  const SolveReport r = rvi_threshold_no_sensing(ns, 1.0);
  const auto cfg = config(20000, 100, 42);
  CHECK(same(simulate(ns, r.policy, cfg), simulate(ns, r.policy, cfg)));
  CHECK_FALSE(same(simulate(ns, r.policy, cfg), simulate(ns, r.policy, config(20000, 100, 43))));
}

TEST_CASE("never transmitting spends nothing") {
  const Instance inst(3, 0.7, 0.3, 50);
  const Scheduler idle = [](const SlotView&) { return Action::Idle; };
  const SimResult r = simulate(Sensing::None, inst, idle, config(10000, 0));
  CHECK(r.avg_energy == 0.0);
  CHECK(r.delivered_count == 0.0);
  CHECK(r.avg_aoi == doctest::Approx(3.0 + 9999.0 / 2.0));
  double mass = 0.0;
  for (const auto& [aoi, n] : r.aoi_histogram) mass += n;
  CHECK(mass == 10000.0);
}

TEST_CASE("perfect channel sawtooth") {
  const Instance inst(4, 1.0, 1.0, 20);
  const Scheduler first_slot = [](const SlotView& v) {
    return v.k == 1 && v.aoi >= 4 ? Action::Transmit : Action::Idle;
  };
  for (Sensing s : {Sensing::None, Sensing::Delayed}) {
    const SimResult r = simulate(s, inst, first_slot, config(40000, 0));
    CHECK(r.avg_aoi == doctest::Approx(2.5));
    CHECK(r.avg_energy == doctest::Approx(0.25));
    CHECK(r.aoi_histogram.size() == 4);
  }
}

TEST_CASE("transmitting a delivered frame is rejected") {
  const Instance inst(3, 1.0, 1.0, 20);
  const Scheduler eager = [](const SlotView&) { return Action::Transmit; };
  CHECK_THROWS_AS(simulate(Sensing::None, inst, eager, config(100, 0)), DomainError);
}

TEST_CASE("policy lookups outside the model are reported") {
  const Instance inst(3, 0.7, 0.3, 20);
  const NoSensingModel ns(inst);
  const Instance other(4, 0.7, 0.3, 20);
  const Scheduler mismatched = model_scheduler(ns, Policy(ns.mdp().size(), Action::Idle));
  CHECK_THROWS_AS(simulate(Sensing::None, other, mismatched, config(1000, 0)), PolicyUndefinedState);
}

TEST_CASE("channel transitions match the chain") {
  const Instance inst(2, 0.8, 0.25, 20);
  std::uint64_t from_good = 0, good_good = 0, from_bad = 0, bad_good = 0;
  int prev = -1;
  const SlotObserver count = [&](const SlotRecord& rec) {
    if (prev == 1) {
      ++from_good;
      good_good += rec.channel == 1;
    } else if (prev == 0) {
      ++from_bad;
      bad_good += rec.channel == 1;
    }
    prev = rec.channel;
  };
  simulate(Sensing::Delayed, inst, greedy_scheduler(0.5, 2), config(100000, 0), count);
  const auto within = [](std::uint64_t hits, std::uint64_t n, double p) {
    const double sd = std::sqrt(p * (1 - p) / static_cast<double>(n));
    return std::abs(static_cast<double>(hits) / static_cast<double>(n) - p) <= 3 * sd;
  };
  CHECK(within(good_good, from_good, 0.8));
  CHECK(within(bad_good, from_bad, 0.25));
}

TEST_CASE("AoI sample paths follow the recursion") {
  const Instance inst(3, 0.7, 0.3, 200);
  const NoSensingModel ns(inst);
  const SolveReport r = rvi_threshold_no_sensing(ns, 2.0);
  std::size_t bad = 0;
  int expected = 3;
  const SlotObserver check = [&](const SlotRecord& rec) {
    if (rec.aoi != expected) ++bad;
    if (rec.delivered != (rec.action == Action::Transmit && rec.channel == 1)) ++bad;
    if (rec.delivered ? rec.next_aoi != rec.k : rec.next_aoi != rec.aoi + 1) ++bad;
    if (rec.action == Action::Transmit && rec.aoi < 3) ++bad;
    expected = rec.next_aoi;
  };
  simulate(Sensing::None, inst, model_scheduler(ns, r.policy), config(50000, 0), check);
  CHECK(bad == 0);
}

TEST_CASE("greedy baseline") {
  const Instance inst(3, 0.7, 0.3, 50);
  for (double e_max : {0.1, 0.3, 0.6}) {
    const SimResult r = simulate_greedy(Sensing::None, inst, e_max, config(20000, 0));
    CHECK(r.avg_energy <= e_max + 1.0 / 20000);
  }
  std::size_t missed = 0;
  std::uint64_t sent = 0;
  const SlotObserver all = [&](const SlotRecord& rec) {
    const bool saturated = rec.t > 1 && sent == rec.t - 1;
    if (rec.aoi >= 3 && !saturated && rec.action != Action::Transmit) ++missed;
    sent += rec.action == Action::Transmit;
  };
  simulate(Sensing::None, inst, greedy_scheduler(1.0, 3), config(5000, 0), all);
  CHECK(missed == 0);
  // Greedy ignores beliefs, so both information structures give the same run.
  CHECK(same(simulate_greedy(Sensing::None, inst, 0.3, config(5000, 0)),
             simulate_greedy(Sensing::Delayed, inst, 0.3, config(5000, 0))));
}

TEST_CASE("Monte Carlo agrees with the stationary evaluation") {
  const Instance inst(3, 0.7, 0.3, 200);
  const DelayedModel dl(inst);
  const SolveReport r = rvi_threshold_delayed(dl, 0.0);
  const PolicyAverages exact = evaluate_policy(dl.mdp(), r.policy);
  const SimResult mc = simulate(dl, r.policy, config(100000, 1000));
  CHECK(std::abs(mc.avg_energy - exact.avg_energy) <= 4 * mc.energy_stderr + 1e-3);
  CHECK(std::abs(mc.avg_aoi - exact.avg_aoi) <= 4 * mc.aoi_stderr + 1e-3);
}

TEST_CASE("degenerate mixtures reduce to one component") {
  const Instance inst(3, 0.7, 0.3, 100);
  const NoSensingModel ns(inst);
  MixturePolicy mix;
  mix.minus = rvi_threshold_no_sensing(ns, 0.5).policy;
  mix.plus = rvi_threshold_no_sensing(ns, 6.0).policy;
  const auto cfg = config(20000, 200);
  mix.q = 1.0;
  const SimResult only_minus = simulate(ns, mix.minus, cfg);
  CHECK(same(estimate_mixture(ns, mix, cfg), only_minus));
  CHECK(same(estimate_mixture(ns, mix, cfg, MixtureMode::PerSlot), only_minus));
  mix.q = 0.0;
  const SimResult only_plus = simulate(ns, mix.plus, cfg);
  CHECK(same(estimate_mixture(ns, mix, cfg), only_plus));
  CHECK(same(estimate_mixture(ns, mix, cfg, MixtureMode::PerSlot), only_plus));
}

TEST_CASE("mixture estimate meets the budget") {
  const Instance inst(3, 0.7, 0.3, 200);
  for (double e_max : {0.2, 0.3}) {
    const NoSensingModel ns(inst);
    const MixturePolicy mix = bisect_lambda(ns, e_max);
    const SimResult r = estimate_mixture(ns, mix, config(100000, 1000));
    CHECK(std::abs(r.avg_energy - e_max) <= 2 * r.energy_stderr + 1e-3);
    CHECK(r.avg_energy <= e_max + 0.01);
    const SimResult p = estimate_mixture(ns, mix, config(100000, 1000), MixtureMode::PerSlot);
    CHECK(p.avg_energy <= e_max + 0.01);
  }
}
