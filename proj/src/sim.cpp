#include "aoi/sim.hpp"

#include <cmath>
#include <memory>
#include <string>
#include <vector>

namespace aoi {

namespace {

constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kChannelStream = 1;
constexpr std::uint64_t kPolicyStream = 2;
constexpr std::size_t kBatches = 20;

}  // namespace

std::uint64_t SplitMix64::mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

SplitMix64::SplitMix64(std::uint64_t seed, std::uint64_t stream_id)
    : key_(mix(seed ^ mix(stream_id * kGoldenGamma + 0x632be59bd9b4e019ULL))) {}

std::uint64_t SplitMix64::next() {
  ++counter_;
  return mix(key_ + counter_ * kGoldenGamma);
}

void SimConfig::validate() const {
  if (horizon < 1) throw DomainError("horizon must be >= 1");
  if (warmup >= horizon) throw DomainError("warmup must be shorter than the horizon");
}

SimResult simulate(Sensing sensing, const Instance& inst, const Scheduler& scheduler,
                   const SimConfig& cfg, const SlotObserver& observer) {
  cfg.validate();
  const FrameSpec& frame = inst.frame;
  const ChannelModel& ch = inst.channel;
  const int K = frame.length();

  std::unique_ptr<BeliefLattice> lattice;
  if (sensing == Sensing::None) lattice = std::make_unique<BeliefLattice>(ch, inst.bound.cap());

  SplitMix64 channel_rng(cfg.seed, kChannelStream);
  SplitMix64 policy_rng(cfg.seed, kPolicyStream);

  auto draw_next = [&](int from) { return channel_rng.uniform() < ch.good_after(from) ? 1 : 0; };
  int prev_h = channel_rng.uniform() < stationary_good_probability(ch) ? 1 : 0;
  int h = draw_next(prev_h);

  auto csi_belief = [&](int g) {
    return Belief{g != 0 ? BeliefOrigin::FromGood : BeliefOrigin::FromBad, 0, ch.good_after(g)};
  };

  int aoi = K;
  int k = 1;
  Belief belief = sensing == Sensing::None ? initial_state_no_sensing(inst, *lattice).belief
                                           : csi_belief(prev_h);
  std::uint64_t energy = 0;

  const std::uint64_t averaged = cfg.horizon - cfg.warmup;
  const std::size_t batches = static_cast<std::size_t>(std::min<std::uint64_t>(kBatches, averaged));
  std::vector<double> batch_aoi(batches, 0.0);
  std::vector<double> batch_energy(batches, 0.0);
  std::vector<double> batch_count(batches, 0.0);

  SimResult out;
  out.averaged_slots = averaged;
  double aoi_sum = 0.0;
  double energy_sum = 0.0;

  for (std::uint64_t t = 1; t <= cfg.horizon; ++t) {
    SlotView view;
    view.t = t;
    view.aoi = aoi;
    view.k = k;
    view.belief = belief;
    view.last_channel = sensing == Sensing::Delayed ? prev_h : -1;
    view.energy_spent = energy;
    view.policy_draw = policy_rng.uniform();

    const Action u = scheduler(view);
    if (u == Action::Transmit && !transmit_allowed(frame, aoi)) {
      throw DomainError("scheduler transmitted after this frame's update was delivered");
    }
    const bool delivered = u == Action::Transmit && h == 1;
    const Observation obs = delivered ? Observation::Success : Observation::None;
    const int next_aoi = aoi_step(frame, aoi, k, u, obs);

    if (t > cfg.warmup) {
      const std::uint64_t i = t - cfg.warmup - 1;
      const auto b = static_cast<std::size_t>(i * batches / averaged);
      batch_aoi[b] += aoi;
      batch_energy[b] += as_int(u);
      batch_count[b] += 1.0;
      aoi_sum += aoi;
      energy_sum += as_int(u);
      out.aoi_histogram[aoi] += 1.0;
      if (delivered) out.delivered_count += 1.0;
    }
    if (observer) observer(SlotRecord{t, aoi, k, u, h, delivered, next_aoi});

    if (u == Action::Transmit) ++energy;
    if (sensing == Sensing::None) {
      belief = u == Action::Idle ? lattice->after_idle(belief)
                                 : (delivered ? lattice->after_success() : lattice->after_failure());
    } else {
      belief = csi_belief(h);
    }
    prev_h = h;
    h = draw_next(h);
    aoi = next_aoi;
    k = frame.next(k);
  }

  const double n = static_cast<double>(averaged);
  out.avg_aoi = aoi_sum / n;
  out.avg_energy = energy_sum / n;
  if (batches > 1) {
    double var_aoi = 0.0;
    double var_energy = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      const double da = batch_aoi[b] / batch_count[b] - out.avg_aoi;
      const double de = batch_energy[b] / batch_count[b] - out.avg_energy;
      var_aoi += da * da;
      var_energy += de * de;
    }
    const double bb = static_cast<double>(batches);
    out.aoi_stderr = std::sqrt(var_aoi / (bb - 1.0) / bb);
    out.energy_stderr = std::sqrt(var_energy / (bb - 1.0) / bb);
  }
  return out;
}

Scheduler model_scheduler(const NoSensingModel& model, const Policy& policy) {
  if (policy.size() != model.states().size()) throw DomainError("policy size differs from model");
  return [&model, policy](const SlotView& v) {
    const StateNoSensing s{model.instance().bound.clamp(v.aoi), v.k, v.belief};
    const auto idx = model.index_of(s);
    if (!idx) {
      throw PolicyUndefinedState("no policy entry for (AoI=" + std::to_string(s.aoi) +
                                 ", k=" + std::to_string(s.k) +
                                 ", steps=" + std::to_string(s.belief.steps) + ")");
    }
    return policy[*idx];
  };
}

Scheduler model_scheduler(const DelayedModel& model, const Policy& policy) {
  if (policy.size() != model.states().size()) throw DomainError("policy size differs from model");
  return [&model, policy](const SlotView& v) {
    const StateDelayed s{model.instance().bound.clamp(v.aoi), v.k, v.last_channel};
    const auto idx = model.index_of(s);
    if (!idx) {
      throw PolicyUndefinedState("no policy entry for (AoI=" + std::to_string(s.aoi) +
                                 ", k=" + std::to_string(s.k) + ", g=" + std::to_string(s.g) + ")");
    }
    return policy[*idx];
  };
}

Scheduler greedy_scheduler(double e_max, int K) {
  if (!(e_max > 0.0 && e_max <= 1.0)) throw DomainError("E_max must lie in (0,1]");
  return [e_max, K](const SlotView& v) {
    const double running =
        v.t == 1 ? 0.0 : static_cast<double>(v.energy_spent) / static_cast<double>(v.t - 1);
    return (running < e_max && v.aoi >= K) ? Action::Transmit : Action::Idle;
  };
}

SimResult simulate(const NoSensingModel& model, const Policy& policy, const SimConfig& cfg) {
  return simulate(Sensing::None, model.instance(), model_scheduler(model, policy), cfg);
}

SimResult simulate(const DelayedModel& model, const Policy& policy, const SimConfig& cfg) {
  return simulate(Sensing::Delayed, model.instance(), model_scheduler(model, policy), cfg);
}

SimResult simulate_greedy(Sensing sensing, const Instance& inst, double e_max,
                          const SimConfig& cfg) {
  return simulate(sensing, inst, greedy_scheduler(e_max, inst.frame.length()), cfg);
}

namespace {

SimResult weighted(const SimResult& a, const SimResult& b, double q) {
  if (q >= 1.0) return a;
  if (q <= 0.0) return b;
  SimResult out;
  out.averaged_slots = a.averaged_slots;
  out.avg_aoi = q * a.avg_aoi + (1.0 - q) * b.avg_aoi;
  out.avg_energy = q * a.avg_energy + (1.0 - q) * b.avg_energy;
  out.aoi_stderr = std::hypot(q * a.aoi_stderr, (1.0 - q) * b.aoi_stderr);
  out.energy_stderr = std::hypot(q * a.energy_stderr, (1.0 - q) * b.energy_stderr);
  out.delivered_count = q * a.delivered_count + (1.0 - q) * b.delivered_count;
  for (const auto& [aoi, c] : a.aoi_histogram) out.aoi_histogram[aoi] += q * c;
  for (const auto& [aoi, c] : b.aoi_histogram) out.aoi_histogram[aoi] += (1.0 - q) * c;
  return out;
}

template <class Model>
SimResult mixture_impl(Sensing sensing, const Model& model, const MixturePolicy& mixture,
                       const SimConfig& cfg, MixtureMode mode) {
  if (!(mixture.q >= 0.0 && mixture.q <= 1.0)) throw DomainError("mixture weight outside [0,1]");
  if (mode == MixtureMode::InitialRandomization) {
    if (mixture.q >= 1.0) return simulate(model, mixture.minus, cfg);
    if (mixture.q <= 0.0) return simulate(model, mixture.plus, cfg);
    return weighted(simulate(model, mixture.minus, cfg), simulate(model, mixture.plus, cfg),
                    mixture.q);
  }
  Scheduler minus = model_scheduler(model, mixture.minus);
  Scheduler plus = model_scheduler(model, mixture.plus);
  const double q = mixture.q;
  return simulate(sensing, model.instance(),
                  [&](const SlotView& v) { return v.policy_draw < q ? minus(v) : plus(v); }, cfg);
}

}  // namespace

SimResult estimate_mixture(const NoSensingModel& model, const MixturePolicy& mixture,
                           const SimConfig& cfg, MixtureMode mode) {
  return mixture_impl(Sensing::None, model, mixture, cfg, mode);
}

SimResult estimate_mixture(const DelayedModel& model, const MixturePolicy& mixture,
                           const SimConfig& cfg, MixtureMode mode) {
  return mixture_impl(Sensing::Delayed, model, mixture, cfg, mode);
}

}  // namespace aoi
