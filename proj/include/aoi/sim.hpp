#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string_view>

#include "aoi/mdp.hpp"
#include "aoi/solver.hpp"

namespace aoi {

/// Counter-based SplitMix64 stream. Output n of stream (seed, id) is the
/// SplitMix64 finalizer applied to key + n * golden_gamma, where the key is
/// derived from (seed, id); distinct ids give independent streams.
class SplitMix64 {
 public:
  static constexpr std::string_view kName = "splitmix64";

  SplitMix64(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next();
  /// Uniform double in [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  static std::uint64_t mix(std::uint64_t z);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

enum class Sensing { None, Delayed };

struct SimConfig {
  std::uint64_t horizon = 100'000;
  std::uint64_t warmup = 1'000;
  std::uint64_t seed = 1;

  void validate() const;
};

/// What a scheduler sees at the start of slot t.
struct SlotView {
  std::uint64_t t = 1;
  int aoi = 1;      ///< true AoI (not capped)
  int k = 1;
  Belief belief;    ///< case (i): tracked belief; case (ii): p_{g1} as a belief
  int last_channel = -1;  ///< case (ii): channel state of slot t - 1; -1 when hidden
  std::uint64_t energy_spent = 0;  ///< transmissions before slot t
  double policy_draw = 0.0;        ///< fresh uniform from the policy stream
};

using Scheduler = std::function<Action(const SlotView&)>;

struct SlotRecord {
  std::uint64_t t;
  int aoi;
  int k;
  Action action;
  int channel;  ///< true channel state in slot t
  bool delivered;
  int next_aoi;
};

using SlotObserver = std::function<void(const SlotRecord&)>;

struct SimResult {
  double avg_aoi = 0.0;
  double avg_energy = 0.0;
  /// Batch-means standard errors of the two averages.
  double aoi_stderr = 0.0;
  double energy_stderr = 0.0;
  /// AoI -> number of averaged slots (weighted for mixture estimates).
  std::map<int, double> aoi_histogram;
  double delivered_count = 0.0;
  std::uint64_t averaged_slots = 0;
};

/// Scheduler asked for a state that the enumerated model does not contain.
class PolicyUndefinedState : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs one sample path. Slot operations: act on (AoI, k, belief or g),
/// deliver iff transmitting over a good channel, update AoI and belief, then
/// let the channel make its Markov transition.
SimResult simulate(Sensing sensing, const Instance& inst, const Scheduler& scheduler,
                   const SimConfig& cfg, const SlotObserver& observer = {});

/// Deterministic model policy looked up at (min(AoI, N), k, belief).
Scheduler model_scheduler(const NoSensingModel& model, const Policy& policy);
/// Deterministic model policy looked up at (min(AoI, N), k, g).
Scheduler model_scheduler(const DelayedModel& model, const Policy& policy);

/// Transmits iff the running energy average before slot t is below E_max
/// and AoI >= K. The average is taken as 0 at t = 1.
Scheduler greedy_scheduler(double e_max, int K);

SimResult simulate(const NoSensingModel& model, const Policy& policy, const SimConfig& cfg);
SimResult simulate(const DelayedModel& model, const Policy& policy, const SimConfig& cfg);

SimResult simulate_greedy(Sensing sensing, const Instance& inst, double e_max,
                          const SimConfig& cfg);

enum class MixtureMode {
  /// Pick one component for the whole run (probability q for `minus`);
  /// the estimate is the q-weighted combination of both component runs.
  InitialRandomization,
  /// Re-draw the component every slot from the policy stream.
  PerSlot,
};

SimResult estimate_mixture(const NoSensingModel& model, const MixturePolicy& mixture,
                           const SimConfig& cfg,
                           MixtureMode mode = MixtureMode::InitialRandomization);
SimResult estimate_mixture(const DelayedModel& model, const MixturePolicy& mixture,
                           const SimConfig& cfg,
                           MixtureMode mode = MixtureMode::InitialRandomization);

}  // namespace aoi
