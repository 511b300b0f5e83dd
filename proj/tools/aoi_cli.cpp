// Command-line front end: solve single instances, run the experiment sweeps
// and the structural property suite, and write CSV.

#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "aoi/experiments.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kParseError = 2,
  kNonConvergence = 3,
  kPropertyFailure = 4,
};

struct Flags {
  std::optional<std::string> cases;
  std::vector<int> frame_lengths;
  std::vector<double> p11;
  std::vector<double> p01;
  std::vector<double> e_max;
  std::optional<int> bound_n;
  std::optional<double> eps;
  std::optional<double> eps_lambda;
  std::optional<std::uint64_t> horizon;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> warmup;
  std::string out;
  unsigned workers = 1;
  bool per_slot_mixture = false;
  bool inject_fault = false;
  std::optional<std::size_t> instances;
};

std::vector<aoi::ChannelParams> pair_channels(const std::vector<double>& p11,
                                              const std::vector<double>& p01) {
  if (p11.size() != p01.size() && p11.size() != 1 && p01.size() != 1) {
    throw aoi::ConfigError("--p11 and --p01 need equal lengths (or one of them a single value)");
  }
  const std::size_t n = std::max(p11.size(), p01.size());
  std::vector<aoi::ChannelParams> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({p11[p11.size() == 1 ? 0 : i], p01[p01.size() == 1 ? 0 : i]});
  }
  return out;
}

aoi::ExperimentSpec build_spec(aoi::Command command, const Flags& f) {
  aoi::ExperimentSpec spec = aoi::ExperimentSpec::defaults_for(command);
  if (f.cases) spec.cases = aoi::parse_case(*f.cases);
  if (!f.frame_lengths.empty()) spec.frame_lengths = f.frame_lengths;
  if (!f.p11.empty() || !f.p01.empty()) {
    std::vector<double> p11 = f.p11;
    std::vector<double> p01 = f.p01;
    if (p11.empty()) {
      for (const auto& ch : spec.channels) p11.push_back(ch.p11);
      if (p01.size() == 1) p11.resize(1);
    }
    if (p01.empty()) {
      for (const auto& ch : spec.channels) p01.push_back(ch.p01);
      if (p11.size() == 1) p01.resize(1);
    }
    spec.channels = pair_channels(p11, p01);
  }
  if (!f.e_max.empty()) spec.e_max = f.e_max;
  if (f.bound_n) spec.bound_n = *f.bound_n;
  if (f.eps) spec.eps = *f.eps;
  if (f.eps_lambda) spec.eps_lambda = *f.eps_lambda;
  if (f.horizon) spec.sim.horizon = *f.horizon;
  if (f.warmup) spec.sim.warmup = *f.warmup;
  if (f.seed) spec.sim.seed = *f.seed;
  spec.workers = f.workers;
  if (f.per_slot_mixture) spec.mixture_mode = aoi::MixtureMode::PerSlot;
  spec.inject_fault = f.inject_fault;
  if (f.instances) spec.property_instances = *f.instances;
  spec.validate();
  return spec;
}

void emit(const aoi::CsvTable& table, const std::string& out) {
  if (out.empty() || out == "-") {
    table.write(std::cout);
  } else {
    table.save(out);
    std::cerr << "wrote " << table.rows.size() << " rows to " << out << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age-of-information scheduling over a Gilbert-Elliott channel"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file; command-line flags take precedence");

  Flags f;
  app.add_option("--case", f.cases, "no_sensing, delayed_sensing or both");
  app.add_option("--frame-K", f.frame_lengths, "frame length(s) K")->delimiter(',');
  app.add_option("--p11", f.p11, "P(good -> good), comma-separated list")->delimiter(',');
  app.add_option("--p01", f.p01, "P(bad -> good), paired with --p11")->delimiter(',');
  app.add_option("--emax", f.e_max, "average energy budget(s) in (0,1]")->delimiter(',');
  app.add_option("--bound-N", f.bound_n, "truncation bound N on AoI and unobserved steps");
  app.add_option("--eps", f.eps, "RVI span tolerance");
  app.add_option("--eps-lambda", f.eps_lambda, "bisection tolerance on lambda");
  app.add_option("--horizon", f.horizon, "simulated slots per run");
  app.add_option("--seed", f.seed, "simulation seed");
  app.add_option("--warmup", f.warmup, "slots discarded before averaging");
  app.add_option("--out", f.out, "output CSV path (stdout when empty)");
  app.add_option("--workers", f.workers, "parallel sweep workers")->check(CLI::PositiveNumber);
  app.add_flag("--per-slot-mixture", f.per_slot_mixture,
               "simulate mixtures by re-drawing the component every slot");
  app.add_flag("--inject-fault", f.inject_fault,
               "properties: break the threshold solvers' tie rule to exercise the checks");
  app.add_option("--instances", f.instances, "properties: number of random instances");

  auto* tradeoff = app.add_subcommand("tradeoff", "AoI versus energy budget sweep");
  auto* framelength = app.add_subcommand("framelength", "AoI versus frame length sweep");
  auto* greedy = app.add_subcommand("greedy-compare", "optimal mixture versus greedy baseline");
  auto* properties = app.add_subcommand("properties", "structural property suite");
  auto* solve = app.add_subcommand("solve", "dump thresholds of one solved instance");
  for (auto* sub : {tradeoff, framelength, greedy, properties, solve}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kParseError;
  }

  try {
    if (*tradeoff) {
      emit(aoi::run_tradeoff_sweep(build_spec(aoi::Command::Tradeoff, f)), f.out);
    } else if (*framelength) {
      emit(aoi::run_framelength_sweep(build_spec(aoi::Command::FrameLength, f)), f.out);
    } else if (*greedy) {
      const auto result = aoi::run_greedy_comparison(build_spec(aoi::Command::GreedyCompare, f));
      emit(result.table, f.out);
      std::cerr << "spearman(E_max, gap): no_sensing=" << result.gap_trend_no_sensing
                << " delayed_sensing=" << result.gap_trend_delayed << "\n";
    } else if (*properties) {
      const auto report = aoi::run_property_suite(build_spec(aoi::Command::Properties, f));
      emit(report.table, f.out);
      std::cerr << (report.all_passed ? "all properties passed" : "property failures detected")
                << "\n";
      if (!report.all_passed) return kPropertyFailure;
    } else if (*solve) {
      emit(aoi::run_single_solve(build_spec(aoi::Command::Solve, f)), f.out);
    }
  } catch (const aoi::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParseError;
  } catch (const aoi::NonConvergence& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNonConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}
