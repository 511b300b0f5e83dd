#include "aoi/experiments.hpp"
#include "aoi/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>
#include <optional>
#include <ostream>
#include <thread>

namespace aoi {

std::string_view case_name(Sensing sensing) {
  return sensing == Sensing::None ? "no_sensing" : "delayed_sensing";
}

CaseSelect parse_case(std::string_view text) {
  if (text == "no_sensing" || text == "i") return CaseSelect::NoSensing;
  if (text == "delayed_sensing" || text == "ii") return CaseSelect::Delayed;
  if (text == "both") return CaseSelect::Both;
  throw ConfigError("unknown case '" + std::string(text) +
                    "' (expected no_sensing, delayed_sensing or both)");
}

ExperimentSpec ExperimentSpec::defaults_for(Command command) {
  ExperimentSpec spec;
  switch (command) {
    case Command::Tradeoff:
      spec.channels = {{0.7, 0.3}, {0.9, 0.3}, {0.9, 0.5}};
      spec.e_max = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
      break;
    case Command::FrameLength:
      spec.channels = {{0.7, 0.3}, {0.9, 0.3}, {0.9, 0.5}};
      spec.frame_lengths = {2, 3, 4, 5, 6, 7, 8};
      spec.e_max = {0.3};
      break;
    case Command::GreedyCompare:
      spec.e_max = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
      break;
    case Command::Properties:
    case Command::Solve:
      break;
  }
  return spec;
}

void ExperimentSpec::validate() const {
  if (frame_lengths.empty()) throw ConfigError("at least one frame length K is required");
  if (channels.empty()) throw ConfigError("at least one (p11, p01) pair is required");
  if (e_max.empty()) throw ConfigError("at least one E_max is required");
  for (int K : frame_lengths) {
    if (K < 1) throw ConfigError("frame length K must be >= 1");
    if (bound_n <= K) {
      throw ConfigError("truncation bound N=" + std::to_string(bound_n) +
                        " must exceed every K (got K=" + std::to_string(K) + ")");
    }
  }
  for (const ChannelParams& ch : channels) {
    try {
      ChannelModel model(ch.p11, ch.p01);
      (void)model;
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }
  for (double e : e_max) {
    if (!(e > 0.0 && e <= 1.0)) throw ConfigError("E_max must lie in (0,1], got " + format_number(e));
  }
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  if (!(eps_lambda > 0.0)) throw ConfigError("eps-lambda must be positive");
  try {
    sim.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (property_instances < 1) throw ConfigError("property suite needs at least one instance");
}

std::vector<Sensing> ExperimentSpec::sensing_cases() const {
  switch (cases) {
    case CaseSelect::NoSensing:
      return {Sensing::None};
    case CaseSelect::Delayed:
      return {Sensing::Delayed};
    case CaseSelect::Both:
      break;
  }
  return {Sensing::None, Sensing::Delayed};
}

// ---------------------------------------------------------------------------
// CSV

std::string format_number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return {buf, end};
}

void CsvTable::write(std::ostream& os) const {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) os << ',';
      os << cells[i];
    }
    os << '\n';
  };
  line(header);
  for (const auto& row : rows) line(row);
}

void CsvTable::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write(out);
  if (!out) throw std::runtime_error("write to " + path + " failed");
}

std::size_t CsvTable::column(std::string_view name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw std::out_of_range("no CSV column named " + std::string(name));
  return static_cast<std::size_t>(it - header.begin());
}

const std::string& CsvTable::cell(std::size_t row, std::string_view name) const {
  return rows.at(row).at(column(name));
}

double CsvTable::number(std::size_t row, std::string_view name) const {
  const std::string& text = cell(row, name);
  if (text == "inf") return std::numeric_limits<double>::infinity();
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw std::invalid_argument("CSV cell '" + text + "' is not a number");
  }
  return x;
}

std::vector<std::string> provenance_header() {
  return {"case", "K",     "p11",     "p01",    "E_max", "N",
          "eps",  "eps_lambda", "horizon", "warmup", "seed",  "generator"};
}

namespace {

std::vector<std::string> provenance(const ExperimentSpec& spec, std::string_view sensing, int K,
                                    ChannelParams ch, double e_max) {
  return {std::string(sensing),
          std::to_string(K),
          format_number(ch.p11),
          format_number(ch.p01),
          format_number(e_max),
          std::to_string(spec.bound_n),
          format_number(spec.eps),
          format_number(spec.eps_lambda),
          std::to_string(spec.sim.horizon),
          std::to_string(spec.sim.warmup),
          std::to_string(spec.sim.seed),
          std::string(SplitMix64::kName)};
}


/// Re-raises a failure with the parameters of the row that produced it.
template <class Fn>
auto with_context(const std::string& label, Fn&& fn) {
  try {
    return fn();
  } catch (const NonConvergence& e) {
    throw NonConvergence(label + ": " + e.what(), e.last_residual());
  } catch (const PolicyUndefinedState& e) {
    throw PolicyUndefinedState(label + ": " + e.what());
  } catch (const DomainError& e) {
    throw DomainError(label + ": " + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(label + ": " + e.what());
  }
}

std::string point_label(Sensing sensing, int K, ChannelParams ch, double e_max) {
  return std::string(case_name(sensing)) + " K=" + std::to_string(K) + " p11=" +
         format_number(ch.p11) + " p01=" + format_number(ch.p01) + " E_max=" + format_number(e_max);
}

BisectionOptions bisection_options(const ExperimentSpec& spec) {
  BisectionOptions opts;
  opts.solve.tolerance = spec.eps;
  opts.lambda_tolerance = spec.eps_lambda;
  return opts;
}

struct SolvedPoint {
  MixturePolicy mixture;
  SimResult sim;
};

SolvedPoint solve_point(const ExperimentSpec& spec, Sensing sensing, int K, ChannelParams ch,
                        double e_max) {
  const Instance inst(K, ch.p11, ch.p01, spec.bound_n);
  const BisectionOptions opts = bisection_options(spec);
  SolvedPoint out;
  if (sensing == Sensing::None) {
    const NoSensingModel model(inst);
    out.mixture = bisect_lambda(model, e_max, opts);
    out.sim = estimate_mixture(model, out.mixture, spec.sim, spec.mixture_mode);
  } else {
    const DelayedModel model(inst);
    out.mixture = bisect_lambda(model, e_max, opts);
    out.sim = estimate_mixture(model, out.mixture, spec.sim, spec.mixture_mode);
  }
  return out;
}

std::vector<std::string> sweep_header() {
  auto h = provenance_header();
  for (const char* c : {"kind", "lambda_minus", "lambda_plus", "q", "aoi_analytic",
                        "energy_analytic", "aoi_mc", "aoi_mc_stderr", "energy_mc",
                        "energy_mc_stderr", "solves"}) {
    h.emplace_back(c);
  }
  return h;
}

struct SweepPoint {
  Sensing sensing;
  int K;
  ChannelParams ch;
  double e_max;
  bool unconstrained;
};

std::vector<std::string> sweep_row(const ExperimentSpec& spec, const SweepPoint& p) {
  return with_context(point_label(p.sensing, p.K, p.ch, p.e_max), [&] {
    // E_max = 1 never binds, so bisection returns the lambda = 0 policy.
    const SolvedPoint s = solve_point(spec, p.sensing, p.K, p.ch, p.unconstrained ? 1.0 : p.e_max);
    auto row = provenance(spec, case_name(p.sensing), p.K, p.ch, p.e_max);
    const MixturePolicy& m = s.mixture;
    for (std::string cell :
         {std::string(p.unconstrained ? "unconstrained" : "mixture"), format_number(m.lambda_minus),
          format_number(m.lambda_plus), format_number(m.q), format_number(m.avg_aoi()),
          format_number(m.avg_energy()), format_number(s.sim.avg_aoi),
          format_number(s.sim.aoi_stderr), format_number(s.sim.avg_energy),
          format_number(s.sim.energy_stderr), std::to_string(m.solves)}) {
      row.push_back(std::move(cell));
    }
    return row;
  });
}

CsvTable run_points(const ExperimentSpec& spec, const std::vector<SweepPoint>& points) {
  CsvTable table;
  table.header = sweep_header();
  table.rows = parallel_map(points.size(), spec.workers,
                            [&](std::size_t i) { return sweep_row(spec, points[i]); });
  return table;
}

}  // namespace

CsvTable run_tradeoff_sweep(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<SweepPoint> points;
  for (Sensing sensing : spec.sensing_cases()) {
    for (const ChannelParams& ch : spec.channels) {
      for (int K : spec.frame_lengths) {
        points.push_back({sensing, K, ch, 1.0, true});
        for (double e : spec.e_max) points.push_back({sensing, K, ch, e, false});
      }
    }
  }
  return run_points(spec, points);
}

CsvTable run_framelength_sweep(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<SweepPoint> points;
  for (Sensing sensing : spec.sensing_cases()) {
    for (const ChannelParams& ch : spec.channels) {
      for (double e : spec.e_max) {
        for (int K : spec.frame_lengths) points.push_back({sensing, K, ch, e, false});
      }
    }
  }
  return run_points(spec, points);
}

// ---------------------------------------------------------------------------
// Greedy comparison

double spearman_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman: length mismatch");
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  auto ranks = [n](const std::vector<double>& v) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n;) {
      std::size_t j = i;
      while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t t = i; t <= j; ++t) r[idx[t]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

GreedyComparison run_greedy_comparison(const ExperimentSpec& spec) {
  spec.validate();
  struct Point {
    int K;
    ChannelParams ch;
    double e_max;
  };
  std::vector<Point> points;
  for (const ChannelParams& ch : spec.channels) {
    for (int K : spec.frame_lengths) {
      for (double e : spec.e_max) points.push_back({K, ch, e});
    }
  }

  struct Row {
    std::vector<std::string> cells;
    double gap_none;
    double gap_delayed;
  };
  auto rows = parallel_map(points.size(), spec.workers, [&](std::size_t i) {
    const Point& p = points[i];
    const std::string label = "greedy-compare K=" + std::to_string(p.K) + " p11=" +
                              format_number(p.ch.p11) + " p01=" + format_number(p.ch.p01) +
                              " E_max=" + format_number(p.e_max);
    return with_context(label, [&] {
      const SolvedPoint none = solve_point(spec, Sensing::None, p.K, p.ch, p.e_max);
      const SolvedPoint delayed = solve_point(spec, Sensing::Delayed, p.K, p.ch, p.e_max);
      const Instance inst(p.K, p.ch.p11, p.ch.p01, spec.bound_n);
      // The greedy rule never looks at beliefs or g, so one run serves both cases.
      const SimResult greedy = simulate_greedy(Sensing::None, inst, p.e_max, spec.sim);
      Row row;
      row.gap_none = greedy.avg_aoi - none.sim.avg_aoi;
      row.gap_delayed = greedy.avg_aoi - delayed.sim.avg_aoi;
      row.cells = provenance(spec, "both", p.K, p.ch, p.e_max);
      for (double v : {none.mixture.avg_aoi(), none.sim.avg_aoi, none.sim.aoi_stderr,
                       none.sim.avg_energy, delayed.mixture.avg_aoi(), delayed.sim.avg_aoi,
                       delayed.sim.aoi_stderr, delayed.sim.avg_energy, greedy.avg_aoi,
                       greedy.aoi_stderr, greedy.avg_energy, row.gap_none, row.gap_delayed}) {
        row.cells.push_back(format_number(v));
      }
      return row;
    });
  });

  GreedyComparison out;
  out.table.header = provenance_header();
  for (const char* c :
       {"optimal_aoi_no_sensing_analytic", "optimal_aoi_no_sensing", "optimal_aoi_no_sensing_stderr",
        "optimal_energy_no_sensing", "optimal_aoi_delayed_analytic", "optimal_aoi_delayed",
        "optimal_aoi_delayed_stderr", "optimal_energy_delayed", "greedy_aoi", "greedy_aoi_stderr",
        "greedy_energy", "gap_no_sensing", "gap_delayed"}) {
    out.table.header.emplace_back(c);
  }
  std::vector<double> e;
  std::vector<double> gap_none;
  std::vector<double> gap_delayed;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.table.rows.push_back(std::move(rows[i].cells));
    if (i < spec.e_max.size()) {
      e.push_back(points[i].e_max);
      gap_none.push_back(rows[i].gap_none);
      gap_delayed.push_back(rows[i].gap_delayed);
    }
  }
  out.gap_trend_no_sensing = spearman_correlation(e, gap_none);
  out.gap_trend_delayed = spearman_correlation(e, gap_delayed);
  return out;
}

// ---------------------------------------------------------------------------
// Studies shared by the property suite and the tests

TruncationStudy truncation_study(Sensing sensing, int K, ChannelParams ch, double lambda,
                                 const std::vector<int>& bounds, const SolveOptions& opts,
                                 double final_tol, double noise_floor) {
  TruncationStudy out;
  out.bounds = bounds;
  for (int N : bounds) {
    const Instance inst(K, ch.p11, ch.p01, N);
    const double gain = sensing == Sensing::None
                            ? rvi_plain(NoSensingModel(inst).mdp(), lambda, opts).gain
                            : rvi_plain(DelayedModel(inst).mdp(), lambda, opts).gain;
    out.gains.push_back(gain);
  }
  for (std::size_t i = 1; i < out.gains.size(); ++i) {
    out.differences.push_back(std::abs(out.gains[i] - out.gains[i - 1]));
  }
  for (std::size_t i = 1; i < out.differences.size(); ++i) {
    ++out.outcome.checked;
    const double d = out.differences[i];
    if (d > out.differences[i - 1] && d > noise_floor) {
      out.outcome.flag("difference grows between N=" + std::to_string(bounds[i]) + " and N=" +
                       std::to_string(bounds[i + 1]) + ": " + format_number(d));
    }
  }
  if (!out.differences.empty()) {
    ++out.outcome.checked;
    if (!(out.differences.back() < final_tol)) {
      out.outcome.flag("final difference " + format_number(out.differences.back()) +
                       " not below " + format_number(final_tol));
    }
  }
  return out;
}

DualityStudy duality_study(Sensing sensing, const Instance& inst, double e_max,
                           const std::vector<double>& lambdas, const BisectionOptions& opts) {
  DualityStudy out;
  if (sensing == Sensing::None) {
    const NoSensingModel model(inst);
    out.curve = dual_value_sweep(model, e_max, lambdas, opts.solve);
    out.primal_aoi = bisect_lambda(model, e_max, opts).avg_aoi();
  } else {
    const DelayedModel model(inst);
    out.curve = dual_value_sweep(model, e_max, lambdas, opts.solve);
    out.primal_aoi = bisect_lambda(model, e_max, opts).avg_aoi();
  }
  out.best_dual = -std::numeric_limits<double>::infinity();
  for (const DualPoint& p : out.curve) {
    if (p.dual > out.best_dual) {
      out.best_dual = p.dual;
      out.best_lambda = p.lambda;
    }
  }
  out.gap = std::abs(out.primal_aoi - out.best_dual);
  out.max_curvature = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 2; i < out.curve.size(); ++i) {
    const double second = out.curve[i].dual - 2.0 * out.curve[i - 1].dual + out.curve[i - 2].dual;
    out.max_curvature = std::max(out.max_curvature, second);
  }
  return out;
}

OracleStudy oracle_study(Sensing sensing, const Instance& inst, double lambda,
                         const SolveOptions& opts, std::size_t state_cap) {
  auto study = [&](const auto& model) {
    OracleStudy out;
    const FiniteMdp& mdp = model.mdp();
    out.states = mdp.size();
    out.rvi_gain = rvi_plain(mdp, lambda, opts).gain;
    const OracleResult oracle = enumerate_and_evaluate(mdp, lambda, state_cap);
    out.oracle_gain = oracle.gain;
    out.policies = oracle.policies_evaluated;
    const auto pi = stationary_distribution_exact(mdp, oracle.policy);
    std::vector<bool> visited(pi.size());
    for (std::size_t s = 0; s < pi.size(); ++s) visited[s] = pi[s] > 1e-12;
    out.threshold_violations = threshold_violations(model, oracle.policy, visited);
    return out;
  };
  if (sensing == Sensing::None) return study(NoSensingModel(inst));
  return study(DelayedModel(inst));
}

// ---------------------------------------------------------------------------
// Property suite

namespace {

struct SuiteInstance {
  int K;
  ChannelParams ch;
  double lambda;
};

std::vector<SuiteInstance> suite_instances(const ExperimentSpec& spec) {
  constexpr std::uint64_t kSuiteStream = 3;
  SplitMix64 rng(spec.sim.seed, kSuiteStream);
  std::vector<SuiteInstance> out;
  for (std::size_t i = 0; i < spec.property_instances; ++i) {
    SuiteInstance inst;
    inst.K = 2 + static_cast<int>(rng.uniform() * 3.0);
    inst.ch.p01 = 0.05 + 0.55 * rng.uniform();
    inst.ch.p11 = inst.ch.p01 + (0.95 - inst.ch.p01) * rng.uniform();
    inst.lambda = 0.5 + 9.5 * rng.uniform();
    out.push_back(inst);
  }
  return out;
}

struct CheckRow {
  std::string name;
  int N;
  CheckOutcome outcome;
  double runtime_ms;
};

template <class Fn>
CheckRow timed(std::string name, int N, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  CheckOutcome outcome = fn();
  const auto stop = std::chrono::steady_clock::now();
  return {std::move(name), N, std::move(outcome),
          std::chrono::duration<double, std::milli>(stop - start).count()};
}

CheckOutcome equivalence(const FiniteMdp& mdp, const SolveReport& plain,
                         const SolveReport& fast, double eps) {
  CheckOutcome out;
  out.checked = mdp.size();
  for (std::size_t s = 0; s < mdp.size(); ++s) {
    if (plain.policy[s] != fast.policy[s]) {
      out.flag("policies differ at state " + std::to_string(s) + " (aoi=" +
               std::to_string(mdp.aoi(s)) + ", k=" + std::to_string(mdp.slot(s)) + ")");
    }
  }
  ++out.checked;
  if (std::abs(plain.gain - fast.gain) > eps) {
    out.flag("gains differ: " + format_number(plain.gain) + " vs " + format_number(fast.gain));
  }
  ++out.checked;
  if (fast.argmin_evaluations >= plain.argmin_evaluations) {
    out.flag("no argmin savings: " + std::to_string(fast.argmin_evaluations) + " vs " +
             std::to_string(plain.argmin_evaluations));
  }
  return out;
}

template <class Model>
CheckOutcome comparative_statics(const Model& model, const SolveOptions& opts) {
  CheckOutcome out;
  PolicyAverages prev;
  bool first = true;
  for (double lambda : {0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0}) {
    const SolveReport rep = rvi_plain(model.mdp(), lambda, opts);
    const PolicyAverages avg = evaluate_policy(model.mdp(), rep.policy);
    if (!first) {
      ++out.checked;
      if (avg.avg_aoi < prev.avg_aoi - 1e-8 || avg.avg_energy > prev.avg_energy + 1e-8) {
        out.flag("averages move the wrong way at lambda=" + format_number(lambda));
      }
    }
    prev = avg;
    first = false;
  }
  return out;
}

std::vector<CheckRow> run_instance_checks(const ExperimentSpec& spec, const SuiteInstance& si) {
  std::vector<CheckRow> rows;
  const double lambda = si.lambda;
  const int n_small = std::min(spec.bound_n, 60);
  const Instance inst(si.K, si.ch.p11, si.ch.p01, std::max(n_small, si.K + 1));
  const int N = inst.bound.cap();
  const NoSensingModel none(inst);
  const DelayedModel delayed(inst);

  SolveOptions exact;
  exact.tolerance = std::min(spec.eps, 1e-9);
  SolveOptions fast = exact;
  if (spec.inject_fault) {
    fast.tie_break = TieBreak::PreferTransmit;
    fast.tie_tolerance = 2.0 + lambda;
  }

  SolveReport plain_none;
  SolveReport plain_delayed;
  rows.push_back(timed("threshold_solver_matches_plain_no_sensing", N, [&] {
    plain_none = rvi_plain(none.mdp(), lambda, exact);
    return equivalence(none.mdp(), plain_none, rvi_threshold_no_sensing(none, lambda, fast),
                       spec.eps);
  }));
  rows.push_back(timed("threshold_solver_matches_plain_delayed", N, [&] {
    plain_delayed = rvi_plain(delayed.mdp(), lambda, exact);
    return equivalence(delayed.mdp(), plain_delayed, rvi_threshold_delayed(delayed, lambda, fast),
                       spec.eps);
  }));
  rows.push_back(timed("average_policy_threshold_in_belief", N, [&] {
    return check_threshold_shape(none, plain_none.policy);
  }));
  rows.push_back(timed("average_policy_threshold_in_aoi", N, [&] {
    return check_threshold_shape(delayed, plain_delayed.policy);
  }));
  rows.push_back(timed("aoi_threshold_ordering", N, [&] {
    return check_threshold_ordering(delayed, plain_delayed.policy);
  }));
  rows.push_back(timed("lambda_comparative_statics", N, [&] {
    CheckOutcome out = comparative_statics(none, exact);
    out.merge(comparative_statics(delayed, exact));
    return out;
  }));

  constexpr double kBeta = 0.95;
  std::vector<double> v_none;
  std::vector<double> v_delayed;
  rows.push_back(timed("discounted_monotone_in_aoi", N, [&] {
    v_none = converged_discounted_values(none.mdp(), lambda, kBeta);
    return check_value_monotone_in_aoi(none, v_none);
  }));
  rows.push_back(timed("discounted_monotone_in_belief", N, [&] {
    return check_value_monotone_in_belief(none, v_none);
  }));
  rows.push_back(timed("discounted_belief_mixing_inequality", N, [&] {
    return check_belief_mixing_inequality(none, v_none, lambda);
  }));
  rows.push_back(timed("discounted_threshold_in_belief", N, [&] {
    const Policy p = discounted_greedy_policy(none.mdp(), v_none, lambda, kBeta);
    return check_threshold_shape(none, p, interior_states(none));
  }));
  rows.push_back(timed("discounted_delayed_monotone_in_aoi", N, [&] {
    v_delayed = converged_discounted_values(delayed.mdp(), lambda, kBeta);
    return check_value_monotone_in_aoi(delayed, v_delayed);
  }));
  rows.push_back(timed("discounted_threshold_in_aoi", N, [&] {
    const Policy p = discounted_greedy_policy(delayed.mdp(), v_delayed, lambda, kBeta);
    const auto interior = interior_states(delayed);
    CheckOutcome out = check_threshold_shape(delayed, p, interior);
    out.merge(check_threshold_ordering(delayed, p, interior));
    return out;
  }));

  // Smallest admissible truncation at K = 2 keeps the exhaustive search small.
  const Instance tiny(2, si.ch.p11, si.ch.p01, 3);
  for (Sensing sensing : {Sensing::None, Sensing::Delayed}) {
    rows.push_back(timed("oracle_matches_rvi_" + std::string(case_name(sensing)), 3, [&] {
      const OracleStudy o = oracle_study(sensing, tiny, lambda, exact, 20);
      CheckOutcome out;
      out.checked = o.policies;
      if (std::abs(o.rvi_gain - o.oracle_gain) > 1e-6) {
        out.flag("oracle gain " + format_number(o.oracle_gain) + " vs RVI " +
                 format_number(o.rvi_gain));
      }
      if (o.threshold_violations > 0) out.flag("oracle policy is not threshold-shaped");
      return out;
    }));
  }

  rows.push_back(timed("truncation_convergence", 400, [&] {
    SolveOptions tight;
    tight.tolerance = 1e-11;
    return truncation_study(Sensing::None, si.K, si.ch, lambda, {25, 50, 100, 200, 400}, tight)
        .outcome;
  }));

  rows.push_back(timed("dual_gap", 30, [&] {
    BisectionOptions opts;
    opts.solve.tolerance = 1e-10;
    opts.lambda_tolerance = spec.eps_lambda;
    std::vector<double> grid;
    for (int i = 0; i <= 2000; ++i) grid.push_back(0.01 * i);
    const Instance small(2, si.ch.p11, si.ch.p01, 30);
    const DualityStudy d = duality_study(Sensing::None, small, 0.4, grid, opts);
    CheckOutcome out;
    out.checked = d.curve.size();
    if (d.gap > 1e-2) {
      out.flag("primal " + format_number(d.primal_aoi) + " vs dual " + format_number(d.best_dual));
    }
    if (d.best_dual > d.primal_aoi + 1e-6) out.flag("dual exceeds primal");
    if (d.max_curvature > 1e-6) out.flag("dual curve not concave");
    return out;
  }));
  return rows;
}

}  // namespace

PropertyReport run_property_suite(const ExperimentSpec& spec) {
  spec.validate();
  const auto instances = suite_instances(spec);
  auto per_instance = parallel_map(instances.size(), spec.workers, [&](std::size_t i) {
    return run_instance_checks(spec, instances[i]);
  });

  PropertyReport report;
  report.table.header = {"check", "instance", "K",     "p11",        "p01",   "lambda",
                         "N",     "passed",   "checked", "violations", "runtime_ms", "detail"};
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const SuiteInstance& si = instances[i];
    for (const CheckRow& row : per_instance[i]) {
      report.all_passed = report.all_passed && row.outcome.passed();
      std::string detail = row.outcome.counterexample;
      std::replace(detail.begin(), detail.end(), ',', ';');
      report.table.rows.push_back({row.name, std::to_string(i), std::to_string(si.K),
                                   format_number(si.ch.p11), format_number(si.ch.p01),
                                   format_number(si.lambda), std::to_string(row.N),
                                   row.outcome.passed() ? "pass" : "fail",
                                   std::to_string(row.outcome.checked),
                                   std::to_string(row.outcome.violations),
                                   format_number(std::round(row.runtime_ms * 1000.0) / 1000.0),
                                   detail});
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Single solve

CsvTable run_single_solve(const ExperimentSpec& spec) {
  spec.validate();
  CsvTable table;
  table.header = provenance_header();
  for (const char* c : {"component", "lambda", "q", "aoi", "k", "g", "threshold"}) {
    table.header.emplace_back(c);
  }
  const double e_max = spec.e_max.front();
  for (Sensing sensing : spec.sensing_cases()) {
    for (const ChannelParams& ch : spec.channels) {
      for (int K : spec.frame_lengths) {
        with_context(point_label(sensing, K, ch, e_max), [&] {
          const Instance inst(K, ch.p11, ch.p01, spec.bound_n);
          const BisectionOptions opts = bisection_options(spec);
          auto emit = [&](const char* component, double lambda, double q, const std::string& aoi,
                          int k, const std::string& g, const std::string& threshold) {
            auto row = provenance(spec, case_name(sensing), K, ch, e_max);
            for (std::string cell : {std::string(component), format_number(lambda),
                                     format_number(q), aoi, std::to_string(k), g, threshold}) {
              row.push_back(std::move(cell));
            }
            table.rows.push_back(std::move(row));
          };
          if (sensing == Sensing::None) {
            const NoSensingModel model(inst);
            const MixturePolicy m = bisect_lambda(model, e_max, opts);
            for (const auto& [name, policy, lambda] :
                 {std::tuple{"minus", &m.minus, m.lambda_minus},
                  std::tuple{"plus", &m.plus, m.lambda_plus}}) {
              for (const auto& [key, w] : extract_thresholds(model, *policy).threshold) {
                if (!transmit_allowed(inst.frame, key.first)) continue;
                emit(name, lambda, m.q, std::to_string(key.first), key.second, "",
                     format_number(w));
              }
            }
          } else {
            const DelayedModel model(inst);
            const MixturePolicy m = bisect_lambda(model, e_max, opts);
            for (const auto& [name, policy, lambda] :
                 {std::tuple{"minus", &m.minus, m.lambda_minus},
                  std::tuple{"plus", &m.plus, m.lambda_plus}}) {
              for (const auto& [key, a] : extract_thresholds(model, *policy).threshold) {
                const std::string cut = a == ThresholdPolicyAoI::kNever ? "inf" : std::to_string(a);
                emit(name, lambda, m.q, "", key.first, std::to_string(key.second), cut);
              }
            }
          }
          return 0;
        });
      }
    }
  }
  return table;
}

}  // namespace aoi
