// Acceptance harness: prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "aoi/experiments.hpp"
#include "aoi/parallel.hpp"

using namespace aoi;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

unsigned workers() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt(double x, int precision = 6) {
  std::ostringstream os;
  os.precision(precision);
  os << x;
  return os.str();
}

const std::vector<ChannelParams> kTriples = {{0.7, 0.3}, {0.9, 0.3}, {0.9, 0.5}};

Verdict energy_anchor() {
  const Instance inst(3, 0.7, 0.3, 1000);
  const NoSensingModel model(inst);
  const SolveReport r = rvi_threshold_no_sensing(model, 0.0);
  const double analytic = average_energy_of_policy(model.mdp(), r.policy);
  SimConfig cfg;
  cfg.horizon = 100'000;
  cfg.warmup = 0;
  cfg.seed = 1;
  const SimResult mc = simulate(model, r.policy, cfg);
  Verdict v;
  v.pass = analytic >= 0.6067 && analytic <= 0.6267 && std::abs(mc.avg_energy - analytic) <= 0.01;
  v.detail = "N=1000 analytic energy=" + fmt(analytic) + " mc energy=" + fmt(mc.avg_energy) +
             " (" + std::to_string(model.states().size()) + " states)";
  return v;
}

Verdict oracle_equivalence() {
  SolveOptions opts;
  opts.tolerance = 1e-10;
  std::size_t instances = 0;
  std::size_t bad = 0;
  double worst = 0.0;
  std::string first;
  const auto record = [&](Sensing s, const Instance& inst, double lambda, std::size_t cap) {
    const OracleStudy o = oracle_study(s, inst, lambda, opts, cap);
    ++instances;
    const double diff = std::abs(o.rvi_gain - o.oracle_gain);
    worst = std::max(worst, diff);
    if (diff > 1e-6 || o.threshold_violations > 0) {
      ++bad;
      if (first.empty()) {
        first = std::string(case_name(s)) + " N=" + std::to_string(inst.bound.cap()) +
                " lambda=" + fmt(lambda);
      }
    }
  };
  std::size_t capped = 0;
  for (int N : {3, 4, 5}) {
    for (const auto& [p11, p01, lambda] :
         {std::tuple{0.7, 0.3, 1.0}, std::tuple{0.9, 0.1, 3.0}, std::tuple{0.8, 0.5, 0.5},
          std::tuple{0.95, 0.05, 8.0}}) {
      record(Sensing::Delayed, Instance(2, p11, p01, N), lambda, 14);
      ++capped;
    }
  }
  // Without sensing the smallest space (N=3) already has 16-17 states.
  for (const auto& [p11, p01, lambda] :
       {std::tuple{0.7, 0.3, 1.0}, std::tuple{0.9, 0.3, 2.0}, std::tuple{0.8, 0.2, 0.5}}) {
    record(Sensing::None, Instance(2, p11, p01, 3), lambda, 20);
  }
  Verdict v;
  v.pass = bad == 0 && capped >= 10;
  v.detail = std::to_string(instances) + " instances (" + std::to_string(capped) +
             " within 14 states), max |gain diff|=" + fmt(worst, 3) +
             (first.empty() ? "" : ", first mismatch " + first);
  return v;
}

struct GridPoint {
  int K;
  ChannelParams ch;
  double lambda;
};

std::vector<GridPoint> structure_grid() {
  std::vector<GridPoint> grid;
  for (int K : {2, 3, 4}) {
    for (ChannelParams ch : {ChannelParams{0.7, 0.3}, ChannelParams{0.9, 0.1}}) {
      for (double lambda : {1.0, 4.0}) grid.push_back({K, ch, lambda});
    }
  }
  return grid;
}

struct StructureRow {
  bool same_ns = false;
  bool same_dl = false;
  double gain_diff = 0.0;
  std::size_t plain_argmins = 0;
  std::size_t fast_argmins = 0;
  bool fewer = false;
  std::size_t ordering_violations = 0;
};

std::vector<StructureRow> solve_structure_grid() {
  const auto grid = structure_grid();
  SolveOptions opts;
  return parallel_map(grid.size(), workers(), [&](std::size_t i) {
    const GridPoint& g = grid[i];
    const Instance inst(g.K, g.ch.p11, g.ch.p01, 200);
    StructureRow row;
    const NoSensingModel ns(inst);
    const SolveReport a = rvi_plain(ns.mdp(), g.lambda, opts);
    const SolveReport b = rvi_threshold_no_sensing(ns, g.lambda, opts);
    const DelayedModel dl(inst);
    const SolveReport c = rvi_plain(dl.mdp(), g.lambda, opts);
    const SolveReport d = rvi_threshold_delayed(dl, g.lambda, opts);
    row.same_ns = a.policy == b.policy;
    row.same_dl = c.policy == d.policy;
    row.gain_diff = std::max(std::abs(a.gain - b.gain), std::abs(c.gain - d.gain));
    row.plain_argmins = a.argmin_evaluations + c.argmin_evaluations;
    row.fast_argmins = b.argmin_evaluations + d.argmin_evaluations;
    row.fewer = b.argmin_evaluations < a.argmin_evaluations &&
                d.argmin_evaluations < c.argmin_evaluations;
    row.ordering_violations = check_threshold_ordering(dl, d.policy).violations +
                              check_threshold_ordering(dl, c.policy).violations;
    return row;
  });
}

Verdict structure_equivalence(const std::vector<StructureRow>& rows) {
  Verdict v;
  double worst = 0.0;
  std::size_t plain = 0, fast = 0;
  for (const auto& r : rows) {
    v.pass = v.pass && r.same_ns && r.same_dl && r.gain_diff <= 1e-6 && r.fewer;
    worst = std::max(worst, r.gain_diff);
    plain += r.plain_argmins;
    fast += r.fast_argmins;
  }
  v.detail = std::to_string(rows.size()) + " grid points, max gain diff=" + fmt(worst, 3) +
             ", argmin evaluations plain=" + std::to_string(plain) +
             " threshold-aware=" + std::to_string(fast);
  return v;
}

Verdict threshold_ordering(const std::vector<StructureRow>& rows) {
  std::size_t violations = 0;
  for (const auto& r : rows) violations += r.ordering_violations;
  return {violations == 0, std::to_string(violations) + " violations across " +
                               std::to_string(rows.size()) + " delayed-sensing solves"};
}

Verdict truncation_convergence() {
  SolveOptions opts;
  opts.tolerance = 1e-11;
  struct Job {
    Sensing s;
    double lambda;
  };
  std::vector<Job> jobs;
  for (Sensing s : {Sensing::None, Sensing::Delayed}) {
    for (double lambda : {0.0, 1.0, 5.0}) jobs.push_back({s, lambda});
  }
  const auto studies = parallel_map(jobs.size(), workers(), [&](std::size_t i) {
    return truncation_study(jobs[i].s, 3, {0.7, 0.3}, jobs[i].lambda, {25, 50, 100, 200, 400}, opts);
  });
  Verdict v;
  std::ostringstream os;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    v.pass = v.pass && studies[i].outcome.passed();
    os << (i ? "; " : "") << case_name(jobs[i].s) << " lambda=" << jobs[i].lambda
       << " last diff=" << fmt(studies[i].differences.back(), 3);
  }
  v.detail = os.str();
  return v;
}

double sigma2(const CsvTable& t, std::size_t a, std::size_t b) {
  return 2.0 * std::hypot(t.number(a, "aoi_mc_stderr"), t.number(b, "aoi_mc_stderr"));
}

Verdict tradeoff_criteria(const CsvTable& t) {
  std::map<std::tuple<std::string, double, double, double>, std::size_t> index;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.cell(r, "kind") != "mixture") continue;
    index[{t.cell(r, "case"), t.number(r, "p11"), t.number(r, "p01"), t.number(r, "E_max")}] = r;
  }
  std::size_t over_budget = 0, not_monotone_e = 0, not_monotone_p = 0;
  std::string first;
  for (const auto& [key, r] : index) {
    if (t.number(r, "energy_mc") > std::get<3>(key) + 0.01) {
      ++over_budget;
      if (first.empty()) first = "energy over budget at row " + std::to_string(r);
    }
  }
  const std::vector<double> budgets = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  for (const char* c : {"no_sensing", "delayed_sensing"}) {
    for (const ChannelParams& ch : kTriples) {
      for (std::size_t i = 1; i < budgets.size(); ++i) {
        const std::size_t a = index.at({c, ch.p11, ch.p01, budgets[i - 1]});
        const std::size_t b = index.at({c, ch.p11, ch.p01, budgets[i]});
        if (t.number(b, "aoi_mc") > t.number(a, "aoi_mc") + sigma2(t, a, b)) {
          ++not_monotone_e;
          if (first.empty()) first = std::string(c) + " AoI rises at E_max=" + fmt(budgets[i]);
        }
      }
      for (double e : budgets) {
        for (std::size_t j = 1; j < kTriples.size(); ++j) {
          const std::size_t a = index.at({c, kTriples[j - 1].p11, kTriples[j - 1].p01, e});
          const std::size_t b = index.at({c, kTriples[j].p11, kTriples[j].p01, e});
          if (t.number(b, "aoi_mc") > t.number(a, "aoi_mc") + sigma2(t, a, b)) {
            ++not_monotone_p;
            if (first.empty()) first = std::string(c) + " AoI rises with channel quality";
          }
        }
      }
    }
  }
  Verdict v;
  v.pass = over_budget + not_monotone_e + not_monotone_p == 0;
  v.detail = std::to_string(index.size()) + " mixture rows; over budget=" +
             std::to_string(over_budget) + ", E_max monotonicity breaks=" +
             std::to_string(not_monotone_e) + ", channel monotonicity breaks=" +
             std::to_string(not_monotone_p) + (first.empty() ? "" : " (" + first + ")");
  return v;
}

Verdict case_dominance(const CsvTable& t) {
  std::map<std::tuple<double, double, double, std::string>, std::size_t> ns;
  std::vector<std::pair<std::size_t, std::tuple<double, double, double, std::string>>> dl;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    auto key = std::tuple{t.number(r, "p11"), t.number(r, "p01"), t.number(r, "E_max"),
                          t.cell(r, "kind")};
    if (t.cell(r, "case") == "no_sensing") {
      ns[key] = r;
    } else {
      dl.emplace_back(r, key);
    }
  }
  std::size_t bad = 0;
  double worst = -1e300;
  for (const auto& [r, key] : dl) {
    const std::size_t o = ns.at(key);
    const double excess = t.number(r, "aoi_mc") - t.number(o, "aoi_mc") - sigma2(t, r, o);
    worst = std::max(worst, excess);
    if (excess > 0.0) ++bad;
  }
  return {bad == 0, std::to_string(dl.size()) + " matched grid points, " + std::to_string(bad) +
                        " violations, max(delayed - no_sensing - 2 sigma)=" + fmt(worst, 3)};
}

Verdict greedy_dominance() {
  ExperimentSpec spec = ExperimentSpec::defaults_for(Command::GreedyCompare);
  spec.workers = workers();
  const GreedyComparison g = run_greedy_comparison(spec);
  std::size_t bad = 0;
  double min_gap = 1e300;
  for (std::size_t r = 0; r < g.table.rows.size(); ++r) {
    const double greedy = g.table.number(r, "greedy_aoi");
    for (const char* col : {"optimal_aoi_no_sensing", "optimal_aoi_delayed"}) {
      const double opt = g.table.number(r, col);
      min_gap = std::min(min_gap, greedy - opt);
      if (opt > greedy) ++bad;
    }
  }
  return {bad == 0, std::to_string(g.table.rows.size()) + " E_max rows, smallest greedy-optimal gap=" +
                        fmt(min_gap, 4) + ", spearman(E_max, gap) no_sensing=" +
                        fmt(g.gap_trend_no_sensing, 3) + " delayed=" + fmt(g.gap_trend_delayed, 3)};
}

Verdict discounted_property_suite() {
  const double beta = 0.95;
  struct Job {
    ChannelParams ch;
    double lambda;
  };
  std::vector<Job> jobs;
  for (ChannelParams ch : {ChannelParams{0.7, 0.3}, ChannelParams{0.9, 0.1}, ChannelParams{0.8, 0.5},
                           ChannelParams{0.95, 0.3}}) {
    for (double lambda : {0.5, 2.0, 6.0}) jobs.push_back({ch, lambda});
  }
  const auto outcomes = parallel_map(jobs.size(), workers(), [&](std::size_t i) {
    const Instance inst(3, jobs[i].ch.p11, jobs[i].ch.p01, 60);
    const double lambda = jobs[i].lambda;
    std::vector<CheckOutcome> out;
    const NoSensingModel ns(inst);
    const auto v = converged_discounted_values(ns.mdp(), lambda, beta);
    const auto interior = interior_states(ns);
    out.push_back(check_value_monotone_in_aoi(ns, v));
    out.push_back(check_value_monotone_in_belief(ns, v));
    out.push_back(check_belief_mixing_inequality(ns, v, lambda));
    out.push_back(check_threshold_shape(ns, discounted_greedy_policy(ns.mdp(), v, lambda, beta),
                                        interior));
    const DelayedModel dl(inst);
    const auto w = converged_discounted_values(dl.mdp(), lambda, beta);
    const auto dinterior = interior_states(dl);
    const Policy dp = discounted_greedy_policy(dl.mdp(), w, lambda, beta);
    out.push_back(check_value_monotone_in_aoi(dl, w));
    out.push_back(check_threshold_shape(dl, dp, dinterior));
    out.push_back(check_threshold_ordering(dl, dp, dinterior));
    return out;
  });
  const std::vector<std::string> names = {"aoi monotone",     "belief monotone",
                                          "mixing inequality", "belief threshold",
                                          "delayed aoi monotone", "aoi threshold",
                                          "threshold ordering"};
  std::vector<CheckOutcome> total(names.size());
  for (const auto& per_job : outcomes) {
    for (std::size_t c = 0; c < names.size(); ++c) total[c].merge(per_job[c]);
  }
  Verdict v;
  std::ostringstream os;
  os << jobs.size() << " instances:";
  for (std::size_t c = 0; c < names.size(); ++c) {
    v.pass = v.pass && total[c].passed();
    os << (c ? "," : "") << " " << names[c] << " " << total[c].violations << "/"
       << total[c].checked;
    if (!total[c].passed()) os << " [" << total[c].counterexample << "]";
  }
  v.detail = os.str();
  return v;
}

Verdict duality_check() {
  BisectionOptions opts;
  opts.solve.tolerance = 1e-10;
  std::vector<double> grid;
  for (int i = 0; i <= 2000; ++i) grid.push_back(0.01 * i);
  const Instance inst(2, 0.7, 0.3, 30);
  const auto studies = parallel_map(2, workers(), [&](std::size_t i) {
    return duality_study(i == 0 ? Sensing::None : Sensing::Delayed, inst, 0.4, grid, opts);
  });
  Verdict v;
  std::ostringstream os;
  for (std::size_t i = 0; i < studies.size(); ++i) {
    const DualityStudy& d = studies[i];
    v.pass = v.pass && d.gap <= 1e-2;
    os << (i ? "; " : "") << case_name(i == 0 ? Sensing::None : Sensing::Delayed)
       << " max dual=" << fmt(d.best_dual, 8) << " at lambda=" << d.best_lambda
       << " primal=" << fmt(d.primal_aoi, 8) << " gap=" << fmt(d.gap, 3);
  }
  v.detail = os.str();
  return v;
}

}  // namespace

int main() {
  int failures = 0;
  const auto report = [&](int id, const char* name, const std::function<Verdict()>& fn) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!v.pass) ++failures;
    std::printf("criterion %2d %-28s %s  %s [%.1fs]\n", id, name, v.pass ? "PASS" : "FAIL",
                v.detail.c_str(), secs);
    std::fflush(stdout);
  };

  report(1, "energy-anchor", energy_anchor);
  report(2, "oracle-equivalence", oracle_equivalence);
  std::vector<StructureRow> grid;
  report(3, "structure-equivalence", [&] {
    grid = solve_structure_grid();
    return structure_equivalence(grid);
  });
  report(4, "threshold-ordering", [&] { return threshold_ordering(grid); });
  report(5, "truncation-convergence", truncation_convergence);

  CsvTable tradeoff;
  std::string sweep_error;
  try {
    ExperimentSpec spec = ExperimentSpec::defaults_for(Command::Tradeoff);
    spec.workers = workers();
    tradeoff = run_tradeoff_sweep(spec);
  } catch (const std::exception& e) {
    sweep_error = e.what();
  }
  const auto needs_sweep = [&](const std::function<Verdict()>& fn) {
    return [&, fn] {
      if (!sweep_error.empty()) return Verdict{false, "tradeoff sweep failed: " + sweep_error};
      return fn();
    };
  };
  report(6, "constraint-and-statics", needs_sweep([&] { return tradeoff_criteria(tradeoff); }));
  report(7, "greedy-dominance", greedy_dominance);
  report(8, "case-dominance", needs_sweep([&] { return case_dominance(tradeoff); }));
  report(9, "discounted-properties", discounted_property_suite);
  report(10, "duality", duality_check);

  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
