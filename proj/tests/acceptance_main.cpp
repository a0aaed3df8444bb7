// Acceptance suite: one line per criterion, exit 0 only if all pass.
//
// Heavy criteria parallelize over instances; set CRAN_LOADSCALE_THREADS to
// cap the worker count and LOADSCALE_TREND_SEEDS to shrink the trend batch
// (default 20 seeds, 5 is the quick smoke variant).

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "loadscale/loadscale.hpp"
#include "support/random_instances.hpp"

using namespace loadscale;
namespace ts = testsupport;

namespace {

struct Check {
  bool pass = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      pass = false;
      if (detail.tellp() > 0) detail << "; ";
      detail << what;
    }
  }
  void note(const std::string& what) {
    if (detail.tellp() > 0) detail << "; ";
    detail << what;
  }
};

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point t0 = clock::now();
  return std::chrono::duration<double>(clock::now() - t0).count();
}

int worker_count() {
  if (const char* env = std::getenv("CRAN_LOADSCALE_THREADS")) {
    int n = std::atoi(env);
    return n <= 1 ? 1 : n;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

void parallel_for(int count, const std::function<void(int)>& body) {
  int workers = std::min(worker_count(), count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  auto run = [&] {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= count) return;
      body(i);
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& t : pool) t.join();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

// Per-run record collected from criteria 6 and 7, validated by criterion 8.
struct RunRecord {
  int m = 0;
  int n = 0;
  std::vector<double> alpha_history;
  double worst_load_ratio = 0.0;  // max_i rho_i / rho_bar at the final solution
  int accepted_links = 0;
};

std::vector<RunRecord> g_run_log;
std::mutex g_run_log_mutex;

void log_run(const NetworkInstance& inst, const JointResult& joint) {
  RunRecord rec;
  rec.m = inst.num_rrhs;
  rec.n = inst.num_ues;
  rec.alpha_history = joint.alpha_history;
  LoadVector rho = load_from_allocation(joint.kappa_star, joint.mu_star);
  for (double r : rho) rec.worst_load_ratio = std::max(rec.worst_load_ratio, r / inst.load_limit);
  rec.accepted_links = static_cast<int>(joint.accepted_links.size());
  std::lock_guard<std::mutex> lock(g_run_log_mutex);
  g_run_log.push_back(std::move(rec));
}

// --- criterion 1: gadget golden values --------------------------------------

Check criterion_gadget_golden() {
  Check c;
  double t0 = now_seconds();

  SatFormula f = parse_sat_formula("(1 2 -3)");
  SatGadget g = gadget_from_sat(f);
  auto fixed_loads = [&](const Association& assoc) {
    auto map = [&](const Allocation& mu) { return interference_map(g.instance, assoc, mu); };
    FixedPointResult fp = fixed_point(map, Allocation(g.instance.num_ues, 0.0), 1e-13, 10000);
    c.require(fp.converged, "gadget fixed point did not converge");
    return std::pair<LoadVector, Allocation>(load_from_allocation(assoc, fp.mu), fp.mu);
  };

  // singly served variable UE fully loads its RRH
  std::vector<bool> satisfying{false, true, false, false};  // b1 = true satisfies the clause
  auto [rho_sat, mu_sat] = fixed_loads(association_from_assignment(g, satisfying));
  c.require(std::abs(rho_sat[g.literal_rrh(1, true)] - 1.0) <= 1e-9, "variable-UE load != 1");
  c.require(std::abs(rho_sat[g.hub_rrh()] - 1.0) <= 1e-9, "hub load != 1");
  for (double r : rho_sat) c.require(r <= 1.0 + 1e-9, "satisfying assignment overloaded an RRH");

  // clause RRH with <= 2 active literal RRHs stays within capacity
  c.require(rho_sat[g.clause_rrh(0)] <= 1.0 + 1e-9, "clause load > 1 with an idle literal RRH");

  // all three literal RRHs active: clause RRH load = 1/log2(1.75) > 1
  std::vector<bool> falsifying{false, false, false, true};
  auto [rho_bad, mu_bad] = fixed_loads(association_from_assignment(g, falsifying));
  double clause_overload = 1.0 / std::log2(1.75);
  c.require(std::abs(rho_bad[g.clause_rrh(0)] - clause_overload) <= 1e-9,
            "clause overload != 1/log2(1.75) (" + fmt(rho_bad[g.clause_rrh(0)]) + ")");
  c.require(rho_bad[g.clause_rrh(0)] > 1.0, "clause overload not > 1");

  // dual-serving a variable UE: interference into the hub is 6*2/log2(13) > 3
  Association dual = association_from_assignment(g, satisfying).with_link(g.literal_rrh(1, false), g.variable_ue(1));
  auto map = [&](const Allocation& mu) { return interference_map(g.instance, dual, mu); };
  FixedPointResult fp = fixed_point(map, Allocation(g.instance.num_ues, 0.0), 1e-13, 10000);
  c.require(fp.converged, "dual-serving fixed point did not converge");
  double dual_mu = fp.mu[g.variable_ue(1)];
  double interference_to_hub = 2.0 * 3.0 * dual_mu;  // two unit-gain p=3 RRHs at load dual_mu
  double expected = 12.0 / std::log2(13.0);
  c.require(std::abs(interference_to_hub - expected) <= 1e-9,
            "dual-serving interference != 12/log2(13) (" + fmt(interference_to_hub) + ")");
  c.require(interference_to_hub > 3.0, "dual-serving interference not > 3");
  LoadVector rho_dual = load_from_allocation(dual, fp.mu);
  c.require(rho_dual[g.hub_rrh()] > 1.0, "hub not overloaded under dual serving");

  double elapsed = now_seconds() - t0;
  c.require(elapsed < 1.0, "runtime " + fmt(elapsed) + " s >= 1 s");
  c.note("clause load " + fmt(rho_bad[g.clause_rrh(0)]) + ", hub interference " + fmt(interference_to_hub) +
         ", " + fmt(elapsed) + " s");
  return c;
}

// --- criterion 2: oracle equivalence -----------------------------------------

Check criterion_oracle_equivalence() {
  Check c;
  double t0 = now_seconds();
  const int kInstances = 50;
  std::vector<double> rel_err(kInstances, 0.0);
  std::vector<std::string> errors(kInstances);

  parallel_for(kInstances, [&](int t) {
    try {
      std::mt19937_64 gen(9000 + t);
      int m = 2 + static_cast<int>(gen() % 2);   // {2, 3}
      int n = 2 + static_cast<int>(gen() % 3);   // {2, 3, 4}
      NetworkInstance inst = ts::random_instance(gen(), m, n);
      Association assoc = ts::random_association(gen, inst, 1);
      TargetSet target = ts::random_target(gen, n);

      ScalingProblem p;
      p.target_set = target;
      p.epsilon = 1e-10;
      MaxAlphaResult r = solve_max_alpha(inst, assoc, p, 500000);
      if (!r.converged) throw std::runtime_error("solver did not converge");
      double oracle = oracle_max_alpha(inst, assoc, target, 1e-7);
      rel_err[t] = std::abs(r.alpha_star - oracle) / std::max(oracle, 1e-12);
    } catch (const std::exception& e) {
      errors[t] = e.what();
    }
  });

  double worst = 0.0;
  for (int t = 0; t < kInstances; ++t) {
    c.require(errors[t].empty(), "instance " + std::to_string(t) + ": " + errors[t]);
    worst = std::max(worst, rel_err[t]);
  }
  c.require(worst <= 1e-5, "worst relative gap " + fmt(worst) + " > 1e-5");
  double elapsed = now_seconds() - t0;
  c.require(elapsed < 30.0, "runtime " + fmt(elapsed) + " s >= 30 s");
  c.note("50 instances, worst gap " + fmt(worst) + ", " + fmt(elapsed) + " s");
  return c;
}

// --- criterion 3: optimality conditions at epsilon = 1e-4 ---------------------

Check criterion_optimality_conditions() {
  Check c;
  const double eps = 1e-4;
  const double tol = 1e-3;
  int solves = 0;
  double worst_h = 0.0, worst_eq = 0.0;

  auto check_solution = [&](const NetworkInstance& inst, const Association& assoc, const TargetSet& target) {
    ScalingProblem p;
    p.target_set = target;
    p.epsilon = eps;
    MaxAlphaResult r = solve_max_alpha(inst, assoc, p);
    if (!r.converged) return;  // only converged solves are in scope
    ++solves;

    double h = h_max_load(assoc, r.mu_star, inst.load_limit);
    worst_h = std::max(worst_h, std::abs(h - 1.0));
    c.require(std::abs(h - 1.0) <= tol, "|H - 1| = " + fmt(std::abs(h - 1.0)));

    Allocation f = interference_map(inst, assoc, r.mu_star);
    for (int j = 0; j < inst.num_ues; ++j) {
      double rhs = target.contains(j) ? r.alpha_star * f[j] : f[j];
      worst_eq = std::max(worst_eq, std::abs(r.mu_star[j] - rhs));
      c.require(std::abs(r.mu_star[j] - rhs) <= tol, "fixed-point equality gap " + fmt(std::abs(r.mu_star[j] - rhs)));
    }

    LoadVector rho = load_from_allocation(assoc, r.mu_star);
    bool one_full = false;
    for (double load : rho) one_full = one_full || std::abs(load / inst.load_limit - 1.0) <= tol;
    c.require(one_full, "no RRH at the load limit");
  };

  std::mt19937_64 gen(777);
  for (int t = 0; t < 30; ++t) {
    NetworkInstance inst = ts::random_instance(gen(), 2 + static_cast<int>(gen() % 3), 3 + static_cast<int>(gen() % 4));
    Association assoc = ts::random_association(gen, inst, 2);
    check_solution(inst, assoc, ts::random_target(gen, inst.num_ues));
  }
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    ScenarioConfig cfg;
    cfg.rng_seed = seed;
    Scenario s = generate(cfg);
    check_solution(s.instance, s.baseline, TargetSet(100, sample_target_group(100, 40, seed)));
  }

  c.note(std::to_string(solves) + " converged solves, worst |H-1| " + fmt(worst_h) + ", worst equality gap " +
         fmt(worst_eq));
  return c;
}

// --- criterion 4: SIF axiom property tests ------------------------------------

Check criterion_sif_axioms() {
  Check c;
  std::mt19937_64 gen(13579);
  int f_failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    int m = 2 + static_cast<int>(gen() % 3);
    int n = 2 + static_cast<int>(gen() % 4);
    NetworkInstance inst = ts::random_instance(gen(), m, n);
    Association assoc = ts::random_association(gen, inst, static_cast<int>(gen() % 3));
    Allocation mu = ts::random_mu(gen, n);
    Allocation bigger = mu;
    for (double& v : bigger) v += ts::uniform(gen, 0.0, 0.5);
    double beta = 1.0 + ts::uniform(gen, 0.01, 2.0);
    TargetSet target = ts::random_target(gen, n);
    double alpha = ts::uniform(gen, 0.5, 3.0);

    Allocation scaled_arg = mu;
    for (double& v : scaled_arg) v *= beta;
    Allocation f1 = interference_map(inst, assoc, mu);
    Allocation f2 = interference_map(inst, assoc, bigger);
    Allocation f3 = interference_map(inst, assoc, scaled_arg);
    Allocation g1 = f_alpha(inst, assoc, mu, alpha, target);
    Allocation g2 = f_alpha(inst, assoc, bigger, alpha, target);
    Allocation g3 = f_alpha(inst, assoc, scaled_arg, alpha, target);
    for (int j = 0; j < n; ++j) {
      bool ok = f2[j] >= f1[j] - 1e-12 && beta * f1[j] > f3[j] && g2[j] >= g1[j] - 1e-12 && beta * g1[j] > g3[j];
      if (!ok) ++f_failures;
    }
  }
  c.require(f_failures == 0, std::to_string(f_failures) + " monotonicity/scalability violations");

  int t_failures = 0, p_failures = 0;
  std::vector<int> trial_fail(200, 0);
  parallel_for(200, [&](int trial) {
    std::mt19937_64 tg(24680 + trial);
    NetworkInstance inst = ts::random_instance(tg(), 2, 3);
    Association assoc = ts::random_association(tg, inst, 1);
    bool strict = trial % 2 == 0;
    TargetSet target = strict ? TargetSet(3, {static_cast<int>(tg() % 3)}) : TargetSet::all(3);

    auto T = [&](double a) {
      auto r = normalized_fixed_point(inst, assoc, target, a, {}, 1e-12, 200000);
      if (!r.converged) throw std::runtime_error("normalized iteration stalled");
      return 1.0 / h_max_load(assoc, f_alpha(inst, assoc, r.mu, a, target), inst.load_limit);
    };
    double a = ts::uniform(tg, 0.3, 2.0);
    double a_hi = a * ts::uniform(tg, 1.1, 2.0);
    double eta = ts::uniform(tg, 1.1, 2.5);
    double t_a = T(a);
    if (T(a_hi) < t_a - 1e-9) trial_fail[trial] |= 1;
    if (strict ? !(eta * t_a > T(eta * a)) : eta * t_a < T(eta * a) - 1e-9) trial_fail[trial] |= 1;

    // P concavity on a grid for a fixed random mu
    Allocation mu = ts::random_mu(tg, 3);
    auto P = [&](double x) { return 1.0 / h_max_load(assoc, f_alpha(inst, assoc, mu, x, target), inst.load_limit); };
    double x0 = ts::uniform(tg, 0.2, 1.0), step = ts::uniform(tg, 0.05, 0.5);
    for (int i = 0; i < 6; ++i) {
      double dd = P(x0 + (i + 2) * step) - 2.0 * P(x0 + (i + 1) * step) + P(x0 + i * step);
      if (dd > 1e-9) trial_fail[trial] |= 2;
    }
  });
  for (int t = 0; t < 200; ++t) {
    if (trial_fail[t] & 1) ++t_failures;
    if (trial_fail[t] & 2) ++p_failures;
  }
  c.require(t_failures == 0, std::to_string(t_failures) + " T-axiom violations");
  c.require(p_failures == 0, std::to_string(p_failures) + " P-concavity violations");
  c.note("1000 f/F_alpha trials, 200 T/P trials");
  return c;
}

// --- criterion 5: fixed-point uniqueness --------------------------------------

Check criterion_uniqueness() {
  Check c;
  std::vector<double> alpha_gap(20, 0.0), mu_gap(20, 0.0);
  std::vector<std::string> errors(20);
  parallel_for(20, [&](int t) {
    try {
      std::mt19937_64 gen(4000 + t);
      NetworkInstance inst = ts::random_instance(gen(), 2 + static_cast<int>(gen() % 2), 3);
      Association assoc = ts::random_association(gen, inst, 1);
      TargetSet target = ts::random_target(gen, 3);

      auto solve_from = [&](double a0, Allocation mu0) {
        ScalingProblem p;
        p.target_set = target;
        p.epsilon = 1e-10;
        p.alpha0 = a0;
        p.mu0 = std::move(mu0);
        MaxAlphaResult r = solve_max_alpha(inst, assoc, p, 500000);
        if (!r.converged) throw std::runtime_error("solver did not converge");
        return r;
      };
      MaxAlphaResult a = solve_from(ts::uniform(gen, 0.2, 5.0), ts::random_mu(gen, 3));
      MaxAlphaResult b = solve_from(ts::uniform(gen, 0.2, 5.0), ts::random_mu(gen, 3));
      alpha_gap[t] = std::abs(a.alpha_star - b.alpha_star);
      mu_gap[t] = linf_distance(a.mu_star, b.mu_star);
    } catch (const std::exception& e) {
      errors[t] = e.what();
    }
  });
  double worst_a = 0.0, worst_mu = 0.0;
  for (int t = 0; t < 20; ++t) {
    c.require(errors[t].empty(), "instance " + std::to_string(t) + ": " + errors[t]);
    worst_a = std::max(worst_a, alpha_gap[t]);
    worst_mu = std::max(worst_mu, mu_gap[t]);
  }
  c.require(worst_a <= 1e-6, "alpha gap " + fmt(worst_a) + " > 1e-6");
  c.require(worst_mu <= 1e-6, "mu gap " + fmt(worst_mu) + " > 1e-6");
  c.note("20 instances, worst gaps alpha " + fmt(worst_a) + ", mu " + fmt(worst_mu));
  return c;
}

// --- criterion 6: convergence budget at simulation scale -----------------------

Check criterion_convergence_budget() {
  Check c;
  const int kInstances = 10;
  std::vector<int> iterations(kInstances, 0);
  std::vector<double> joint_seconds(kInstances, 0.0);
  std::vector<std::string> errors(kInstances);

  parallel_for(kInstances, [&](int t) {
    try {
      ScenarioConfig cfg;
      cfg.rng_seed = 100 + static_cast<std::uint64_t>(t);
      Scenario s = generate(cfg);

      ScalingProblem p;
      p.target_set = TargetSet(100, sample_target_group(100, 40, cfg.rng_seed));
      p.epsilon = 1e-4;
      MaxAlphaResult r = solve_max_alpha(s.instance, s.baseline, p);
      if (!r.converged) throw std::runtime_error("solve did not converge");
      iterations[t] = r.iterations;

      // eventually monotone residual decay: no increase in the second half
      const auto& steps = r.trace.steps;
      for (size_t k = steps.size() / 2 + 1; k < steps.size(); ++k)
        if (steps[k].residual > steps[k - 1].residual * (1.0 + 1e-12))
          throw std::runtime_error("residual increased at step " + std::to_string(k) + " of " +
                                   std::to_string(steps.size()));

      auto t0 = std::chrono::steady_clock::now();
      JointResult joint = joint_optimize(s.instance, s.baseline, p);
      joint_seconds[t] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (!joint.converged) throw std::runtime_error("joint run had a non-convergent solve");
      log_run(s.instance, joint);
    } catch (const std::exception& e) {
      errors[t] = e.what();
    }
  });

  int worst_iters = 0;
  double worst_joint = 0.0;
  for (int t = 0; t < kInstances; ++t) {
    c.require(errors[t].empty(), "instance " + std::to_string(t) + ": " + errors[t]);
    worst_iters = std::max(worst_iters, iterations[t]);
    worst_joint = std::max(worst_joint, joint_seconds[t]);
  }
  c.require(worst_iters <= 50, "solve took " + std::to_string(worst_iters) + " > 50 iterations");
  c.require(worst_joint < 300.0, "joint run took " + fmt(worst_joint) + " s >= 5 min");
  c.note("10 instances, max " + std::to_string(worst_iters) + " iterations, slowest joint run " +
         fmt(worst_joint) + " s");
  return c;
}

// --- criterion 7: trend reproduction -------------------------------------------

struct TrendCell {
  double mean = 0.0;
  int runs = 0;
};

TrendCell run_trend_cell(int s_size, double rho_bar, int num_seeds, std::vector<std::string>& errors) {
  std::vector<double> metric1(num_seeds, 0.0);
  std::vector<int> ok(num_seeds, 0);
  parallel_for(num_seeds, [&](int t) {
    try {
      ScenarioConfig cfg;
      cfg.rng_seed = 500 + static_cast<std::uint64_t>(t);
      cfg.load_limit = rho_bar;
      Scenario s = generate(cfg);

      ScalingProblem p;
      p.target_set = TargetSet(100, sample_target_group(100, s_size, cfg.rng_seed));
      p.epsilon = 1e-4;
      MaxAlphaResult base = solve_max_alpha(s.instance, s.baseline, p);
      if (!base.converged) throw std::runtime_error("baseline solve did not converge");
      JointResult joint = joint_optimize(s.instance, s.baseline, p);
      if (!joint.converged) throw std::runtime_error("joint solve did not converge");
      log_run(s.instance, joint);
      MetricBundle m = compute_metrics(base, joint, p.target_set, s.instance.demand);
      metric1[t] = m.alpha_improvement_pct;
      ok[t] = 1;
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lock(g_run_log_mutex);
      errors.push_back("seed " + std::to_string(500 + t) + ": " + e.what());
    }
  });
  TrendCell cell;
  for (int t = 0; t < num_seeds; ++t) {
    if (!ok[t]) continue;
    cell.mean += metric1[t];
    ++cell.runs;
  }
  if (cell.runs > 0) cell.mean /= cell.runs;
  return cell;
}

Check criterion_trends() {
  Check c;
  double t0 = now_seconds();
  int seeds = 20;
  if (const char* env = std::getenv("LOADSCALE_TREND_SEEDS")) seeds = std::max(1, std::atoi(env));
  std::vector<std::string> errors;

  const std::vector<int> s_grid{10, 20, 40, 60, 80, 100};
  std::vector<TrendCell> by_size;
  std::ostringstream size_means;
  for (int s : s_grid) {
    by_size.push_back(run_trend_cell(s, 1.0, seeds, errors));
    size_means << (by_size.size() > 1 ? " " : "") << fmt(by_size.back().mean);
  }
  for (size_t i = 0; i < by_size.size(); ++i) {
    c.require(by_size[i].runs == seeds, "failed runs in |S| cell " + std::to_string(s_grid[i]));
    c.require(by_size[i].mean > 0.0, "mean metric 1 not positive at |S| = " + std::to_string(s_grid[i]));
    if (i > 0)
      c.require(by_size[i].mean <= by_size[i - 1].mean,
                "metric 1 increased from |S| = " + std::to_string(s_grid[i - 1]) + " to " +
                    std::to_string(s_grid[i]));
  }

  const std::vector<double> rho_grid{0.4, 0.6, 0.8, 1.0};
  std::vector<TrendCell> by_rho;
  std::ostringstream rho_means;
  for (double rb : rho_grid) {
    by_rho.push_back(run_trend_cell(20, rb, seeds, errors));
    rho_means << (by_rho.size() > 1 ? " " : "") << fmt(by_rho.back().mean);
  }
  for (size_t i = 0; i < by_rho.size(); ++i) {
    c.require(by_rho[i].runs == seeds, "failed runs in rho_bar cell " + fmt(rho_grid[i]));
    if (i > 0)
      c.require(by_rho[i].mean >= by_rho[i - 1].mean,
                "metric 1 decreased from rho_bar " + fmt(rho_grid[i - 1]) + " to " + fmt(rho_grid[i]));
  }

  for (const std::string& e : errors) c.require(false, e);
  double elapsed = now_seconds() - t0;
  c.require(elapsed < 1800.0, "runtime " + fmt(elapsed) + " s >= 30 min");
  c.note(std::to_string(seeds) + " seeds; means over |S|: " + size_means.str() + "; over rho_bar: " +
         rho_means.str() + "; " + fmt(elapsed) + " s");
  return c;
}

// --- criterion 8: algorithm safety across the criterion 6-7 runs ----------------

Check criterion_safety() {
  Check c;
  std::lock_guard<std::mutex> lock(g_run_log_mutex);
  c.require(!g_run_log.empty(), "no runs recorded");
  double worst_drop = 0.0, worst_load = 0.0;
  for (const RunRecord& rec : g_run_log) {
    for (size_t h = 1; h < rec.alpha_history.size(); ++h)
      worst_drop = std::max(worst_drop, rec.alpha_history[h - 1] - rec.alpha_history[h]);
    worst_load = std::max(worst_load, rec.worst_load_ratio);
    c.require(rec.accepted_links <= rec.m * rec.n, "accepted links exceed m*n");
  }
  c.require(worst_drop <= 1e-3, "alpha dropped by " + fmt(worst_drop));
  c.require(worst_load <= 1.0 + 1e-3, "load ratio reached " + fmt(worst_load));
  c.note(std::to_string(g_run_log.size()) + " runs, worst alpha drop " + fmt(worst_drop) + ", worst load ratio " +
         fmt(worst_load));
  return c;
}

// --- criterion 9: S = J eigen consistency ---------------------------------------

Check criterion_eigen_consistency() {
  Check c;
  std::vector<double> eigen_gap(20, 0.0), metric_gap(20, 0.0);
  std::vector<std::string> errors(20);
  parallel_for(20, [&](int t) {
    try {
      std::mt19937_64 gen(6000 + t);
      NetworkInstance inst = ts::random_instance(gen(), 2 + static_cast<int>(gen() % 3), 3 + static_cast<int>(gen() % 3));
      Association assoc = best_rrh_association(inst);
      TargetSet all = TargetSet::all(inst.num_ues);

      ScalingProblem p;
      p.target_set = all;
      p.epsilon = 1e-10;
      MaxAlphaResult r = solve_max_alpha(inst, assoc, p, 500000);
      if (!r.converged) throw std::runtime_error("solver did not converge");
      Allocation f = interference_map(inst, assoc, r.mu_star);
      for (int j = 0; j < inst.num_ues; ++j)
        eigen_gap[t] = std::max(eigen_gap[t],
                                std::abs(f[j] - r.mu_star[j] / r.alpha_star) / (r.mu_star[j] / r.alpha_star));

      ScalingProblem pj = p;
      pj.epsilon = 1e-6;
      MaxAlphaResult base = solve_max_alpha(inst, assoc, pj);
      JointOptions opts;
      JointResult joint = joint_optimize(inst, assoc, pj, opts);
      MetricBundle m = compute_metrics(base, joint, all, inst.demand);
      metric_gap[t] = std::abs(m.alpha_improvement_pct - m.delivered_demand_increase_pct);
    } catch (const std::exception& e) {
      errors[t] = e.what();
    }
  });
  double worst_eigen = 0.0, worst_metric = 0.0;
  for (int t = 0; t < 20; ++t) {
    c.require(errors[t].empty(), "instance " + std::to_string(t) + ": " + errors[t]);
    worst_eigen = std::max(worst_eigen, eigen_gap[t]);
    worst_metric = std::max(worst_metric, metric_gap[t]);
  }
  c.require(worst_eigen <= 1e-6, "eigen relation off by " + fmt(worst_eigen) + " relative");
  c.require(worst_metric <= 1e-9, "metric 1 vs metric 3 gap " + fmt(worst_metric));
  c.note("20 instances, worst eigen gap " + fmt(worst_eigen) + ", worst metric gap " + fmt(worst_metric));
  return c;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    Check (*run)();
  };
  const Criterion criteria[] = {
      {1, "gadget golden values", criterion_gadget_golden},
      {2, "oracle equivalence", criterion_oracle_equivalence},
      {3, "optimality conditions", criterion_optimality_conditions},
      {4, "SIF axiom properties", criterion_sif_axioms},
      {5, "fixed-point uniqueness", criterion_uniqueness},
      {6, "convergence budget", criterion_convergence_budget},
      {7, "trend reproduction", criterion_trends},
      {8, "algorithm safety", criterion_safety},
      {9, "S = J eigen consistency", criterion_eigen_consistency},
  };

  bool all_pass = true;
  for (const Criterion& cr : criteria) {
    Check c;
    try {
      c = cr.run();
    } catch (const std::exception& e) {
      c.pass = false;
      c.note(std::string("unhandled: ") + e.what());
    }
    all_pass = all_pass && c.pass;
    std::printf("[%s] criterion %d: %s (%s)\n", c.pass ? "PASS" : "FAIL", cr.id, cr.name, c.detail.str().c_str());
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}
