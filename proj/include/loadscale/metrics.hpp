#pragma once

// Evaluation metrics of a joint run against the non-CoMP baseline, and the
// seeded sweep harness over target-group sizes and load limits that emits
// per-run CSV rows plus per-cell aggregates.

#include <array>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <ostream>
#include <thread>

#include "comp.hpp"
#include "network.hpp"
#include "scenario.hpp"
#include "solver.hpp"

namespace loadscale {

struct MetricBundle {
  double alpha_improvement_pct = 0.0;          // metric 1
  int num_comp_ues = 0;                        // metric 2, |J_CoMP|
  double delivered_demand_increase_pct = 0.0;  // metric 3
  int num_comp_ues_in_s = 0;                   // metric 4, |J_CoMP ∩ S|
};

inline void to_json(nlohmann::json& j, const MetricBundle& m) {
  j = nlohmann::json{{"alpha_improvement_pct", m.alpha_improvement_pct},
                     {"num_comp_ues", m.num_comp_ues},
                     {"delivered_demand_increase_pct", m.delivered_demand_increase_pct},
                     {"num_comp_ues_in_s", m.num_comp_ues_in_s}};
}

// Total delivered demand when the target group is scaled by alpha.
inline double scaled_delivered_demand(const std::vector<double>& demand, const TargetSet& target, double alpha) {
  double total = 0.0;
  for (size_t j = 0; j < demand.size(); ++j) total += (target.contains(static_cast<int>(j)) ? alpha : 1.0) * demand[j];
  return total;
}

inline MetricBundle compute_metrics(const MaxAlphaResult& baseline, const JointResult& joint,
                                    const TargetSet& target, const std::vector<double>& demand) {
  if (static_cast<int>(demand.size()) != target.num_ues() ||
      joint.kappa_star.num_ues() != target.num_ues())
    throw std::invalid_argument("metrics inputs sized for different instances");
  MetricBundle m;
  m.alpha_improvement_pct = 100.0 * (joint.alpha_star - baseline.alpha_star) / baseline.alpha_star;
  m.num_comp_ues = joint.kappa_star.comp_ue_count();
  for (int j : target.indices())
    if (joint.kappa_star.serving_rrhs(j).size() >= 2) ++m.num_comp_ues_in_s;
  double base = scaled_delivered_demand(demand, target, baseline.alpha_star);
  double with_comp = scaled_delivered_demand(demand, target, joint.alpha_star);
  m.delivered_demand_increase_pct = 100.0 * (with_comp - base) / base;
  return m;
}

struct SweepConfig {
  ScenarioConfig scenario;                          // template; load_limit and seed vary per run
  std::vector<int> s_sizes = {10, 20, 40, 60, 80, 100};
  std::vector<double> rho_bars = {0.4, 0.6, 0.8, 1.0};
  int num_seeds = 5;
  std::uint64_t seed0 = 1;
  double epsilon = 1e-4;
  int max_iters = kDefaultMaxIters;
  int max_passes = 0;
  int threads = 0;       // 0 or 1: sequential
  bool keep_traces = false;  // retain each run's baseline solve trace
};

struct SweepRow {
  std::uint64_t seed = 0;
  int s_size = 0;
  double rho_bar = 0.0;
  MetricBundle metrics;
  std::int64_t iterations = 0;  // baseline solve + joint solver + admission sequences
  double wall_seconds = 0.0;
  bool ok = false;
  std::string error;
  double alpha_base = 0.0;
  double alpha_joint = 0.0;
  int accepted_links = 0;
  IterationTrace baseline_trace;  // populated only with keep_traces
};

// Per-cell aggregates; the count metrics average to fractional values.
struct CellStats {
  int s_size = 0;
  double rho_bar = 0.0;
  int num_runs = 0;
  int failures = 0;
  std::array<double, 4> mean{};    // metrics 1..4
  std::array<double, 4> stddev{};  // population stddev
};

struct SweepResult {
  std::vector<SweepRow> rows;     // (seed, |S|, rho_bar) order, seeds outermost
  std::vector<CellStats> cells;   // (|S|, rho_bar) in config order
  int failures = 0;
};

// Target group: the first s entries of a per-seed random permutation, so each
// size is a uniform without-replacement draw and sizes are nested per seed.
inline std::vector<int> sample_target_group(int num_ues, int s, std::uint64_t seed) {
  Rng rng(seed * 0x9E3779B97F4A7C15ULL + 0xA5A5A5A5ULL);
  std::vector<int> perm = rng.permutation(num_ues);
  std::vector<int> out(perm.begin(), perm.begin() + s);
  std::sort(out.begin(), out.end());
  return out;
}

namespace detail {

inline SweepRow run_sweep_cell(const SweepConfig& cfg, std::uint64_t seed, int s_size, double rho_bar) {
  SweepRow row;
  row.seed = seed;
  row.s_size = s_size;
  row.rho_bar = rho_bar;
  auto t0 = std::chrono::steady_clock::now();
  try {
    ScenarioConfig sc = cfg.scenario;
    sc.rng_seed = seed;
    sc.load_limit = rho_bar;
    sc.epsilon = cfg.epsilon;
    sc.max_iters = cfg.max_iters;
    Scenario scen = generate(sc);

    ScalingProblem problem;
    problem.target_set = TargetSet(sc.num_ues, sample_target_group(sc.num_ues, s_size, seed));
    problem.epsilon = cfg.epsilon;

    MaxAlphaResult base = solve_max_alpha(scen.instance, scen.baseline, problem, cfg.max_iters);
    if (!base.converged) throw NonConvergentError("baseline solve did not converge");
    if (cfg.keep_traces) row.baseline_trace = base.trace;

    JointOptions jopts;
    jopts.max_iters = cfg.max_iters;
    jopts.max_passes = cfg.max_passes;
    JointResult joint = joint_optimize(scen.instance, scen.baseline, problem, jopts);
    if (!joint.converged) throw NonConvergentError("joint optimization solve did not converge");

    row.metrics = compute_metrics(base, joint, problem.target_set, scen.instance.demand);
    row.iterations = base.iterations + joint.solver_iterations + joint.sequence_iterations;
    row.alpha_base = base.alpha_star;
    row.alpha_joint = joint.alpha_star;
    row.accepted_links = static_cast<int>(joint.accepted_links.size());
    row.ok = true;
  } catch (const std::exception& e) {
    row.ok = false;
    row.error = e.what();
  }
  row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

}  // namespace detail

// Runs the full (seed x |S| x rho_bar) grid. Rows are computed independently
// (optionally in parallel) and merged in deterministic order, so the output
// does not depend on the thread count. Failed runs are kept as rows with
// ok = false and excluded from the cell aggregates.
inline SweepResult sweep(const SweepConfig& cfg) {
  if (cfg.s_sizes.empty() || cfg.rho_bars.empty() || cfg.num_seeds <= 0)
    throw std::invalid_argument("sweep grid must be non-empty");
  for (int s : cfg.s_sizes)
    if (s <= 0 || s > cfg.scenario.num_ues) throw std::invalid_argument("target group size out of range");

  struct Job {
    std::uint64_t seed;
    int s_size;
    double rho_bar;
  };
  std::vector<Job> jobs;
  for (int t = 0; t < cfg.num_seeds; ++t)
    for (int s : cfg.s_sizes)
      for (double rb : cfg.rho_bars) jobs.push_back({cfg.seed0 + static_cast<std::uint64_t>(t), s, rb});

  SweepResult result;
  result.rows.resize(jobs.size());
  int workers = cfg.threads;
  if (workers <= 1) {
    for (size_t idx = 0; idx < jobs.size(); ++idx)
      result.rows[idx] = detail::run_sweep_cell(cfg, jobs[idx].seed, jobs[idx].s_size, jobs[idx].rho_bar);
  } else {
    std::atomic<size_t> next{0};
    auto worker = [&] {
      for (;;) {
        size_t idx = next.fetch_add(1);
        if (idx >= jobs.size()) return;
        result.rows[idx] = detail::run_sweep_cell(cfg, jobs[idx].seed, jobs[idx].s_size, jobs[idx].rho_bar);
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (int s : cfg.s_sizes) {
    for (double rb : cfg.rho_bars) {
      CellStats cell;
      cell.s_size = s;
      cell.rho_bar = rb;
      std::vector<const MetricBundle*> ms;
      for (const SweepRow& row : result.rows) {
        if (row.s_size != s || row.rho_bar != rb) continue;
        if (!row.ok) {
          ++cell.failures;
          continue;
        }
        ms.push_back(&row.metrics);
      }
      cell.num_runs = static_cast<int>(ms.size());
      if (!ms.empty()) {
        auto values = [&](int metric) {
          std::vector<double> v;
          for (auto* m : ms) {
            switch (metric) {
              case 0: v.push_back(m->alpha_improvement_pct); break;
              case 1: v.push_back(m->num_comp_ues); break;
              case 2: v.push_back(m->delivered_demand_increase_pct); break;
              default: v.push_back(m->num_comp_ues_in_s); break;
            }
          }
          return v;
        };
        for (int metric = 0; metric < 4; ++metric) {
          std::vector<double> v = values(metric);
          double sum = 0.0;
          for (double x : v) sum += x;
          double mean = sum / v.size();
          double var = 0.0;
          for (double x : v) var += (x - mean) * (x - mean);
          cell.mean[metric] = mean;
          cell.stddev[metric] = std::sqrt(var / v.size());
        }
      }
      result.failures += cell.failures;
      result.cells.push_back(cell);
    }
  }
  return result;
}

inline void write_sweep_csv(const SweepResult& r, std::ostream& os) {
  os << "seed,s_size,rho_bar,alpha_improvement_pct,num_comp_ues,delivered_demand_increase_pct,"
        "num_comp_ues_in_s,iterations,wall_seconds,ok,error\n";
  auto num = [](double v) { return format_double(v); };
  for (const SweepRow& row : r.rows) {
    os << row.seed << ',' << row.s_size << ',' << num(row.rho_bar) << ',' << num(row.metrics.alpha_improvement_pct)
       << ',' << row.metrics.num_comp_ues << ',' << num(row.metrics.delivered_demand_increase_pct) << ','
       << row.metrics.num_comp_ues_in_s << ',' << row.iterations << ',' << num(row.wall_seconds) << ','
       << (row.ok ? 1 : 0) << ',' << row.error << '\n';
  }
}

// Aggregate summary. Deliberately timing-free: identical config and seed
// list yield byte-identical output.
inline nlohmann::json sweep_summary(const SweepResult& r) {
  auto bundle = [](const std::array<double, 4>& v) {
    return nlohmann::json{{"alpha_improvement_pct", v[0]},
                          {"num_comp_ues", v[1]},
                          {"delivered_demand_increase_pct", v[2]},
                          {"num_comp_ues_in_s", v[3]}};
  };
  nlohmann::json cells = nlohmann::json::array();
  for (const CellStats& c : r.cells) {
    cells.push_back(nlohmann::json{{"s_size", c.s_size},
                                   {"rho_bar", c.rho_bar},
                                   {"num_runs", c.num_runs},
                                   {"failures", c.failures},
                                   {"mean", bundle(c.mean)},
                                   {"stddev", bundle(c.stddev)}});
  }
  return nlohmann::json{{"failures_total", r.failures}, {"cells", cells}};
}

}  // namespace loadscale
