// Batch front end for the load-coupled C-RAN demand-scaling library.
//
// Subcommands: generate | solve | joint | sweep | gadget. Structured outputs
// are JSON, tabular outputs CSV. All randomness flows from explicit seeds.
// UE and RRH indices are 0-based in every file and flag.
//
// Exit codes: 0 success, 2 infeasible result (alpha* < 1, outputs still
// written), 1 any other error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "loadscale/loadscale.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

void write_text_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_json_file(const fs::path& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

struct InstanceFile {
  loadscale::NetworkInstance instance;
  std::optional<loadscale::Association> kappa;
};

InstanceFile read_instance_file(const std::string& path) {
  json j = load_json_file(path);
  InstanceFile f;
  f.instance = j.get<loadscale::NetworkInstance>();
  if (j.contains("kappa"))
    f.kappa = loadscale::association_from_json(j.at("kappa"), f.instance.num_rrhs, f.instance.num_ues);
  return f;
}

// Shared scenario/problem flags; --config supplies a ScenarioConfig JSON that
// individual flags override.
struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> rho_bar;
  std::optional<double> epsilon;
  std::optional<int> max_iters;
  std::string out_dir = ".";

  loadscale::ScenarioConfig scenario() const {
    loadscale::ScenarioConfig cfg;
    if (!config_path.empty()) cfg = load_json_file(config_path).get<loadscale::ScenarioConfig>();
    if (seed) cfg.rng_seed = *seed;
    if (rho_bar) cfg.load_limit = *rho_bar;
    if (epsilon) cfg.epsilon = *epsilon;
    if (max_iters) cfg.max_iters = *max_iters;
    return cfg;
  }
};

void add_common_flags(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "scenario config JSON file");
  cmd->add_option("--seed", opts.seed, "RNG seed");
  cmd->add_option("--rho-bar", opts.rho_bar, "per-RRH load limit in (0, 1]");
  cmd->add_option("--epsilon", opts.epsilon, "convergence tolerance");
  cmd->add_option("--max-iters", opts.max_iters, "iteration cap per solve");
  cmd->add_option("--out", opts.out_dir, "output directory");
}

// Explicit --s-list wins over --s-size (sampled with --s-seed, defaulting to
// the run seed). With neither, the whole UE set is scaled.
struct TargetOpts {
  std::vector<int> s_list;
  std::optional<int> s_size;
  std::optional<std::uint64_t> s_seed;

  loadscale::TargetSet resolve(int num_ues, std::uint64_t fallback_seed) const {
    if (!s_list.empty()) return loadscale::TargetSet(num_ues, s_list);
    if (s_size) {
      std::uint64_t seed = s_seed.value_or(fallback_seed);
      return loadscale::TargetSet(num_ues, loadscale::sample_target_group(num_ues, *s_size, seed));
    }
    return loadscale::TargetSet::all(num_ues);
  }
};

void add_target_flags(CLI::App* cmd, TargetOpts& opts) {
  cmd->add_option("--s-list", opts.s_list, "explicit target UE indices (0-based)")->delimiter(',');
  cmd->add_option("--s-size", opts.s_size, "target group size, sampled uniformly");
  cmd->add_option("--s-seed", opts.s_seed, "seed for the target group draw");
}

json target_set_json(const loadscale::TargetSet& s) { return json(s.indices()); }

int cmd_generate(const CommonOpts& common, bool no_calibrate) {
  loadscale::ScenarioConfig cfg = common.scenario();
  loadscale::Scenario scen = no_calibrate ? loadscale::sample_scenario(cfg) : loadscale::generate(cfg);
  fs::path out(common.out_dir);
  write_json_file(out / "instance.json", loadscale::instance_document(scen.instance, &scen.baseline));
  write_json_file(out / "scenario.json", loadscale::scenario_sidecar(scen));
  std::cout << "wrote " << (out / "instance.json").string() << " and scenario.json (seed " << cfg.rng_seed << ")\n";
  return kExitOk;
}

int cmd_solve(const CommonOpts& common, const TargetOpts& target, const std::string& input, bool trace) {
  InstanceFile file = read_instance_file(input);
  loadscale::Association assoc = file.kappa ? *file.kappa : loadscale::best_rrh_association(file.instance);

  loadscale::ScalingProblem problem;
  problem.target_set = target.resolve(file.instance.num_ues, common.seed.value_or(1));
  problem.epsilon = common.epsilon.value_or(1e-4);
  loadscale::MaxAlphaResult res =
      solve_max_alpha(file.instance, assoc, problem, common.max_iters.value_or(loadscale::kDefaultMaxIters));

  fs::path out(common.out_dir);
  json doc = res;
  doc["target_set"] = target_set_json(problem.target_set);
  doc["feasible"] = res.feasible();
  if (!trace) doc.erase("trace");
  write_json_file(out / "result.json", doc);
  if (trace) {
    std::ofstream csv(out / "trace.csv");
    res.trace.write_csv(csv);
  }
  if (!res.converged) {
    int tail = std::max(0, static_cast<int>(res.trace.steps.size()) - 5);
    std::cerr << "solve did not converge; residual tail:";
    for (size_t i = tail; i < res.trace.steps.size(); ++i) std::cerr << ' ' << res.trace.steps[i].residual;
    std::cerr << '\n';
    return kExitError;
  }
  std::cout << "alpha_star " << res.alpha_star << " in " << res.iterations << " iterations\n";
  return res.feasible() ? kExitOk : kExitInfeasible;
}

int cmd_joint(const CommonOpts& common, const TargetOpts& target, const std::string& input, int max_passes,
              const std::string& order, bool trace) {
  InstanceFile file = read_instance_file(input);
  loadscale::Association baseline = loadscale::best_rrh_association(file.instance);
  loadscale::Association kappa0 = file.kappa ? *file.kappa : baseline;

  loadscale::ScalingProblem problem;
  problem.target_set = target.resolve(file.instance.num_ues, common.seed.value_or(1));
  problem.epsilon = common.epsilon.value_or(1e-4);

  loadscale::JointOptions opts;
  opts.max_iters = common.max_iters.value_or(loadscale::kDefaultMaxIters);
  opts.max_passes = max_passes;
  opts.order = order == "by-gain" ? loadscale::CandidateOrder::kByGainDescending
                                  : loadscale::CandidateOrder::kRowMajor;

  loadscale::MaxAlphaResult base = solve_max_alpha(file.instance, baseline, problem, opts.max_iters);
  loadscale::JointResult joint = joint_optimize(file.instance, kappa0, problem, opts);
  loadscale::MetricBundle metrics = compute_metrics(base, joint, problem.target_set, file.instance.demand);

  fs::path out(common.out_dir);
  json jdoc = joint;
  jdoc["target_set"] = target_set_json(problem.target_set);
  write_json_file(out / "joint.json", jdoc);
  write_json_file(out / "metrics.json", json(metrics));
  if (trace) {
    loadscale::MaxAlphaResult final_solve = solve_max_alpha(file.instance, joint.kappa_star, problem, opts.max_iters);
    std::ofstream csv(out / "trace.csv");
    final_solve.trace.write_csv(csv);
  }
  std::cout << "alpha " << base.alpha_star << " -> " << joint.alpha_star << " with "
            << joint.accepted_links.size() << " CoMP links over " << joint.passes << " passes\n";
  return joint.alpha_star >= 1.0 ? kExitOk : kExitInfeasible;
}

int cmd_sweep(const CommonOpts& common, std::vector<int> s_sizes, std::vector<double> rho_bars, int num_seeds,
              int max_passes, bool trace) {
  loadscale::SweepConfig cfg;
  cfg.scenario = common.scenario();
  if (!s_sizes.empty()) cfg.s_sizes = std::move(s_sizes);
  if (!rho_bars.empty()) cfg.rho_bars = std::move(rho_bars);
  cfg.num_seeds = num_seeds;
  cfg.seed0 = common.seed.value_or(1);
  cfg.epsilon = common.epsilon.value_or(1e-4);
  cfg.max_iters = common.max_iters.value_or(loadscale::kDefaultMaxIters);
  cfg.max_passes = max_passes;
  cfg.keep_traces = trace;
  if (const char* env = std::getenv("CRAN_LOADSCALE_THREADS"))
    cfg.threads = std::atoi(env);
  else
    cfg.threads = static_cast<int>(std::thread::hardware_concurrency());

  loadscale::SweepResult res = loadscale::sweep(cfg);
  fs::path out(common.out_dir);
  std::ostringstream csv;
  write_sweep_csv(res, csv);
  write_text_file(out / "sweep.csv", csv.str());
  write_json_file(out / "summary.json", loadscale::sweep_summary(res));
  if (trace) {
    fs::create_directories(out / "traces");
    char name[96];
    for (const loadscale::SweepRow& row : res.rows) {
      if (!row.ok) continue;
      std::snprintf(name, sizeof(name), "trace_seed%llu_s%d_rho%g.csv",
                    static_cast<unsigned long long>(row.seed), row.s_size, row.rho_bar);
      std::ofstream tf(out / "traces" / name);
      row.baseline_trace.write_csv(tf);
    }
  }
  std::cout << res.rows.size() << " runs, " << res.failures << " failures; wrote sweep.csv and summary.json\n";
  return kExitOk;
}

int cmd_gadget(const CommonOpts& common, const std::string& formula_path) {
  std::ifstream in(formula_path);
  if (!in) throw std::runtime_error("cannot open " + formula_path);
  std::stringstream buf;
  buf << in.rdbuf();
  loadscale::SatFormula formula = loadscale::parse_sat_formula(buf.str());
  loadscale::SatGadget gadget = loadscale::gadget_from_sat(formula);
  fs::path out(common.out_dir);
  write_json_file(out / "gadget.json", loadscale::gadget_document(gadget));
  std::cout << "gadget with " << gadget.instance.num_ues << " UEs and " << gadget.instance.num_rrhs
            << " RRHs (" << gadget.num_vars << " vars, " << gadget.num_clauses << " clauses)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"load-coupled C-RAN demand scaling: scenario generation, solving, CoMP selection, sweeps"};
  app.require_subcommand(1);

  CommonOpts common;
  TargetOpts target;
  std::string input;
  std::string formula_path;
  std::string order = "row-major";
  std::vector<int> s_sizes;
  std::vector<double> rho_bars;
  int num_seeds = 5;
  int max_passes = 0;
  bool trace = false;
  bool no_calibrate = false;

  CLI::App* generate = app.add_subcommand("generate", "sample a calibrated scenario");
  add_common_flags(generate, common);
  generate->add_flag("--no-calibrate", no_calibrate, "skip demand calibration");

  CLI::App* solve = app.add_subcommand("solve", "max demand scaling under a fixed association");
  add_common_flags(solve, common);
  add_target_flags(solve, target);
  solve->add_option("--in", input, "instance JSON (with optional kappa)")->required();
  solve->add_flag("--trace", trace, "also write the iteration trace");

  CLI::App* joint = app.add_subcommand("joint", "joint CoMP selection and demand scaling");
  add_common_flags(joint, common);
  add_target_flags(joint, target);
  joint->add_option("--in", input, "instance JSON (optional kappa becomes the starting association)")->required();
  joint->add_option("--max-passes", max_passes, "pass cap (0: until no link is accepted)");
  joint->add_option("--order", order, "candidate order: row-major | by-gain")
      ->check(CLI::IsMember({"row-major", "by-gain"}));
  joint->add_flag("--trace", trace, "write the final solve's iteration trace");

  CLI::App* sweep = app.add_subcommand("sweep", "seeded grid over |S| and rho_bar");
  add_common_flags(sweep, common);
  sweep->add_option("--s-sizes", s_sizes, "target group sizes")->delimiter(',');
  sweep->add_option("--rho-bars", rho_bars, "load limits")->delimiter(',');
  sweep->add_option("--seeds", num_seeds, "number of seeds (first is --seed)");
  sweep->add_option("--max-passes", max_passes, "pass cap per joint run");
  sweep->add_flag("--trace", trace, "write each run's baseline solve trace under traces/");

  CLI::App* gadget = app.add_subcommand("gadget", "3-SAT reduction instance from a formula file");
  add_common_flags(gadget, common);
  gadget->add_option("--formula", formula_path, "one clause per line, signed integers")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return cmd_generate(common, no_calibrate);
    if (solve->parsed()) return cmd_solve(common, target, input, trace);
    if (joint->parsed()) return cmd_joint(common, target, input, max_passes, order, trace);
    if (sweep->parsed()) return cmd_sweep(common, s_sizes, rho_bars, num_seeds, max_passes, trace);
    if (gadget->parsed()) return cmd_gadget(common, formula_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
