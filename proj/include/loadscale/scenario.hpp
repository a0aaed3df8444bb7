#pragma once

// Deterministic scenario generation for the hexagonal-cell simulation setup
// (COST-231-Hata path loss, log-normal shadowing, Rayleigh flat fading),
// demand calibration against the non-CoMP baseline, and construction of the
// 3-SAT reduction instances used as exact-arithmetic test fixtures.

#include <array>
#include <cstdint>
#include <random>
#include <sstream>

#include "comp.hpp"
#include "network.hpp"
#include "solver.hpp"

namespace loadscale {

class NonConvergentError : public std::runtime_error {
 public:
  explicit NonConvergentError(const std::string& what) : std::runtime_error(what) {}
};

// Deterministic draws on top of mt19937_64. The transforms are hand-rolled
// (not std::*_distribution) so a seed produces identical streams on every
// platform; each helper consumes a fixed number of engine outputs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // in [0, 1)
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller, two engine outputs per draw
  double normal(double mean, double sigma) {
    double u1 = 1.0 - uniform01();  // (0, 1]
    double u2 = uniform01();
    return mean + sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // unit-mean exponential
  double exponential() { return -std::log1p(-uniform01()); }

  // Fisher-Yates permutation of 0..n-1
  std::vector<int> permutation(int n) {
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    for (int i = n - 1; i > 0; --i) {
      int j = static_cast<int>(gen_() % static_cast<std::uint64_t>(i + 1));
      std::swap(p[i], p[j]);
    }
    return p;
  }

 private:
  std::mt19937_64 gen_;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Flat-top hexagon with circumradius r, centered at the origin.
inline bool in_hexagon(const Point& p, double r) {
  const double s3 = std::sqrt(3.0);
  return std::abs(p.y) <= s3 * r / 2.0 && s3 * std::abs(p.x) + std::abs(p.y) <= s3 * r;
}

inline Point sample_hexagon(Rng& rng, double r) {
  const double s3 = std::sqrt(3.0);
  for (;;) {
    Point p{rng.uniform(-r, r), rng.uniform(-s3 * r / 2.0, s3 * r / 2.0)};
    if (in_hexagon(p, r)) return p;
  }
}

// COST-231-Hata median path loss in dB (urban, mobile-height correction for
// medium cities; city_correction_db = 3 for metropolitan areas).
inline double cost231_hata_path_loss_db(double freq_mhz, double bs_height_m, double ue_height_m, double dist_km,
                                        double city_correction_db = 0.0) {
  double lf = std::log10(freq_mhz);
  double a_hm = (1.1 * lf - 0.7) * ue_height_m - (1.56 * lf - 0.8);
  return 46.3 + 33.9 * lf - 13.82 * std::log10(bs_height_m) - a_hm +
         (44.9 - 6.55 * std::log10(bs_height_m)) * std::log10(dist_km) + city_correction_db;
}

struct ScenarioConfig {
  double hexagon_radius = 500.0;    // m, center to vertex
  double carrier_freq_mhz = 2000.0;
  int num_ues = 100;
  int num_rrhs = 10;
  double shadowing_sigma_db = 3.0;
  double noise_psd_dbm_hz = -173.0;
  double rb_bandwidth = 180e3;      // Hz
  double total_bandwidth = 20e6;    // Hz, sets num_rbs when num_rbs == 0
  int num_rbs = 0;
  double power_per_rb_mw = 400.0;
  double load_limit = 1.0;
  std::uint64_t rng_seed = 1;

  // path-loss model knobs (canonical urban defaults)
  double bs_height_m = 30.0;
  double ue_height_m = 1.5;
  double city_correction_db = 0.0;
  double min_link_distance = 10.0;  // m, Hata is invalid as d -> 0

  // relative demand spread before calibration
  double demand_low = 0.5;
  double demand_high = 1.5;

  double epsilon = 1e-4;  // calibration solve tolerance
  int max_iters = kDefaultMaxIters;

  int resolved_num_rbs() const {
    return num_rbs > 0 ? num_rbs : static_cast<int>(total_bandwidth / rb_bandwidth);
  }

  void validate() const {
    if (!(hexagon_radius > 0) || !(carrier_freq_mhz > 0) || !(rb_bandwidth > 0) || !(power_per_rb_mw > 0) ||
        !(shadowing_sigma_db >= 0) || !(bs_height_m > 0) || !(ue_height_m > 0) || !(min_link_distance > 0))
      throw std::invalid_argument("scenario config: physical quantities must be positive");
    if (num_ues <= 0 || num_rrhs <= 0) throw std::invalid_argument("scenario config: need UEs and RRHs");
    if (resolved_num_rbs() <= 0) throw std::invalid_argument("scenario config: RB count must be positive");
    if (!(load_limit > 0) || load_limit > 1.0) throw std::invalid_argument("scenario config: load_limit in (0, 1]");
    if (!(demand_low > 0) || !(demand_high >= demand_low))
      throw std::invalid_argument("scenario config: bad demand spread");
    if (!(epsilon > 0)) throw std::invalid_argument("scenario config: epsilon must be > 0");
  }
};

inline void to_json(nlohmann::json& j, const ScenarioConfig& c) {
  j = nlohmann::json{{"hexagon_radius", c.hexagon_radius},
                     {"carrier_freq_mhz", c.carrier_freq_mhz},
                     {"num_ues", c.num_ues},
                     {"num_rrhs", c.num_rrhs},
                     {"shadowing_sigma_db", c.shadowing_sigma_db},
                     {"noise_psd_dbm_hz", c.noise_psd_dbm_hz},
                     {"rb_bandwidth", c.rb_bandwidth},
                     {"total_bandwidth", c.total_bandwidth},
                     {"num_rbs", c.num_rbs},
                     {"power_per_rb_mw", c.power_per_rb_mw},
                     {"load_limit", c.load_limit},
                     {"rng_seed", c.rng_seed},
                     {"bs_height_m", c.bs_height_m},
                     {"ue_height_m", c.ue_height_m},
                     {"city_correction_db", c.city_correction_db},
                     {"min_link_distance", c.min_link_distance},
                     {"demand_low", c.demand_low},
                     {"demand_high", c.demand_high},
                     {"epsilon", c.epsilon},
                     {"max_iters", c.max_iters}};
}

inline void from_json(const nlohmann::json& j, ScenarioConfig& c) {
  ScenarioConfig def;
  auto get = [&](const char* key, auto& field, const auto& fallback) {
    field = j.value(key, fallback);
  };
  get("hexagon_radius", c.hexagon_radius, def.hexagon_radius);
  get("carrier_freq_mhz", c.carrier_freq_mhz, def.carrier_freq_mhz);
  get("num_ues", c.num_ues, def.num_ues);
  get("num_rrhs", c.num_rrhs, def.num_rrhs);
  get("shadowing_sigma_db", c.shadowing_sigma_db, def.shadowing_sigma_db);
  get("noise_psd_dbm_hz", c.noise_psd_dbm_hz, def.noise_psd_dbm_hz);
  get("rb_bandwidth", c.rb_bandwidth, def.rb_bandwidth);
  get("total_bandwidth", c.total_bandwidth, def.total_bandwidth);
  get("num_rbs", c.num_rbs, def.num_rbs);
  get("power_per_rb_mw", c.power_per_rb_mw, def.power_per_rb_mw);
  get("load_limit", c.load_limit, def.load_limit);
  get("rng_seed", c.rng_seed, def.rng_seed);
  get("bs_height_m", c.bs_height_m, def.bs_height_m);
  get("ue_height_m", c.ue_height_m, def.ue_height_m);
  get("city_correction_db", c.city_correction_db, def.city_correction_db);
  get("min_link_distance", c.min_link_distance, def.min_link_distance);
  get("demand_low", c.demand_low, def.demand_low);
  get("demand_high", c.demand_high, def.demand_high);
  get("epsilon", c.epsilon, def.epsilon);
  get("max_iters", c.max_iters, def.max_iters);
}

struct Scenario {
  NetworkInstance instance;
  Association baseline;  // best-RRH, non-CoMP
  std::vector<Point> rrh_positions;
  std::vector<Point> ue_positions;
  ScenarioConfig config;
};

// Reproducibility sidecar: seed, config echo, and the sampled layout.
inline nlohmann::json scenario_sidecar(const Scenario& s) {
  auto points = [](const std::vector<Point>& ps) {
    nlohmann::json a = nlohmann::json::array();
    for (const Point& p : ps) a.push_back({p.x, p.y});
    return a;
  };
  return nlohmann::json{{"seed", s.config.rng_seed},
                        {"config", s.config},
                        {"rrh_positions", points(s.rrh_positions)},
                        {"ue_positions", points(s.ue_positions)}};
}

// Samples an uncalibrated instance. Draw order is fixed (RRH positions, UE
// positions, then per-link shadowing+fading RRH-major, then demand weights),
// so the result is a pure function of the config including the seed.
inline Scenario sample_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.rng_seed);

  Scenario s;
  s.config = cfg;
  for (int i = 0; i < cfg.num_rrhs; ++i) s.rrh_positions.push_back(sample_hexagon(rng, cfg.hexagon_radius));
  for (int j = 0; j < cfg.num_ues; ++j) s.ue_positions.push_back(sample_hexagon(rng, cfg.hexagon_radius));

  NetworkInstance& inst = s.instance;
  inst.num_rrhs = cfg.num_rrhs;
  inst.num_ues = cfg.num_ues;
  inst.power.assign(cfg.num_rrhs, cfg.power_per_rb_mw * 1e-3);
  inst.amp_gain = Matrix(cfg.num_rrhs, cfg.num_ues);
  inst.noise_power = std::pow(10.0, (cfg.noise_psd_dbm_hz - 30.0) / 10.0) * cfg.rb_bandwidth;
  inst.num_rbs = cfg.resolved_num_rbs();
  inst.rb_bandwidth = cfg.rb_bandwidth;
  inst.load_limit = cfg.load_limit;

  for (int i = 0; i < cfg.num_rrhs; ++i) {
    for (int j = 0; j < cfg.num_ues; ++j) {
      double dx = s.rrh_positions[i].x - s.ue_positions[j].x;
      double dy = s.rrh_positions[i].y - s.ue_positions[j].y;
      double dist = std::max(std::hypot(dx, dy), cfg.min_link_distance);
      double pl = cost231_hata_path_loss_db(cfg.carrier_freq_mhz, cfg.bs_height_m, cfg.ue_height_m, dist / 1000.0,
                                            cfg.city_correction_db);
      double gain_db = -pl + rng.normal(0.0, cfg.shadowing_sigma_db);
      double power_gain = std::pow(10.0, gain_db / 10.0) * rng.exponential();
      inst.amp_gain(i, j) = std::sqrt(power_gain);
    }
  }

  inst.demand.resize(cfg.num_ues);
  for (int j = 0; j < cfg.num_ues; ++j) inst.demand[j] = rng.uniform(cfg.demand_low, cfg.demand_high) * 1e6;

  inst.validate();
  s.baseline = best_rrh_association(inst);
  return s;
}

// Scales all demands so the baseline (non-CoMP, whole-UE-set) solve lands at
// alpha = 1 exactly, i.e. the baseline fixed point has max RRH load rho_bar.
inline NetworkInstance calibrate_demand(const NetworkInstance& inst, const Association& baseline, double epsilon,
                                        int max_iters = kDefaultMaxIters) {
  ScalingProblem p;
  p.target_set = TargetSet::all(inst.num_ues);
  p.epsilon = epsilon;
  MaxAlphaResult r = solve_max_alpha(inst, baseline, p, max_iters);
  if (!r.converged) throw NonConvergentError("calibration solve did not converge");
  NetworkInstance out = inst;
  for (double& d : out.demand) d *= r.alpha_star;
  return out;
}

// Full generation: sample, derive the best-RRH baseline, calibrate demands.
inline Scenario generate(const ScenarioConfig& cfg) {
  Scenario s = sample_scenario(cfg);
  s.instance = calibrate_demand(s.instance, s.baseline, cfg.epsilon, cfg.max_iters);
  return s;
}

// --- 3-SAT reduction fixtures ------------------------------------------------

// A 3-CNF formula; literals are signed 1-based variable indices.
struct SatFormula {
  int num_vars = 0;
  std::vector<std::array<int, 3>> clauses;

  void validate() const {
    if (num_vars <= 0) throw std::invalid_argument("formula needs at least one variable");
    for (const auto& cl : clauses) {
      for (int lit : cl) {
        if (lit == 0 || std::abs(lit) > num_vars) throw std::invalid_argument("literal out of range");
      }
      if (cl[0] == cl[1] || cl[0] == cl[2] || cl[1] == cl[2])
        throw std::invalid_argument("clause literals must be distinct");
    }
  }
};

// One clause per line of signed integers; '(' ')' and a trailing 0 are
// ignored, as are blank lines and lines starting with 'c' or 'p'.
inline SatFormula parse_sat_formula(const std::string& text) {
  SatFormula f;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    for (char& ch : line)
      if (ch == '(' || ch == ')' || ch == ',') ch = ' ';
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first) || first[0] == 'c' || first[0] == 'p') continue;
    ls.clear();
    ls.seekg(0);
    std::vector<int> lits;
    int v;
    while (ls >> v)
      if (v != 0) lits.push_back(v);
    if (lits.empty()) continue;
    if (lits.size() != 3) throw std::invalid_argument("each clause needs exactly 3 literals");
    std::array<int, 3> cl{lits[0], lits[1], lits[2]};
    for (int lit : cl) f.num_vars = std::max(f.num_vars, std::abs(lit));
    f.clauses.push_back(cl);
  }
  f.validate();
  return f;
}

// Reduction instance for a 3-CNF formula with n1 variables and n2 clauses.
//
// UEs (n1 + n2 + 1): index 0 is the hub UE, 1..n1 the variable UEs, then one
// UE per clause. RRHs (2*n1 + n2 + 1): index 0 is the hub RRH, 2i-1 / 2i the
// positive / negated literal RRHs of variable i, then one RRH per clause.
// Every choice of one literal RRH per variable loads it fully; a clause RRH
// overloads exactly when all three of its literal RRHs are active. Demands
// are normalized by M*B = 1.
struct SatGadget {
  NetworkInstance instance;
  std::vector<std::vector<int>> candidate_rrhs;  // per UE
  int num_vars = 0;
  int num_clauses = 0;

  int hub_ue() const { return 0; }
  int variable_ue(int var) const { return var; }                       // var is 1-based
  int clause_ue(int c) const { return num_vars + 1 + c; }              // c is 0-based
  int hub_rrh() const { return 0; }
  int literal_rrh(int var, bool negated) const { return 2 * var - 1 + (negated ? 1 : 0); }
  int clause_rrh(int c) const { return 2 * num_vars + 1 + c; }
};

inline SatGadget gadget_from_sat(const SatFormula& formula) {
  formula.validate();
  SatGadget g;
  g.num_vars = formula.num_vars;
  g.num_clauses = static_cast<int>(formula.clauses.size());
  const int n1 = g.num_vars, n2 = g.num_clauses;

  NetworkInstance& inst = g.instance;
  inst.num_ues = n1 + n2 + 1;
  inst.num_rrhs = 2 * n1 + n2 + 1;
  inst.amp_gain = Matrix(inst.num_rrhs, inst.num_ues);
  inst.noise_power = 1.0;
  inst.num_rbs = 1;
  inst.rb_bandwidth = 1.0;
  inst.load_limit = 1.0;

  inst.power.assign(inst.num_rrhs, 3.0);
  inst.power[g.hub_rrh()] = 3.0 * n1 + 1.0;

  auto set_power_gain = [&](int rrh, int ue, double h2) { inst.amp_gain(rrh, ue) = std::sqrt(h2); };

  set_power_gain(g.hub_rrh(), g.hub_ue(), 1.0);
  for (int v = 1; v <= n1; ++v) {
    set_power_gain(g.literal_rrh(v, false), g.hub_ue(), 1.0);
    set_power_gain(g.literal_rrh(v, true), g.hub_ue(), 1.0);
    set_power_gain(g.literal_rrh(v, false), g.variable_ue(v), 1.0);
    set_power_gain(g.literal_rrh(v, true), g.variable_ue(v), 1.0);
  }
  for (int c = 0; c < n2; ++c) {
    set_power_gain(g.clause_rrh(c), g.clause_ue(c), 1.0);
    for (int lit : formula.clauses[c])
      set_power_gain(g.literal_rrh(std::abs(lit), lit < 0), g.clause_ue(c), 1.0 / 3.0);
  }

  inst.demand.assign(inst.num_ues, 1.0);
  for (int v = 1; v <= n1; ++v) inst.demand[g.variable_ue(v)] = 2.0;

  g.candidate_rrhs.assign(inst.num_ues, {});
  g.candidate_rrhs[g.hub_ue()] = {g.hub_rrh()};
  for (int v = 1; v <= n1; ++v)
    g.candidate_rrhs[g.variable_ue(v)] = {g.literal_rrh(v, false), g.literal_rrh(v, true)};
  for (int c = 0; c < n2; ++c) g.candidate_rrhs[g.clause_ue(c)] = {g.clause_rrh(c)};

  inst.validate();
  return g;
}

// Association induced by a truth assignment (value[v] true selects the
// negated-literal RRH for variable v, per the reduction's converse mapping).
// assignment is 1-based like the formula's variables.
inline Association association_from_assignment(const SatGadget& g, const std::vector<bool>& assignment) {
  if (static_cast<int>(assignment.size()) != g.num_vars + 1)
    throw std::invalid_argument("assignment must have num_vars + 1 entries (index 0 unused)");
  std::vector<std::uint8_t> kappa(static_cast<size_t>(g.instance.num_rrhs) * g.instance.num_ues, 0);
  auto link = [&](int rrh, int ue) { kappa[static_cast<size_t>(rrh) * g.instance.num_ues + ue] = 1; };
  link(g.hub_rrh(), g.hub_ue());
  for (int v = 1; v <= g.num_vars; ++v) link(g.literal_rrh(v, assignment[v]), g.variable_ue(v));
  for (int c = 0; c < g.num_clauses; ++c) link(g.clause_rrh(c), g.clause_ue(c));
  return Association(g.instance.num_rrhs, g.instance.num_ues, std::move(kappa));
}

inline nlohmann::json gadget_document(const SatGadget& g) {
  nlohmann::json j = instance_document(g.instance);
  j["candidate_rrhs"] = g.candidate_rrhs;
  j["num_vars"] = g.num_vars;
  j["num_clauses"] = g.num_clauses;
  return j;
}

}  // namespace loadscale
