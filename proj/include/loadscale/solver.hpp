#pragma once

// Fixed-point machinery for the demand-scaling problem: plain iteration on a
// standard interference function, the normalized (conditional-eigenproblem)
// iteration, the joint (alpha, mu) solver, and an independent bisection
// oracle used for cross-validation on small instances.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <limits>
#include <ostream>
#include <utility>

#include "network.hpp"

namespace loadscale {

constexpr int kDefaultMaxIters = 10000;
// Early non-convergence exit: iterates past this normalized load diverge.
constexpr double kDivergenceLoad = 1e6;

struct TraceStep {
  int k = 0;
  double alpha = std::numeric_limits<double>::quiet_NaN();  // NaN for plain fixed-point traces
  Allocation mu;
  double residual = 0.0;
  double h = std::numeric_limits<double>::quiet_NaN();
};

// Shortest decimal representation that round-trips the double exactly.
inline std::string format_double(double v) {
  char buf[64];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

struct IterationTrace {
  std::vector<TraceStep> steps;

  // CSV with one row per iteration; NaN fields are left empty.
  void write_csv(std::ostream& os) const {
    os << "k,alpha,residual,h\n";
    auto field = [](double v) { return std::isnan(v) ? std::string() : format_double(v); };
    for (const auto& s : steps)
      os << s.k << ',' << field(s.alpha) << ',' << field(s.residual) << ',' << field(s.h) << '\n';
  }
};

inline void to_json(nlohmann::json& j, const TraceStep& s) {
  j = nlohmann::json{{"k", s.k}, {"alpha", s.alpha}, {"mu", s.mu}, {"residual", s.residual}, {"h", s.h}};
}

inline void to_json(nlohmann::json& j, const IterationTrace& t) { j = nlohmann::json{{"steps", t.steps}}; }

struct FixedPointResult {
  Allocation mu;  // final iterate, also attached when not converged
  IterationTrace trace;
  bool converged = false;
  int iterations = 0;
};

// Plain fixed-point iteration mu <- map(mu) until the sup-norm step drops
// below epsilon. An optional h functional is recorded in the trace and used
// for the divergence exit; without one, only max_iters bounds the loop.
inline FixedPointResult fixed_point(const std::function<Allocation(const Allocation&)>& map, Allocation mu0,
                                    double epsilon, int max_iters,
                                    const std::function<double(const Allocation&)>& h_fn = {}) {
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be > 0");
  FixedPointResult res;
  Allocation cur = std::move(mu0);
  for (int k = 1; k <= max_iters; ++k) {
    Allocation next = map(cur);
    double step = linf_distance(next, cur);
    double h = h_fn ? h_fn(next) : std::numeric_limits<double>::quiet_NaN();
    res.trace.steps.push_back({k, std::numeric_limits<double>::quiet_NaN(), next, step, h});
    res.iterations = k;
    cur = std::move(next);
    if (!std::isfinite(step) || (h_fn && h > kDivergenceLoad)) break;
    if (step < epsilon) {
      res.converged = true;
      break;
    }
  }
  res.mu = std::move(cur);
  return res;
}

struct NormalizedFixedPointResult {
  Allocation mu;        // H(mu) = 1 at convergence
  double lambda = 0.0;  // eigenvalue: F_alpha(mu) = lambda * mu
  bool converged = false;
  int iterations = 0;
};

// Normalized iteration mu <- F_alpha(mu) / H(F_alpha(mu)) for fixed alpha.
// Converges to the conditional eigenvector of F_alpha with H(mu) = 1; the
// returned lambda is H(F_alpha(mu)) at the last step.
inline NormalizedFixedPointResult normalized_fixed_point(const NetworkInstance& inst, const Association& assoc,
                                                         const TargetSet& target, double alpha, Allocation mu0,
                                                         double epsilon, int max_iters = kDefaultMaxIters) {
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be > 0");
  if (mu0.empty()) mu0.assign(inst.num_ues, 0.0);
  NormalizedFixedPointResult res;
  Allocation cur = std::move(mu0);
  for (int k = 1; k <= max_iters; ++k) {
    Allocation image = f_alpha(inst, assoc, cur, alpha, target);
    double h = h_max_load(assoc, image, inst.load_limit);
    if (!(h > 0) || !std::isfinite(h)) throw std::domain_error("degenerate image: H(F_alpha(mu)) is not positive");
    for (double& v : image) v /= h;
    double step = linf_distance(image, cur);
    res.iterations = k;
    res.lambda = h;
    cur = std::move(image);
    if (step < epsilon) {
      res.converged = true;
      break;
    }
  }
  res.mu = std::move(cur);
  return res;
}

struct MaxAlphaResult {
  double alpha_star = 0.0;  // < 1 signals the unscaled demands are already infeasible
  Allocation mu_star;
  IterationTrace trace;
  bool converged = false;
  int iterations = 0;

  bool feasible() const { return alpha_star >= 1.0; }
};

inline void to_json(nlohmann::json& j, const MaxAlphaResult& r) {
  j = nlohmann::json{{"alpha_star", r.alpha_star},
                     {"mu_star", r.mu_star},
                     {"converged", r.converged},
                     {"iterations", r.iterations},
                     {"trace", r.trace}};
}

// Joint iteration for the maximum demand scaling factor of the target group
// under a fixed association:
//   alpha^(k) = 1 / H(F_{alpha^(k-1)}(mu^(k-1)))
//   mu^(k)    = F_{alpha^(k)}(mu^(k-1)) / H(F_{alpha^(k)}(mu^(k-1)))
// until the sup-norm of the concatenated (alpha, mu) step drops below
// problem.epsilon. The mu update uses the freshly computed alpha: updating
// both from the stale pair can lock into a two-cycle (the max-loaded RRH
// flips each step), while the sequential schedule converges to the same
// fixed point. At convergence H(mu*) = 1 and mu* = alpha* F_{alpha*}(mu*).
inline MaxAlphaResult solve_max_alpha(const NetworkInstance& inst, const Association& assoc,
                                      const ScalingProblem& problem, int max_iters = kDefaultMaxIters) {
  inst.validate();
  problem.validate(inst.num_ues);
  if (assoc.num_rrhs() != inst.num_rrhs || assoc.num_ues() != inst.num_ues)
    throw std::invalid_argument("association sized for a different instance");

  MaxAlphaResult res;
  const bool scale_all = problem.target_set.is_all();
  double alpha = problem.alpha0;
  Allocation mu = problem.mu0.empty() ? Allocation(inst.num_ues, 0.0) : problem.mu0;

  for (int k = 1; k <= max_iters; ++k) {
    Allocation image = f_alpha(inst, assoc, mu, alpha, problem.target_set);
    double h = h_max_load(assoc, image, inst.load_limit);
    if (!(h > 0) || !std::isfinite(h)) throw std::domain_error("degenerate image: H(F_alpha(mu)) is not positive");
    double next_alpha = 1.0 / h;
    if (!scale_all) {  // with S = J the map does not depend on alpha
      image = f_alpha(inst, assoc, mu, next_alpha, problem.target_set);
      h = h_max_load(assoc, image, inst.load_limit);
      if (!(h > 0) || !std::isfinite(h)) throw std::domain_error("degenerate image: H(F_alpha(mu)) is not positive");
    }
    for (double& v : image) v /= h;
    double residual = std::max(std::abs(next_alpha - alpha), linf_distance(image, mu));
    alpha = next_alpha;
    mu = std::move(image);
    res.trace.steps.push_back({k, alpha, mu, residual, h_max_load(assoc, mu, inst.load_limit)});
    res.iterations = k;
    if (!std::isfinite(residual)) break;
    if (residual < problem.epsilon) {
      res.converged = true;
      break;
    }
  }
  res.alpha_star = alpha;
  res.mu_star = std::move(mu);
  return res;
}

// Independent verification oracle: bisection on alpha, each trial running a
// plain fixed point of mu -> (alpha*f_j for target UEs; f_j otherwise). A
// trial is feasible iff the iteration converges with H(mu) <= 1 + epsilon.
// Returns the supremum of feasible alpha to width epsilon, or 0 when even
// alpha = 2^-20 is infeasible. Guarded to small instances (m*n <= 64).
inline double oracle_max_alpha(const NetworkInstance& inst, const Association& assoc, const TargetSet& target,
                               double epsilon) {
  if (inst.num_rrhs * inst.num_ues > 64)
    throw std::invalid_argument("oracle_max_alpha is guarded to instances with m*n <= 64");
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be > 0");

  const double inner_eps = std::min(epsilon * 1e-3, 1e-10);
  const int inner_iters = 200000;
  auto h_fn = [&](const Allocation& mu) { return h_max_load(assoc, mu, inst.load_limit); };
  auto feasible = [&](double alpha) {
    auto map = [&](const Allocation& mu) {
      return target_scaled_map(inst, assoc, load_from_allocation(assoc, mu), alpha, target);
    };
    FixedPointResult fp = fixed_point(map, Allocation(inst.num_ues, 0.0), inner_eps, inner_iters, h_fn);
    return fp.converged && h_fn(fp.mu) <= 1.0 + epsilon;
  };

  const double alpha_cap = std::ldexp(1.0, 20);   // 2^20
  const double alpha_floor = std::ldexp(1.0, -20);
  double lo, hi;
  if (feasible(1.0)) {
    lo = 1.0;
    hi = 2.0;
    while (hi < alpha_cap && feasible(hi)) {
      lo = hi;
      hi *= 2.0;
    }
    if (hi >= alpha_cap) return lo;  // unbounded in practice; capped
  } else {
    hi = 1.0;
    lo = 0.5;
    while (lo > alpha_floor && !feasible(lo)) {
      hi = lo;
      lo *= 0.5;
    }
    if (!feasible(lo)) return 0.0;  // infeasible at any alpha
  }
  while (hi - lo > epsilon) {
    double mid = 0.5 * (lo + hi);
    if (feasible(mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

}  // namespace loadscale
