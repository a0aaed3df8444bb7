#pragma once

// CoMP link selection: best-signal baseline association, the load-improvement
// admission test for a single candidate link, and the alternating joint
// optimization that grows the association and re-solves the scaling problem
// after each accepted link.

#include <cstdint>
#include <string>

#include "network.hpp"
#include "solver.hpp"

namespace loadscale {

class AllZeroGainsError : public std::runtime_error {
 public:
  explicit AllZeroGainsError(int ue)
      : std::runtime_error("UE " + std::to_string(ue) + " has zero received power from every RRH") {}
};

// kappa_ij = 1 exactly for the RRH with the best signal power p_i*|h_ij|^2;
// ties go to the lowest RRH index.
inline Association best_rrh_association(const NetworkInstance& inst) {
  std::vector<std::uint8_t> kappa(static_cast<size_t>(inst.num_rrhs) * inst.num_ues, 0);
  for (int j = 0; j < inst.num_ues; ++j) {
    int best = -1;
    double best_pw = 0.0;
    for (int i = 0; i < inst.num_rrhs; ++i) {
      double g = inst.amp_gain(i, j);
      double pw = inst.power[i] * g * g;
      if (pw > best_pw) {
        best_pw = pw;
        best = i;
      }
    }
    if (best < 0) throw AllZeroGainsError(j);
    kappa[static_cast<size_t>(best) * inst.num_ues + j] = 1;
  }
  return Association(inst.num_rrhs, inst.num_ues, std::move(kappa));
}

struct LinkCandidate {
  int rrh = 0;
  int ue = 0;
};

struct LinkCheckResult {
  bool accepted = false;
  int witness_k = 0;  // first iteration at which the admission condition held
  int iterations = 0;
  bool converged = false;  // sequences settled (always true on rejects that ran to tolerance)
};

// Admission test for adding the link (rrh, ue) to kappa at scaling alpha.
//
// mu_star must be the converged allocation of the scaling problem under
// kappa, i.e. the fixed point of mu -> (alpha*f_j for j in S; f_j otherwise).
// Starting from it, the test iterates that map under kappa' = kappa + link
// until the allocation settles, tracking the candidate RRH's load (which now
// carries the new UE) against its pre-addition converged value; witness_k is
// the first iteration at which it dropped back within epsilon*rho_bar. The
// link is accepted only if at convergence no RRH load exceeds its
// pre-addition value beyond that slack, so acceptance certifies that the
// association change lowers the whole load vector at this alpha. Divergence
// or hitting max_iters counts as a reject.
inline LinkCheckResult check_add_link(const NetworkInstance& inst, const Association& kappa,
                                      const LinkCandidate& cand, const Allocation& mu_star, double alpha,
                                      const TargetSet& target, double epsilon, int max_iters = kDefaultMaxIters) {
  if (kappa.has_link(cand.rrh, cand.ue)) throw std::invalid_argument("candidate link already present");
  if (!(alpha > 0)) throw std::invalid_argument("alpha must be > 0");

  const Association prime = kappa.with_link(cand.rrh, cand.ue);
  const double slack = epsilon * inst.load_limit;
  const LoadVector reference = load_from_allocation(kappa, mu_star);

  LinkCheckResult res;
  Allocation mu = mu_star;
  for (int k = 1; k <= max_iters; ++k) {
    Allocation next = target_scaled_map(inst, prime, load_from_allocation(prime, mu), alpha, target);
    res.iterations = k;

    if (res.witness_k == 0) {
      double candidate_load = 0.0;
      for (int j : prime.served_ues(cand.rrh)) candidate_load += next[j];
      if (candidate_load <= reference[cand.rrh] + slack) res.witness_k = k;
    }

    double step = linf_distance(next, mu);
    mu = std::move(next);
    if (!std::isfinite(step) || h_max_load(prime, mu, inst.load_limit) > kDivergenceLoad) return res;
    if (step < epsilon) {
      res.converged = true;
      break;
    }
  }
  if (!res.converged) return res;

  LoadVector after = load_from_allocation(prime, mu);
  res.accepted = true;
  for (int i = 0; i < inst.num_rrhs && res.accepted; ++i) res.accepted = after[i] <= reference[i] + slack;
  if (res.accepted && res.witness_k == 0) res.witness_k = res.iterations;
  return res;
}

enum class CandidateOrder {
  kRowMajor,          // RRH index ascending, then UE index
  kByGainDescending,  // strongest candidate signal power first
};

struct JointOptions {
  int max_iters = kDefaultMaxIters;
  int max_passes = 0;  // 0: bounded only by the m*n link budget
  CandidateOrder order = CandidateOrder::kRowMajor;
};

struct AcceptedLink {
  int rrh = 0;
  int ue = 0;
  int witness_k = 0;
  double alpha_after = 0.0;
};

struct JointResult {
  Association kappa_star;
  Allocation mu_star;
  double alpha_star = 0.0;
  int passes = 0;
  std::vector<AcceptedLink> accepted_links;
  std::vector<double> alpha_history;  // initial solve, then one entry per accepted link
  std::int64_t solver_iterations = 0;
  std::int64_t sequence_iterations = 0;
  bool converged = true;  // false if any inner solve hit its iteration cap
};

inline void to_json(nlohmann::json& j, const AcceptedLink& l) {
  j = nlohmann::json{{"rrh", l.rrh}, {"ue", l.ue}, {"witness_k", l.witness_k}, {"alpha_after", l.alpha_after}};
}

inline void to_json(nlohmann::json& j, const JointResult& r) {
  j = nlohmann::json{{"alpha_star", r.alpha_star},
                     {"mu_star", r.mu_star},
                     {"kappa_star", association_to_json(r.kappa_star)},
                     {"passes", r.passes},
                     {"accepted_links", r.accepted_links},
                     {"alpha_history", r.alpha_history},
                     {"solver_iterations", r.solver_iterations},
                     {"sequence_iterations", r.sequence_iterations},
                     {"converged", r.converged}};
}

// Alternating optimization: sweep all absent links in the configured order,
// admit each candidate through check_add_link, and re-solve the scaling
// problem (warm-started) after every acceptance. Stops after a full pass
// without acceptances or when the pass budget runs out. Accepted links only
// ever lower RRH loads, so alpha is non-decreasing across the history.
inline JointResult joint_optimize(const NetworkInstance& inst, const Association& kappa0,
                                  const ScalingProblem& problem, const JointOptions& opts = {}) {
  JointResult res;
  res.kappa_star = kappa0;

  ScalingProblem current = problem;
  MaxAlphaResult solve = solve_max_alpha(inst, res.kappa_star, current, opts.max_iters);
  res.solver_iterations += solve.iterations;
  res.converged = solve.converged;
  res.alpha_history.push_back(solve.alpha_star);

  const int link_budget = inst.num_rrhs * inst.num_ues;
  const int max_passes = opts.max_passes > 0 ? opts.max_passes : link_budget + 1;

  while (res.passes < max_passes) {
    ++res.passes;
    int accepted_this_pass = 0;

    std::vector<LinkCandidate> candidates;
    for (int i = 0; i < inst.num_rrhs; ++i)
      for (int j = 0; j < inst.num_ues; ++j)
        if (!res.kappa_star.has_link(i, j)) candidates.push_back({i, j});
    if (opts.order == CandidateOrder::kByGainDescending) {
      std::stable_sort(candidates.begin(), candidates.end(), [&](const LinkCandidate& a, const LinkCandidate& b) {
        double ga = inst.amp_gain(a.rrh, a.ue), gb = inst.amp_gain(b.rrh, b.ue);
        return inst.power[a.rrh] * ga * ga > inst.power[b.rrh] * gb * gb;
      });
    }

    for (const LinkCandidate& cand : candidates) {
      if (res.kappa_star.has_link(cand.rrh, cand.ue)) continue;  // added earlier in this pass
      LinkCheckResult check = check_add_link(inst, res.kappa_star, cand, solve.mu_star, solve.alpha_star,
                                             current.target_set, current.epsilon, opts.max_iters);
      res.sequence_iterations += check.iterations;
      if (!check.accepted) continue;

      res.kappa_star = res.kappa_star.with_link(cand.rrh, cand.ue);
      current.alpha0 = solve.alpha_star;  // warm start; the fixed point is start-independent
      current.mu0 = solve.mu_star;
      solve = solve_max_alpha(inst, res.kappa_star, current, opts.max_iters);
      res.solver_iterations += solve.iterations;
      res.accepted_links.push_back({cand.rrh, cand.ue, check.witness_k, solve.alpha_star});
      res.alpha_history.push_back(solve.alpha_star);
      ++accepted_this_pass;
      if (!solve.converged) {  // stop growing from an unsettled state
        res.converged = false;
        res.alpha_star = solve.alpha_star;
        res.mu_star = std::move(solve.mu_star);
        return res;
      }
      if (static_cast<int>(res.accepted_links.size()) > link_budget)
        throw std::logic_error("accepted more links than exist");
    }

    if (accepted_this_pass == 0) break;
  }

  res.alpha_star = solve.alpha_star;
  res.mu_star = std::move(solve.mu_star);
  return res;
}

}  // namespace loadscale
