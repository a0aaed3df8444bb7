#pragma once

// Load-coupled C-RAN network model: instance data, CoMP association, and the
// pure evaluation maps (SINR, capacity, per-RRH load, interference function).
//
// All functions here are pure and take immutable inputs; they are safe to
// call concurrently. Loads are never clamped: infeasible states stay visible
// through h_max_load() > 1.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace loadscale {

using Allocation = std::vector<double>;  // per-UE fraction of the RB budget (mu)
using LoadVector = std::vector<double>;  // per-RRH load (rho), may exceed the limit

// Dense row-major matrix, just enough for gain tables.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0) : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}

  double& operator()(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }
};

class UnservedUeError : public std::runtime_error {
 public:
  explicit UnservedUeError(int ue)
      : std::runtime_error("UE " + std::to_string(ue) + " has no serving RRH"), ue_(ue) {}
  int ue() const { return ue_; }

 private:
  int ue_;
};

// Static physics of one scenario. amp_gain stores channel amplitude
// magnitudes sqrt(|h|^2); serving amplitudes add coherently before squaring.
struct NetworkInstance {
  int num_rrhs = 0;
  int num_ues = 0;
  std::vector<double> power;   // transmit power per RB, watts
  Matrix amp_gain;             // num_rrhs x num_ues, linear amplitude
  double noise_power = 1.0;    // watts per RB
  int num_rbs = 1;             // M
  double rb_bandwidth = 1.0;   // B, hertz
  std::vector<double> demand;  // bits/second
  double load_limit = 1.0;     // rho_bar in (0, 1]

  // M*B, the spectral factor in the rate map. 1 for normalized instances.
  double spectral_scale() const { return static_cast<double>(num_rbs) * rb_bandwidth; }

  void validate() const {
    if (num_rrhs <= 0 || num_ues <= 0) throw std::invalid_argument("instance must have RRHs and UEs");
    if (static_cast<int>(power.size()) != num_rrhs) throw std::invalid_argument("power size mismatch");
    if (amp_gain.rows != num_rrhs || amp_gain.cols != num_ues)
      throw std::invalid_argument("amp_gain shape mismatch");
    if (static_cast<int>(demand.size()) != num_ues) throw std::invalid_argument("demand size mismatch");
    for (double p : power)
      if (!(p > 0)) throw std::invalid_argument("all per-RB powers must be > 0");
    for (double g : amp_gain.data)
      if (!(g >= 0) || !std::isfinite(g)) throw std::invalid_argument("amp_gain entries must be finite and >= 0");
    if (!(noise_power > 0)) throw std::invalid_argument("noise_power must be > 0");
    if (num_rbs <= 0 || !(rb_bandwidth > 0)) throw std::invalid_argument("RB grid must be positive");
    for (double d : demand)
      if (!(d > 0)) throw std::invalid_argument("all demands must be > 0");
    if (!(load_limit > 0) || load_limit > 1.0) throw std::invalid_argument("load_limit must be in (0, 1]");
  }
};

// Binary RRH x UE CoMP selection matrix with derived serving-set views.
// Construction rejects matrices that leave a UE unserved.
class Association {
 public:
  Association() = default;

  Association(int num_rrhs, int num_ues, std::vector<std::uint8_t> kappa)
      : m_(num_rrhs), n_(num_ues), kappa_(std::move(kappa)) {
    if (static_cast<int>(kappa_.size()) != m_ * n_) throw std::invalid_argument("kappa shape mismatch");
    rebuild_views();
  }

  static Association identity(int n) {
    std::vector<std::uint8_t> k(static_cast<size_t>(n) * n, 0);
    for (int i = 0; i < n; ++i) k[static_cast<size_t>(i) * n + i] = 1;
    return Association(n, n, std::move(k));
  }

  int num_rrhs() const { return m_; }
  int num_ues() const { return n_; }

  bool has_link(int rrh, int ue) const { return kappa_[static_cast<size_t>(rrh) * n_ + ue] != 0; }

  const std::vector<int>& serving_rrhs(int ue) const { return serving_[ue]; }
  const std::vector<int>& served_ues(int rrh) const { return served_[rrh]; }
  const std::vector<std::uint8_t>& kappa() const { return kappa_; }

  Association with_link(int rrh, int ue) const {
    Association out = *this;
    out.kappa_[static_cast<size_t>(rrh) * n_ + ue] = 1;
    out.rebuild_views();
    return out;
  }

  // Number of UEs served by two or more RRHs.
  int comp_ue_count() const {
    int c = 0;
    for (const auto& s : serving_)
      if (s.size() >= 2) ++c;
    return c;
  }

  bool operator==(const Association& o) const { return m_ == o.m_ && n_ == o.n_ && kappa_ == o.kappa_; }

 private:
  void rebuild_views() {
    serving_.assign(n_, {});
    served_.assign(m_, {});
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < n_; ++j)
        if (kappa_[static_cast<size_t>(i) * n_ + j]) {
          serving_[j].push_back(i);
          served_[i].push_back(j);
        }
    for (int j = 0; j < n_; ++j)
      if (serving_[j].empty()) throw UnservedUeError(j);
  }

  int m_ = 0;
  int n_ = 0;
  std::vector<std::uint8_t> kappa_;
  std::vector<std::vector<int>> serving_;  // per UE
  std::vector<std::vector<int>> served_;   // per RRH
};

// Target UE group for demand scaling, kept as an index list plus a mask.
class TargetSet {
 public:
  TargetSet() = default;

  TargetSet(int num_ues, std::vector<int> indices) : indices_(std::move(indices)), mask_(num_ues, 0) {
    if (indices_.empty()) throw std::invalid_argument("target set must be non-empty");
    std::sort(indices_.begin(), indices_.end());
    indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
    for (int j : indices_) {
      if (j < 0 || j >= num_ues) throw std::invalid_argument("target UE index out of range");
      mask_[j] = 1;
    }
  }

  static TargetSet all(int num_ues) {
    std::vector<int> idx(num_ues);
    for (int j = 0; j < num_ues; ++j) idx[j] = j;
    return TargetSet(num_ues, std::move(idx));
  }

  bool contains(int ue) const { return mask_[ue] != 0; }
  int size() const { return static_cast<int>(indices_.size()); }
  int num_ues() const { return static_cast<int>(mask_.size()); }
  bool is_all() const { return size() == num_ues(); }
  const std::vector<int>& indices() const { return indices_; }

 private:
  std::vector<int> indices_;
  std::vector<std::uint8_t> mask_;
};

// Inputs of one max-scaling solve: target group, tolerance, initial iterates.
struct ScalingProblem {
  TargetSet target_set;
  double epsilon = 1e-4;
  double alpha0 = 1.0;
  Allocation mu0;  // empty means the zero vector

  void validate(int num_ues) const {
    if (target_set.num_ues() != num_ues) throw std::invalid_argument("target set sized for a different instance");
    if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be > 0");
    if (!(alpha0 > 0)) throw std::invalid_argument("alpha0 must be > 0");
    if (!mu0.empty() && static_cast<int>(mu0.size()) != num_ues)
      throw std::invalid_argument("mu0 size mismatch");
    for (double v : mu0)
      if (!(v >= 0)) throw std::invalid_argument("mu0 must be non-negative");
  }
};

// SINR of one UE at the given per-RRH loads. Serving amplitudes combine
// in phase; each non-serving RRH k contributes p_k*|h_kj|^2*rho_k.
inline double sinr(const NetworkInstance& inst, const Association& assoc, const LoadVector& rho, int ue) {
  const auto& serving = assoc.serving_rrhs(ue);
  if (serving.empty()) throw UnservedUeError(ue);
  double amp = 0.0;
  for (int i : serving) amp += std::sqrt(inst.power[i]) * inst.amp_gain(i, ue);
  double interference = 0.0;
  for (int k = 0; k < inst.num_rrhs; ++k) {
    if (assoc.has_link(k, ue)) continue;
    double g = inst.amp_gain(k, ue);
    interference += inst.power[k] * g * g * rho[k];
  }
  return amp * amp / (interference + inst.noise_power);
}

// Achievable rate in bits/second: M*B*log2(1 + SINR).
inline double capacity(const NetworkInstance& inst, const Association& assoc, const LoadVector& rho, int ue) {
  return inst.spectral_scale() * std::log2(1.0 + sinr(inst, assoc, rho, ue));
}

// rho_i = sum of allocations of the UEs served by RRH i. No clamping.
inline LoadVector load_from_allocation(const Association& assoc, const Allocation& mu) {
  LoadVector rho(assoc.num_rrhs(), 0.0);
  for (int i = 0; i < assoc.num_rrhs(); ++i)
    for (int j : assoc.served_ues(i)) rho[i] += mu[j];
  return rho;
}

// Per-UE resource requirement d_j / C_j at the given loads. Building block
// shared by the mu-domain interference map and the link-admission sequences.
inline Allocation required_fractions(const NetworkInstance& inst, const Association& assoc, const LoadVector& rho) {
  Allocation f(inst.num_ues);
  for (int j = 0; j < inst.num_ues; ++j) {
    double c = capacity(inst, assoc, rho, j);
    if (!(c > 0)) throw std::domain_error("UE " + std::to_string(j) + " has zero capacity");
    f[j] = inst.demand[j] / c;
  }
  return f;
}

// The standard interference function f: mu -> per-UE required fractions.
inline Allocation interference_map(const NetworkInstance& inst, const Association& assoc, const Allocation& mu) {
  return required_fractions(inst, assoc, load_from_allocation(assoc, mu));
}

// F_alpha: component j is f_j(mu) for target UEs and f_j(mu)/alpha otherwise.
inline Allocation f_alpha(const NetworkInstance& inst, const Association& assoc, const Allocation& mu,
                          double alpha, const TargetSet& target) {
  if (!(alpha > 0)) throw std::invalid_argument("alpha must be > 0");
  Allocation f = interference_map(inst, assoc, mu);
  for (int j = 0; j < inst.num_ues; ++j)
    if (!target.contains(j)) f[j] /= alpha;
  return f;
}

// Demand map at scaling alpha, evaluated at explicit loads: alpha*f_j for
// target UEs and f_j otherwise. Its fixed point in mu is the converged
// allocation of a solved scaling problem.
inline Allocation target_scaled_map(const NetworkInstance& inst, const Association& assoc, const LoadVector& rho,
                                    double alpha, const TargetSet& target) {
  Allocation f = required_fractions(inst, assoc, rho);
  for (int j : target.indices()) f[j] *= alpha;
  return f;
}

// Normalized maximum load: (1/rho_bar) * max_i sum_{j served by i} mu_j.
inline double h_max_load(const Association& assoc, const Allocation& mu, double load_limit) {
  double worst = 0.0;
  for (int i = 0; i < assoc.num_rrhs(); ++i) {
    double rho = 0.0;
    for (int j : assoc.served_ues(i)) rho += mu[j];
    worst = std::max(worst, rho);
  }
  return worst / load_limit;
}

inline double linf_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

// --- JSON interchange -------------------------------------------------------
//
// One document carries an instance and (optionally) an association:
//   { "m", "n", "power"[m], "amp_gain"[m][n], "demand"[n],
//     "noise_power", "num_rbs", "rb_bandwidth", "load_limit", "kappa"[m][n] }
// UE and RRH indices are 0-based everywhere.

inline void to_json(nlohmann::json& j, const NetworkInstance& inst) {
  nlohmann::json gain = nlohmann::json::array();
  for (int i = 0; i < inst.num_rrhs; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int u = 0; u < inst.num_ues; ++u) row.push_back(inst.amp_gain(i, u));
    gain.push_back(std::move(row));
  }
  j = nlohmann::json{{"m", inst.num_rrhs},
                     {"n", inst.num_ues},
                     {"power", inst.power},
                     {"amp_gain", std::move(gain)},
                     {"demand", inst.demand},
                     {"noise_power", inst.noise_power},
                     {"num_rbs", inst.num_rbs},
                     {"rb_bandwidth", inst.rb_bandwidth},
                     {"load_limit", inst.load_limit}};
}

inline void from_json(const nlohmann::json& j, NetworkInstance& inst) {
  inst.num_rrhs = j.at("m").get<int>();
  inst.num_ues = j.at("n").get<int>();
  inst.power = j.at("power").get<std::vector<double>>();
  inst.amp_gain = Matrix(inst.num_rrhs, inst.num_ues);
  const auto& gain = j.at("amp_gain");
  for (int i = 0; i < inst.num_rrhs; ++i)
    for (int u = 0; u < inst.num_ues; ++u) inst.amp_gain(i, u) = gain.at(i).at(u).get<double>();
  inst.demand = j.at("demand").get<std::vector<double>>();
  inst.noise_power = j.at("noise_power").get<double>();
  inst.num_rbs = j.at("num_rbs").get<int>();
  inst.rb_bandwidth = j.at("rb_bandwidth").get<double>();
  inst.load_limit = j.at("load_limit").get<double>();
  inst.validate();
}

inline nlohmann::json association_to_json(const Association& assoc) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < assoc.num_rrhs(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < assoc.num_ues(); ++j) row.push_back(assoc.has_link(i, j) ? 1 : 0);
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Association association_from_json(const nlohmann::json& j, int num_rrhs, int num_ues) {
  std::vector<std::uint8_t> kappa(static_cast<size_t>(num_rrhs) * num_ues, 0);
  for (int i = 0; i < num_rrhs; ++i)
    for (int u = 0; u < num_ues; ++u) {
      int v = j.at(i).at(u).get<int>();
      if (v != 0 && v != 1) throw std::invalid_argument("kappa entries must be 0 or 1");
      kappa[static_cast<size_t>(i) * num_ues + u] = static_cast<std::uint8_t>(v);
    }
  return Association(num_rrhs, num_ues, std::move(kappa));
}

inline nlohmann::json instance_document(const NetworkInstance& inst, const Association* assoc = nullptr) {
  nlohmann::json j = inst;
  if (assoc) j["kappa"] = association_to_json(*assoc);
  return j;
}

}  // namespace loadscale
