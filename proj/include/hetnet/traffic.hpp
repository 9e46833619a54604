#pragma once

// Traffic management: the tier-M throughput constraint, the decentralized
// recursive weight update and the centralized network-throughput maximizer.
// Weights are handled through omega_k = w_bar_k^{2/alpha}; the last tier's
// omega is never changed.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hetnet/analytics.hpp"
#include "hetnet/errors.hpp"
#include "hetnet/model.hpp"
#include "hetnet/numerics.hpp"

namespace hetnet::traffic {

//==============================================================================
// Constraint

struct ConstraintCheck {
  bool satisfied = true;
  //! c_M / c_min - 1: the normalized margin of the constraint
  //! (q_M B_U / (c_min mu)) sum_k lambda_k omega_k >= omega_M / R_U_M.
  double slack = std::numeric_limits<double>::infinity();
  double c_last = 0.0; // c_M at omega, bps
};

inline ConstraintCheck tier_M_constraint(const analytics::AnalyticReport &r,
                                         double c_min) {
  ConstraintCheck out;
  out.c_last = r.tiers.back().per_user_throughput;
  if (c_min <= 0.0)
    return out;
  out.slack = out.c_last / c_min - 1.0;
  out.satisfied = out.slack >= 0.0;
  return out;
}

inline ConstraintCheck tier_M_constraint(const ValidatedModel &vm,
                                         const std::vector<double> &omega,
                                         double c_min) {
  return tier_M_constraint(analytics::evaluate(vm.with_omegas(omega)), c_min);
}

//==============================================================================
// Fixed-point map

//! Upsilon_m(x) = q_m(x) C_m(x) / (mu c_ref) (sum_{k != m} lambda_k omega_k
//! + lambda_m x), with q_m and C_m evaluated at omega_m = x.
inline double upsilon(const ValidatedModel &vm, std::size_t m, double x,
                      std::vector<double> omega, double c_ref) {
  if (!(x > 0.0))
    throw DomainError("upsilon: x must be positive");
  if (!(c_ref > 0.0))
    throw DomainError("upsilon: reference throughput must be positive");
  omega.at(m) = x;
  const auto r = analytics::evaluate(vm.with_omegas(omega));
  double sum = 0.0;
  for (std::size_t k = 0; k < vm.size(); ++k)
    sum += vm.tier(k).intensity * omega[k];
  return r.tiers[m].non_void * r.tiers[m].link_throughput /
         (vm.mu() * c_ref) * sum;
}

//==============================================================================
// Decentralized scheme

//! What a tier-m AP observes in one period.
struct Measurement {
  double link_throughput = 0.0; // C_m(n), bps
  double users_per_ap = 0.0;    // users per non-void AP
};

//! Observations of every tier at the model's current weights.
using Measure =
    std::function<std::vector<Measurement>(const ValidatedModel &)>;

//! Mean-field observations from the analytic formulas.
inline std::vector<Measurement> mean_field(const analytics::AnalyticReport &r,
                                           const ValidatedModel &vm) {
  std::vector<Measurement> out;
  for (std::size_t m = 0; m < vm.size(); ++m) {
    const auto &t = r.tiers[m];
    out.push_back({t.link_throughput,
                   vm.mu() * t.theta / (t.non_void * vm.tier(m).intensity)});
  }
  return out;
}

inline Measure mean_field_measure() {
  return [](const ValidatedModel &vm) {
    return mean_field(analytics::evaluate(vm), vm);
  };
}

struct TrajectoryRow {
  int n = 0;
  std::vector<double> omega;
  std::vector<double> c; // per-user link throughput per tier
  double c_star = 0.0;
  double constraint_slack = 0.0;
};

struct TrafficState {
  int n = 0;
  std::size_t tier = 0; // the managed tier m
  std::vector<double> omega;
  //! Observations of the users per non-void AP made at the current omega_m;
  //! N_m(n) is their mean. Restarted whenever omega_m moves.
  double users_sum = 0.0;
  int users_count = 0;
  double c_star = 0.0; // running best c*(n)
  std::vector<TrajectoryRow> trajectory;
  bool converged = false;
  double residual = std::numeric_limits<double>::infinity();
  int rejected_steps = 0; // constraint-violating steps shortened or refused

  double users_average() const {
    return users_count > 0 ? users_sum / users_count : 0.0;
  }
};

struct DecentralizedOptions {
  double c_min = 0.0;
  int max_iter = 2000;
  double tol = 1e-4;
  int max_backtracks = 40;
  //! Best throughput already known when resuming a run; c*(-1) is
  //! max(c_min, c_star_initial).
  double c_star_initial = 0.0;
  //! |ln(omega_m / omega_m(0))| beyond which the run is declared divergent.
  double max_log_drift = 30.0;
};

//! One period of the recursion omega_m(n+1) = c N_m(n) omega_m(n) / C_m(n).
//! The coefficient c is the best throughput seen before this period,
//! c*(n-1): while the observed C/N keeps beating it the AP keeps moving in
//! the same direction. c*(n) = max{c_min, c*(n-1), C/N} is updated
//! afterwards. Returns the proposed omega_m(n+1).
inline double decentralized_step(TrafficState &s, const Measurement &obs,
                                 double c_min) {
  if (!(obs.link_throughput > 0.0) || !std::isfinite(obs.link_throughput))
    throw DegenerateMeasurement("measured link throughput must be positive");
  if (!(obs.users_per_ap > 0.0) || !std::isfinite(obs.users_per_ap))
    throw DegenerateMeasurement("measured users per AP must be positive");
  s.users_sum += obs.users_per_ap;
  ++s.users_count;
  const double observed = obs.link_throughput / s.users_average();
  const double previous = s.c_star;
  s.c_star = std::max({c_min, previous, observed});
  return s.omega[s.tier] * previous / observed;
}

namespace detail {

inline TrajectoryRow row(const TrafficState &s,
                         const analytics::AnalyticReport &r, double c_min) {
  TrajectoryRow out;
  out.n = s.n;
  out.omega = s.omega;
  for (const auto &t : r.tiers)
    out.c.push_back(t.per_user_throughput);
  out.c_star = s.c_star;
  out.constraint_slack = tier_M_constraint(r, c_min).slack;
  return out;
}

} // namespace detail

//! Runs the recursion for managed tier m (others fixed) until omega_m is
//! stationary and c_m(omega_m) = c*, i.e. omega_m is a fixed point of
//! Upsilon_m with reference c*. A step that would break the tier-M
//! constraint is shortened geometrically towards the current point, and
//! refused when no shortened step is feasible.
inline TrafficState decentralized_run(const ValidatedModel &vm, std::size_t m,
                                      std::vector<double> omega0,
                                      const DecentralizedOptions &opt,
                                      const Measure &measure) {
  if (m >= vm.last())
    throw DomainError("only tiers 1..M-1 manage their weights");
  if (omega0.empty())
    omega0 = vm.omegas();
  TrafficState s;
  s.tier = m;
  s.omega = omega0;

  auto report = analytics::evaluate(vm.with_omegas(s.omega));
  if (!tier_M_constraint(report, opt.c_min).satisfied)
    throw InfeasibleStart(
        "tier-M per-user throughput " +
        std::to_string(report.tiers.back().per_user_throughput) +
        " bps is below c_min at the starting weights");
  // c*(-1) = c_min (or the best known so far when resuming).
  s.c_star = std::max(opt.c_min, opt.c_star_initial);
  s.trajectory.push_back(detail::row(s, report, opt.c_min));

  while (s.n < opt.max_iter) {
    const auto obs = measure(vm.with_omegas(s.omega));
    const double target = decentralized_step(s, obs.at(m), opt.c_min);
    const double current = s.omega[m];
    double accepted = current;
    double ratio = target / current;
    for (int b = 0; b <= opt.max_backtracks; ++b) {
      auto trial = s.omega;
      trial[m] = current * ratio;
      // c_m never reaches c* when the weight runs off this far: no fixed
      // point exists for this tier.
      if (!(std::abs(std::log(trial[m] / omega0[m])) <= opt.max_log_drift))
        throw NoConvergence("decentralized_run: weight of tier " +
                            std::to_string(m + 1) +
                            " diverges; c_m stays below c* = " +
                            std::to_string(s.c_star) + " bps");
      if (tier_M_constraint(vm, trial, opt.c_min).satisfied) {
        accepted = trial[m];
        break;
      }
      ++s.rejected_steps;
      ratio = std::sqrt(ratio);
    }
    const double move = std::abs(accepted - current) / current;
    if (accepted != current) {
      s.omega[m] = accepted;
      s.users_sum = 0.0;
      s.users_count = 0;
    }
    ++s.n;
    report = analytics::evaluate(vm.with_omegas(s.omega));
    s.trajectory.push_back(detail::row(s, report, opt.c_min));
    // Upsilon_m(omega_m) / omega_m = c_m(omega_m) / c*.
    s.residual = std::abs(1.0 - report.tiers[m].per_user_throughput / s.c_star);
    if (move <= opt.tol && s.residual <= opt.tol) {
      s.converged = true;
      return s;
    }
  }
  throw NoConvergence("decentralized_run: no convergence within " +
                      std::to_string(opt.max_iter) + " periods (residual " +
                      std::to_string(s.residual) + ")");
}

inline TrafficState decentralized_run(const ValidatedModel &vm, std::size_t m,
                                      std::vector<double> omega0,
                                      const DecentralizedOptions &opt) {
  return decentralized_run(vm, m, std::move(omega0), opt, mean_field_measure());
}

//! Columns: n, omega_1..omega_M, c_1..c_M, c_star, constraint_slack.
inline void write_trajectory_csv(std::ostream &os, const TrafficState &s) {
  const std::size_t M = s.omega.size();
  os << "n";
  for (std::size_t k = 0; k < M; ++k)
    os << ",omega_" << k + 1;
  for (std::size_t k = 0; k < M; ++k)
    os << ",c_" << k + 1;
  os << ",c_star,constraint_slack\n";
  const auto old = os.precision(12);
  for (const auto &r : s.trajectory) {
    os << r.n;
    for (double v : r.omega)
      os << ',' << v;
    for (double v : r.c)
      os << ',' << v;
    os << ',' << r.c_star << ',' << r.constraint_slack << '\n';
  }
  os.precision(old);
}

//==============================================================================
// Centralized scheme

struct CentralizedOptions {
  double c_min = 0.0;
  //! Box factor: omega_k ranges over [omega_ref / f, f omega_ref].
  double box_factor = 32.0;
  std::uint64_t seed = 1;
  int restarts = 4;
  int max_evaluations = 1500;
  //! Restrict the search to the common-bias ray: every biased tier 1..M-1
  //! uses bias 1 / b_inv, with b_inv in [1 / box_factor, box_factor].
  bool common_bias_ray = false;
};

struct CentralizedResult {
  std::vector<double> omega;
  double network_throughput = 0.0; // bps per user
  //! (omega_ref_k / omega_k)^{alpha/2} per managed tier: the inverse bias
  //! relative to the reference weights.
  std::vector<double> inverse_bias;
  //! Geometric mean of inverse_bias.
  double equivalent_inverse_bias = 1.0;
  int evaluations = 0;
};

//! Maximizes the per-user network throughput over omega_1..omega_{M-1}
//! subject to the tier-M constraint; omega_M stays at its reference value.
//! `vm` holds the reference weights (b = 1 on the common-bias ray).
inline CentralizedResult centralized_optimize(const ValidatedModel &vm,
                                              const CentralizedOptions &opt) {
  const std::vector<double> ref = vm.omegas();
  const std::size_t free_tiers = vm.last();
  const double half_alpha = vm.alpha() / 2.0;
  const double lb = -std::log(opt.box_factor), ub = std::log(opt.box_factor);

  // Each point is a vector of log multipliers applied to the reference.
  auto weights = [&](const std::vector<double> &x) {
    std::vector<double> omega = ref;
    if (opt.common_bias_ray)
      return vm.with_inverse_bias(std::exp(x[0]));
    for (std::size_t k = 0; k < free_tiers; ++k)
      omega[k] = ref[k] * std::exp(x[k]);
    return vm.with_omegas(omega);
  };
  std::vector<double> lo, hi;
  std::vector<std::vector<double>> starts;
  if (opt.common_bias_ray) {
    lo = {lb};
    hi = {ub};
    starts.push_back({0.0});
  } else {
    lo.assign(free_tiers, lb);
    hi.assign(free_tiers, ub);
    starts.push_back(std::vector<double>(free_tiers, 0.0));
  }
  // Cache the last evaluation: the predicate and objective see the same x.
  std::vector<double> cached_x;
  analytics::AnalyticReport cached;
  auto eval = [&](const std::vector<double> &x) -> const analytics::AnalyticReport & {
    if (x != cached_x) {
      cached = analytics::evaluate(weights(x));
      cached_x = x;
    }
    return cached;
  };
  numerics::MaximizeOptions mo;
  mo.seed = opt.seed;
  mo.restarts = opt.restarts;
  mo.max_evaluations = opt.max_evaluations;
  mo.starts = starts;
  mo.min_step = 1e-5;
  const auto best = numerics::maximize_box(
      [&](const std::vector<double> &x) { return eval(x).network_throughput; },
      lo, hi,
      [&](const std::vector<double> &x) {
        return tier_M_constraint(eval(x), opt.c_min).satisfied;
      },
      mo);

  CentralizedResult out;
  const auto vm_best = weights(best.x);
  out.omega = vm_best.omegas();
  out.network_throughput = best.value;
  out.evaluations = best.evaluations;
  double log_sum = 0.0;
  for (std::size_t k = 0; k < free_tiers; ++k) {
    // Relative to the weights with unit bias.
    const double b_inv =
        std::pow(vm.with_inverse_bias(1.0).derived(k).omega / out.omega[k],
                 half_alpha);
    out.inverse_bias.push_back(b_inv);
    log_sum += std::log(b_inv);
  }
  out.equivalent_inverse_bias = std::exp(log_sum / free_tiers);
  return out;
}

} // namespace hetnet::traffic
