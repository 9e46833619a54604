#pragma once

// Closed-form and quadrature evaluation of association, cell-load, access
// and throughput quantities for a validated model.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "hetnet/channel.hpp"
#include "hetnet/model.hpp"
#include "hetnet/numerics.hpp"

namespace hetnet::analytics {

using numerics::QuadratureSpec;

//==============================================================================
// Association and cell load

//! Probability that a user associates with tier m.
inline double association_probability(const ValidatedModel &vm,
                                      std::size_t m) {
  double total = 0.0;
  for (std::size_t k = 0; k < vm.size(); ++k)
    total += vm.tier(k).intensity * vm.derived(k).weight_moment_pos;
  return vm.tier(m).intensity * vm.derived(m).weight_moment_pos / total;
}

inline std::vector<double> association_probabilities(const ValidatedModel &vm) {
  std::vector<double> out;
  for (std::size_t m = 0; m < vm.size(); ++m)
    out.push_back(association_probability(vm, m));
  return out;
}

//! Negative-binomial cell-load pmf P[load = n], evaluated in log space.
inline double cell_load_pmf(const ValidatedModel &vm, std::size_t m,
                            long long n) {
  if (n < 0)
    throw DomainError("cell_load_pmf: n must be nonnegative");
  const double z = vm.derived(m).zeta;
  const double ap = z * vm.tier(m).intensity;
  const double users = vm.mu() * association_probability(vm, m);
  if (users == 0.0)
    return n == 0 ? 1.0 : 0.0;
  const double nn = static_cast<double>(n);
  const double log_p = std::lgamma(nn + z) - std::lgamma(nn + 1.0) -
                       std::lgamma(z) + z * std::log(ap / (ap + users)) +
                       nn * std::log(users / (ap + users));
  return std::exp(log_p);
}

//! P[a tier-m AP has no users].
inline double void_probability(const ValidatedModel &vm, std::size_t m) {
  const double z = vm.derived(m).zeta;
  const double ratio =
      vm.mu() * association_probability(vm, m) / (z * vm.tier(m).intensity);
  return std::exp(-z * std::log1p(ratio));
}

inline double mean_cell_load(const ValidatedModel &vm, std::size_t m) {
  return vm.mu() * association_probability(vm, m) / vm.tier(m).intensity;
}

//==============================================================================
// Opportunistic CSMA/CA

namespace detail {

// Intensity-area product g_k = A_{m,k} xi_k q_k lambda_k (times the weight
// ratio when weighted sensing is on) of every contending tier.
inline std::vector<double> contender_loads(const ValidatedModel &vm,
                                           std::size_t m,
                                           const std::vector<double> &q) {
  std::vector<double> g(vm.size(), 0.0);
  const double a = 2.0 / vm.alpha();
  for (std::size_t k = 0; k < vm.size(); ++k) {
    if (!vm.tier(k).contends())
      continue;
    double load = vm.overlap(m, k) * vm.derived(k).xi * q[k] *
                  vm.tier(k).intensity;
    if (vm.model().weighted_sensing)
      load *= std::pow(vm.derived(k).weight_mean / vm.derived(m).weight_mean, a);
    g[k] = load;
  }
  return g;
}

inline std::vector<double> non_void(const ValidatedModel &vm) {
  std::vector<double> q;
  for (std::size_t k = 0; k < vm.size(); ++k)
    q.push_back(1.0 - void_probability(vm, k));
  return q;
}

} // namespace detail

//! Access probability from the piecewise-in-timer integral: a tier-m AP with
//! timer t ~ U[0, tau_m] wins when none of the Poisson contenders sensed in
//! its region drew a smaller timer.
inline double channel_access_probability_general(const ValidatedModel &vm,
                                                 std::size_t m) {
  const auto &tm = vm.tier(m);
  if (!tm.contends())
    return 0.0;
  const auto g = detail::contender_loads(vm, m, detail::non_void(vm));
  // Contending tiers sorted by decreasing backoff limit (validated order).
  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < vm.size(); ++k)
    if (vm.tier(k).contends())
      order.push_back(k);
  for (std::size_t i = 1; i < order.size(); ++i)
    if (*vm.tier(order[i]).max_backoff > *vm.tier(order[i - 1]).max_backoff)
      throw OrderingViolation("backoff limits of contending tiers must be "
                              "nonincreasing");
  const double tau_m = *tm.max_backoff;
  double rho = 0.0;
  for (std::size_t j = 0; j < order.size(); ++j) {
    const double hi = *vm.tier(order[j]).max_backoff;
    const double lo =
        j + 1 < order.size() ? *vm.tier(order[j + 1]).max_backoff : 0.0;
    if (hi > tau_m || hi == lo)
      continue;
    // On t in [lo, hi] tiers order[0..j] are still drawing timers (rate
    // g_k / tau_k); the rest have all fired (full load g_k).
    double beta = 0.0, fired = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i) {
      const std::size_t k = order[i];
      if (i <= j)
        beta += g[k] / *vm.tier(k).max_backoff;
      else
        fired += g[k];
    }
    // int_lo^hi e^{-beta t} dt, free of cancellation for small beta.
    const double piece = std::exp(-beta * lo) * (hi - lo) *
                         numerics::one_minus_exp_over(beta * (hi - lo));
    rho += std::exp(-fired) * piece;
  }
  return rho / tau_m;
}

//! Access probability when every contending tier shares one backoff limit.
inline double channel_access_probability_equal(const ValidatedModel &vm,
                                               std::size_t m) {
  if (!vm.tier(m).contends())
    return 0.0;
  const auto g = detail::contender_loads(vm, m, detail::non_void(vm));
  double x = 0.0;
  for (double v : g)
    x += v;
  return numerics::one_minus_exp_over(x);
}

//! Channel access probability; dispatches to the single-exponential form
//! when every contending tier has the same backoff limit.
inline double channel_access_probability(const ValidatedModel &vm,
                                         std::size_t m) {
  if (!vm.tier(m).contends())
    return 0.0;
  std::optional<double> tau;
  bool equal = true;
  for (const auto &t : vm.tiers()) {
    if (!t.contends())
      continue;
    if (tau && *t.max_backoff != *tau)
      equal = false;
    tau = *t.max_backoff;
  }
  return equal ? channel_access_probability_equal(vm, m)
               : channel_access_probability_general(vm, m);
}

//==============================================================================
// Shannon transform and the interference functional

//! l_Z(x, y) = x^y Gamma(1-y) E[Z^y] + int_0^1 L_Z(x t^{-1/y}) dt - 1.
inline double ell(const ChannelModel &z, double x, double y,
                  const QuadratureSpec &spec = {1e-9, 1e-14, 400}) {
  if (!(y > 0.0 && y < 1.0))
    throw DomainError("ell: y must lie in (0, 1)");
  if (x < 0.0)
    throw DomainError("ell: x must be nonnegative");
  if (x == 0.0)
    return 0.0;
  const double head = std::pow(x, y) * std::tgamma(1.0 - y) *
                      z.fractional_moment(y);
  // int_0^1 (L - 1) dt written as -int_0^1 (1 - L) dt to avoid cancellation.
  auto deficit = [&](double t) {
    if (t <= 0.0)
      return 1.0;
    return z.one_minus_laplace(x * std::pow(t, -1.0 / y));
  };
  const double body = numerics::integrate(deficit, 0.0, 1.0, spec).value;
  return head - body;
}

//! E[ln(1 + eta Psi)] through its Laplace-transform identity.
inline double shannon_transform(const ChannelModel &psi, double eta,
                                const QuadratureSpec &spec = {}) {
  if (eta < 0.0)
    throw DomainError("shannon_transform: eta must be nonnegative");
  if (eta == 0.0)
    return 0.0;
  const ChannelModel inv = psi.reciprocal();
  auto f = [&](double s) {
    const double w = s < 1e-12 ? eta : -std::expm1(-eta * s) / s;
    return w * inv.laplace(s);
  };
  return numerics::integrate_0_inf(f, spec).value;
}

//! E[ln(1 + eta Psi)] for an independent random eta.
inline double shannon_transform_random_eta(const ChannelModel &psi,
                                           const ChannelModel &eta,
                                           const QuadratureSpec &spec = {}) {
  const ChannelModel inv = psi.reciprocal();
  const double eta_mean = eta.mean();
  auto f = [&](double s) {
    const double w = s < 1e-12 ? eta_mean : eta.one_minus_laplace(s) / s;
    return w * inv.laplace(s);
  };
  return numerics::integrate_0_inf(f, spec).value;
}

//==============================================================================
// Rate bounds

//! Per-tier inputs of the rate-bound integrals.
struct InterferenceTerm {
  double coefficient;   // q_k xi_k rho_k theta_k
  double ratio;         // w_m h_k P_k / (w_k h_m P_m)
  const ChannelModel *hat;
};

//! (1/ln2) int_0^inf (1 - L_H(u)) / (u (sum_k c_k l_{H_k}(r_k u, 2/alpha) + 1))
inline double rate_integral(const ChannelModel &desired,
                            const std::vector<InterferenceTerm> &terms,
                            double y, const QuadratureSpec &spec = {}) {
  const double desired_mean = desired.mean();
  // Integrate in v = u E[H] so the numerator varies on a unit scale whatever
  // the magnitude of the desired-signal law.
  auto f = [&](double v) {
    const double u = v / desired_mean;
    const double num = u < 1e-12 ? 1.0
                                 : desired.one_minus_laplace(u) / v;
    double den = 1.0;
    for (const auto &t : terms)
      if (t.coefficient > 0.0)
        den += t.coefficient * ell(*t.hat, t.ratio * u, y);
    return num / den;
  };
  return numerics::integrate_0_inf(f, spec).value / std::numbers::ln2;
}

//! Quantities shared by the rate bounds, evaluated once per model.
struct TierState {
  std::vector<double> theta, q, xi, rho;

  static TierState of(const ValidatedModel &vm) {
    TierState s;
    for (std::size_t k = 0; k < vm.size(); ++k) {
      s.theta.push_back(association_probability(vm, k));
      s.q.push_back(1.0 - void_probability(vm, k));
      s.xi.push_back(vm.derived(k).xi);
    }
    for (std::size_t k = 0; k < vm.size(); ++k)
      s.rho.push_back(channel_access_probability(vm, k));
    return s;
  }
};

namespace detail {

inline double link_ratio(const ValidatedModel &vm, std::size_t m,
                         std::size_t k, bool licensed) {
  const auto &dm = vm.derived(m);
  const auto &dk = vm.derived(k);
  const double hm = licensed ? dm.mean_gain_licensed : dm.mean_gain_unlicensed;
  const double hk = licensed ? dk.mean_gain_licensed : dk.mean_gain_unlicensed;
  return dm.weight_mean * hk * vm.tier(k).power /
         (dk.weight_mean * hm * vm.tier(m).power);
}

} // namespace detail

//! Lower bound on the unlicensed mean spectrum efficiency of tier m (bps/Hz).
inline double unlicensed_rate_bound(const ValidatedModel &vm, std::size_t m,
                                    const TierState &s,
                                    const QuadratureSpec &spec = {}) {
  if (!vm.tier(m).contends())
    return 0.0;
  const double prefactor = s.rho[m] * s.xi[m];
  if (prefactor == 0.0)
    return 0.0;
  std::vector<InterferenceTerm> terms;
  for (std::size_t k = 0; k < vm.size(); ++k)
    terms.push_back({s.q[k] * s.xi[k] * s.rho[k] * s.theta[k],
                     detail::link_ratio(vm, m, k, false),
                     &vm.derived(k).hat_unlicensed});
  return prefactor * rate_integral(vm.derived(m).hat_unlicensed, terms,
                                   2.0 / vm.alpha(), spec);
}

inline double unlicensed_rate_bound(const ValidatedModel &vm, std::size_t m) {
  return unlicensed_rate_bound(vm, m, TierState::of(vm));
}

//! Lower bound on the licensed mean spectrum efficiency of tier m (bps/Hz);
//! zero for the unlicensed-only tier.
inline double licensed_rate_bound(const ValidatedModel &vm, std::size_t m,
                                  const TierState &s,
                                  const QuadratureSpec &spec = {}) {
  if (m == vm.last())
    return 0.0;
  std::vector<InterferenceTerm> terms;
  for (std::size_t k = 0; k < vm.last(); ++k)
    terms.push_back({s.q[k] * s.theta[k], detail::link_ratio(vm, m, k, true),
                     &vm.derived(k).hat_licensed});
  return rate_integral(vm.derived(m).hat_licensed, terms, 2.0 / vm.alpha(),
                       spec);
}

inline double licensed_rate_bound(const ValidatedModel &vm, std::size_t m) {
  return licensed_rate_bound(vm, m, TierState::of(vm));
}

//! Dense-user limit of the licensed bound: every non-void probability is 1.
inline double licensed_rate_dense_limit(const ValidatedModel &vm,
                                        std::size_t m,
                                        const QuadratureSpec &spec = {}) {
  if (m == vm.last())
    return 0.0;
  std::vector<InterferenceTerm> terms;
  for (std::size_t k = 0; k < vm.last(); ++k)
    terms.push_back({association_probability(vm, k),
                     detail::link_ratio(vm, m, k, true),
                     &vm.derived(k).hat_licensed});
  return rate_integral(vm.derived(m).hat_licensed, terms, 2.0 / vm.alpha(),
                       spec);
}

//==============================================================================
// Throughput

//! Total link throughput C_m in bps.
inline double link_throughput(const ValidatedModel &vm, std::size_t m,
                              double rate_licensed, double rate_unlicensed) {
  const auto &n = vm.model();
  return (m != vm.last() ? n.bandwidth_licensed * rate_licensed : 0.0) +
         n.bandwidth_unlicensed * rate_unlicensed;
}

//! c_m = q_{m,0} lambda_m C_m / (mu theta_m), the per-user link throughput.
inline double per_user_link_throughput(const ValidatedModel &vm, std::size_t m,
                                       double q, double theta,
                                       double link_rate) {
  if (!(vm.mu() > 0.0))
    throw DomainError("per-user throughput requires a positive user intensity");
  return q * vm.tier(m).intensity * link_rate / (vm.mu() * theta);
}

struct TierReport {
  double theta = 0;          // association probability
  double void_prob = 0;      // nu_{m,0}
  double non_void = 0;       // q_{m,0}
  double mean_load = 0;      // E[load]
  double zeta = 0;
  double xi = 0;             // P[qualified]
  double rho = 0;            // access probability
  double rate_licensed = 0;  // bps/Hz
  double rate_unlicensed = 0;
  double link_throughput = 0;     // C_m, bps
  double per_user_throughput = 0; // c_m, bps
};

struct AnalyticReport {
  std::vector<TierReport> tiers;
  double network_throughput = 0; // sum_m c_m theta_m, bps per user
  //! (1/mu) sum_m q_m lambda_m C_m; equals network_throughput identically.
  double network_throughput_alt = 0;
};

//! Every analytic quantity of the model.
inline AnalyticReport evaluate(const ValidatedModel &vm,
                               const QuadratureSpec &spec = {}) {
  const TierState s = TierState::of(vm);
  AnalyticReport r;
  double alt = 0.0;
  for (std::size_t m = 0; m < vm.size(); ++m) {
    TierReport t;
    t.theta = s.theta[m];
    t.non_void = s.q[m];
    t.void_prob = void_probability(vm, m);
    t.mean_load = mean_cell_load(vm, m);
    t.zeta = vm.derived(m).zeta;
    t.xi = s.xi[m];
    t.rho = s.rho[m];
    t.rate_licensed = licensed_rate_bound(vm, m, s, spec);
    t.rate_unlicensed = unlicensed_rate_bound(vm, m, s, spec);
    t.link_throughput =
        link_throughput(vm, m, t.rate_licensed, t.rate_unlicensed);
    if (vm.mu() > 0.0) {
      t.per_user_throughput = per_user_link_throughput(
          vm, m, t.non_void, t.theta, t.link_throughput);
      r.network_throughput += t.per_user_throughput * t.theta;
      alt += t.non_void * vm.tier(m).intensity * t.link_throughput;
    }
    r.tiers.push_back(t);
  }
  if (vm.mu() > 0.0)
    r.network_throughput_alt = alt / vm.mu();
  return r;
}

} // namespace hetnet::analytics
