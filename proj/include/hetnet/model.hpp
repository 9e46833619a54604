#pragma once

// M-tier network parameterization and its validated, derived form.

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hetnet/channel.hpp"
#include "hetnet/errors.hpp"

namespace hetnet {

//! AP association weight W of one tier.
struct WeightModel {
  enum class Kind {
    constant,               // W = bias
    biased_power,           // W = bias * P
    biased_power_shadowing, // W = bias * P * S, S the tier's shadowing
    random                  // W = bias * X, X ~ distribution
  };
  Kind kind = Kind::constant;
  double bias = 1.0;
  ChannelModel distribution; // used by Kind::random only

  bool uses_shadowing() const { return kind == Kind::biased_power_shadowing; }
};

inline const char *to_string(WeightModel::Kind k) {
  switch (k) {
  case WeightModel::Kind::constant:
    return "constant";
  case WeightModel::Kind::biased_power:
    return "biased_power";
  case WeightModel::Kind::biased_power_shadowing:
    return "biased_power_shadowing";
  case WeightModel::Kind::random:
    return "random";
  }
  return "unknown";
}

struct TierSpec {
  std::string name;
  double intensity = 0.0; // APs per m^2
  double power = 1.0;     // W
  WeightModel weight;
  ChannelModel licensed_channel = ChannelModel::exponential(1.0);
  ChannelModel unlicensed_channel = ChannelModel::exponential(1.0);
  //! Maximum backoff in slot units; empty means the tier never contends.
  std::optional<double> max_backoff = 1.0;
  double sensing_area = 0.0; // m^2
  bool csma_threshold_enabled = true;

  bool contends() const { return max_backoff.has_value(); }
};

//! Which gain gates the CSMA qualification step.
enum class ThresholdGain { full, fading_only };

struct NetworkModel {
  std::vector<TierSpec> tiers; // tier M (last) is unlicensed-only
  double user_intensity = 0.0; // users per m^2
  double pathloss_exponent = 4.0;
  double csma_threshold = 1.0;
  double bandwidth_licensed = 1.0;   // Hz
  double bandwidth_unlicensed = 1.0; // Hz
  //! Mean sensing-region areas A[m][k]; defaults to |S_m| when empty.
  std::vector<std::vector<double>> sensing_overlap;
  //! Scale contender intensities by (w_k / w_m)^{2/alpha} in the access
  //! probability, as in the weighted-space form of the contention model.
  bool weighted_sensing = false;
  ThresholdGain threshold_gain = ThresholdGain::full;
};

//! Scalars derived once per tier.
struct TierDerived {
  double weight_mean = 0.0;     // w_bar
  double weight_moment_pos = 0; // E[W^{2/alpha}]
  double weight_moment_neg = 0; // E[W^{-2/alpha}]
  double omega = 0.0;           // w_bar^{2/alpha}
  double zeta = 0.0;
  double xi = 0.0;              // P[unlicensed gain > delta]
  double mean_gain_licensed = 0.0;
  double mean_gain_unlicensed = 0.0;
  //! Laws of H w_bar / (W h_bar) on each band.
  ChannelModel hat_licensed;
  ChannelModel hat_unlicensed;
};

//! One violated invariant found during validation.
struct Issue {
  enum class Kind { domain, moment, ordering };
  Kind kind;
  std::string message;
};

//! Shadowing factor S of a tier, taken from its channels.
inline ChannelModel tier_shadowing(const TierSpec &t) {
  if (t.licensed_channel.shadowed())
    return t.licensed_channel.shadow_only();
  return t.unlicensed_channel.shadow_only();
}

//! Law of the association weight W.
inline ChannelModel weight_law(const TierSpec &t) {
  switch (t.weight.kind) {
  case WeightModel::Kind::constant:
    return ChannelModel::deterministic(t.weight.bias);
  case WeightModel::Kind::biased_power:
    return ChannelModel::deterministic(t.weight.bias * t.power);
  case WeightModel::Kind::biased_power_shadowing:
    return tier_shadowing(t).scaled(t.weight.bias * t.power);
  case WeightModel::Kind::random:
    return t.weight.distribution.scaled(t.weight.bias);
  }
  return {};
}

//! 7/2 E[W^{2/alpha}] E[W^{-2/alpha}].
inline double zeta(const TierSpec &tier, double alpha) {
  const auto w = weight_law(tier);
  return 3.5 * w.fractional_moment(2.0 / alpha) *
         w.fractional_moment(-2.0 / alpha);
}

namespace detail {

// Law of (H / h_bar) / (W / w_bar) for one band.
inline ChannelModel hat_law(const TierSpec &t, const ChannelModel &channel) {
  const ChannelModel h = channel.normalized();
  switch (t.weight.kind) {
  case WeightModel::Kind::constant:
  case WeightModel::Kind::biased_power:
    return h;
  case WeightModel::Kind::biased_power_shadowing:
    // The weight carries the same shadowing sample as the link, so only the
    // small-scale part survives.
    return channel.base_only().normalized();
  case WeightModel::Kind::random: {
    const ChannelModel w = t.weight.distribution.normalized();
    if (w.base() != BaseLaw::deterministic)
      throw DomainError("tier '" + t.name +
                        "': random weights with a non-log-normal law are not "
                        "supported by the rate bounds");
    const double base = w.scale();
    return h.times_shadow(-w.shadow_mu_ln(), w.shadow_sigma_ln())
        .scaled(1.0 / base);
  }
  }
  return h;
}

} // namespace detail

//! A NetworkModel whose invariants hold, with every per-tier scalar cached.
//! Immutable; safe to share between threads.
class ValidatedModel {
public:
  explicit ValidatedModel(NetworkModel model) : model_(std::move(model)) {
    std::vector<Issue> issues = collect_issues();
    if (!issues.empty())
      raise(issues);
    derive();
  }

  const NetworkModel &model() const noexcept { return model_; }
  const std::vector<TierSpec> &tiers() const noexcept { return model_.tiers; }
  const TierSpec &tier(std::size_t m) const { return model_.tiers.at(m); }
  const TierDerived &derived(std::size_t m) const { return derived_.at(m); }
  std::size_t size() const noexcept { return model_.tiers.size(); }
  double alpha() const noexcept { return model_.pathloss_exponent; }
  double mu() const noexcept { return model_.user_intensity; }
  //! Index of the unlicensed-only tier.
  std::size_t last() const noexcept { return model_.tiers.size() - 1; }

  //! Mean sensing-region area of tier m in which tier-k contenders lie.
  double overlap(std::size_t m, std::size_t k) const {
    if (!model_.sensing_overlap.empty())
      return model_.sensing_overlap.at(m).at(k);
    return model_.tiers.at(m).sensing_area;
  }

  //! omega_k = w_bar_k^{2/alpha} for every tier.
  std::vector<double> omegas() const {
    std::vector<double> w;
    for (const auto &d : derived_)
      w.push_back(d.omega);
    return w;
  }

  //! Copy with tier weights rescaled so that w_bar_k^{2/alpha} = omega[k].
  ValidatedModel with_omegas(const std::vector<double> &omega) const {
    if (omega.size() != size())
      throw DomainError("with_omegas: one value per tier required");
    NetworkModel next = model_;
    for (std::size_t k = 0; k < size(); ++k) {
      if (!(omega[k] > 0.0) || !std::isfinite(omega[k]))
        throw DomainError("with_omegas: omega must be positive and finite");
      next.tiers[k].weight.bias *=
          std::pow(omega[k] / derived_[k].omega, alpha() / 2.0);
    }
    return ValidatedModel(std::move(next));
  }

  //! Copy with every weight scaled by one common factor.
  ValidatedModel with_weight_scale(double factor) const {
    NetworkModel next = model_;
    for (auto &t : next.tiers)
      t.weight.bias *= factor;
    return ValidatedModel(std::move(next));
  }

  //! Copy where tiers 1..M-1 with a biased weight get bias 1 / inverse_bias.
  ValidatedModel with_inverse_bias(double inverse_bias) const {
    if (!(inverse_bias > 0.0))
      throw DomainError("inverse bias must be positive");
    NetworkModel next = model_;
    for (std::size_t k = 0; k + 1 < size(); ++k) {
      auto &w = next.tiers[k].weight;
      if (w.kind == WeightModel::Kind::biased_power ||
          w.kind == WeightModel::Kind::biased_power_shadowing)
        w.bias = 1.0 / inverse_bias;
    }
    return ValidatedModel(std::move(next));
  }

  ValidatedModel with_user_intensity(double mu) const {
    NetworkModel next = model_;
    next.user_intensity = mu;
    return ValidatedModel(std::move(next));
  }

  ValidatedModel with_csma_threshold(double delta) const {
    NetworkModel next = model_;
    next.csma_threshold = delta;
    return ValidatedModel(std::move(next));
  }

private:
  std::vector<Issue> collect_issues() const {
    std::vector<Issue> out;
    auto domain = [&](std::string m) {
      out.push_back({Issue::Kind::domain, std::move(m)});
    };
    const auto &m = model_;
    if (m.tiers.size() < 2)
      domain("at least two tiers are required");
    if (!(m.pathloss_exponent > 2.0) || !std::isfinite(m.pathloss_exponent))
      domain("pathloss exponent must exceed 2");
    if (!(m.user_intensity >= 0.0) || !std::isfinite(m.user_intensity))
      domain("user intensity must be finite and nonnegative");
    if (!(m.csma_threshold > 0.0))
      domain("CSMA threshold must be positive");
    if (!(m.bandwidth_licensed > 0.0) || !(m.bandwidth_unlicensed > 0.0))
      domain("bandwidths must be positive");
    if (!m.sensing_overlap.empty()) {
      bool ok = m.sensing_overlap.size() == m.tiers.size();
      for (const auto &row : m.sensing_overlap) {
        ok = ok && row.size() == m.tiers.size();
        for (double a : row)
          ok = ok && a >= 0.0 && std::isfinite(a);
      }
      if (!ok)
        domain("sensing_overlap must be an MxM matrix of nonnegative areas");
    }

    const double a = m.pathloss_exponent > 2.0 ? 2.0 / m.pathloss_exponent
                                               : 0.5;
    std::optional<double> last_tau;
    for (std::size_t k = 0; k < m.tiers.size(); ++k) {
      const auto &t = m.tiers[k];
      const std::string who = "tier " + std::to_string(k + 1) +
                              (t.name.empty() ? "" : " (" + t.name + ")");
      if (!(t.intensity > 0.0) || !std::isfinite(t.intensity))
        domain(who + ": intensity must be positive");
      if (!(t.power > 0.0) || !std::isfinite(t.power))
        domain(who + ": power must be positive");
      if (!(t.weight.bias > 0.0) || !std::isfinite(t.weight.bias))
        domain(who + ": weight bias must be positive");
      if (t.weight.uses_shadowing() && !t.licensed_channel.shadowed() &&
          !t.unlicensed_channel.shadowed())
        domain(who + ": shadowing weight requires a shadowed channel");
      if (t.licensed_channel.shadowed() && t.unlicensed_channel.shadowed() &&
          (t.licensed_channel.shadow_sigma_ln() !=
               t.unlicensed_channel.shadow_sigma_ln() ||
           t.licensed_channel.shadow_mu_ln() !=
               t.unlicensed_channel.shadow_mu_ln()))
        domain(who + ": licensed and unlicensed shadowing must agree");
      for (const auto *ch : {&t.licensed_channel, &t.unlicensed_channel}) {
        const double mean = ch->mean();
        if (!(mean > 0.0) || !std::isfinite(mean))
          domain(who + ": channel mean must be positive and finite");
      }
      if (t.contends()) {
        const double tau = *t.max_backoff;
        if (!(tau > 0.0) || !std::isfinite(tau))
          domain(who + ": max backoff must be positive (or unlimited)");
        if (!(t.sensing_area > 0.0))
          domain(who + ": contending tier needs a positive sensing area");
        if (last_tau && tau > *last_tau)
          out.push_back({Issue::Kind::ordering,
                         who + ": backoff limits of contending tiers must be "
                               "nonincreasing with the tier index"});
        last_tau = tau;
      }
      try {
        const auto w = weight_law(t);
        const double wm = w.mean();
        if (!(wm > 0.0) || !std::isfinite(wm))
          domain(who + ": weight mean must be positive and finite");
        const double p = w.fractional_moment(a);
        const double n = w.fractional_moment(-a);
        if (!std::isfinite(p) || !std::isfinite(n))
          throw NonFiniteMoment("weight moments diverge");
      } catch (const NonFiniteMoment &e) {
        out.push_back({Issue::Kind::moment, who + ": " + e.what()});
      } catch (const DomainError &e) {
        domain(who + ": " + e.what());
      }
    }
    return out;
  }

  [[noreturn]] static void raise(const std::vector<Issue> &issues) {
    std::ostringstream msg;
    msg << "invalid network model:";
    for (const auto &i : issues)
      msg << "\n  - " << i.message;
    switch (issues.front().kind) {
    case Issue::Kind::moment:
      throw NonFiniteMoment(msg.str());
    case Issue::Kind::ordering:
      throw OrderingViolation(msg.str());
    default:
      throw DomainError(msg.str());
    }
  }

  void derive() {
    const double a = 2.0 / alpha();
    derived_.clear();
    for (const auto &t : model_.tiers) {
      TierDerived d;
      const auto w = weight_law(t);
      d.weight_mean = w.mean();
      d.weight_moment_pos = w.fractional_moment(a);
      d.weight_moment_neg = w.fractional_moment(-a);
      d.omega = std::pow(d.weight_mean, a);
      d.zeta = 3.5 * d.weight_moment_pos * d.weight_moment_neg;
      d.mean_gain_licensed = t.licensed_channel.mean();
      d.mean_gain_unlicensed = t.unlicensed_channel.mean();
      if (!t.contends())
        d.xi = 0.0;
      else if (!t.csma_threshold_enabled)
        d.xi = 1.0;
      else if (model_.threshold_gain == ThresholdGain::fading_only)
        d.xi = t.unlicensed_channel.base_only().tail(model_.csma_threshold);
      else
        d.xi = t.unlicensed_channel.tail(model_.csma_threshold);
      d.hat_licensed = detail::hat_law(t, t.licensed_channel);
      d.hat_unlicensed = detail::hat_law(t, t.unlicensed_channel);
      derived_.push_back(std::move(d));
    }
  }

  NetworkModel model_;
  std::vector<TierDerived> derived_;
};

//! Validates a model, throwing DomainError / NonFiniteMoment /
//! OrderingViolation with every violated invariant listed.
inline ValidatedModel validate(NetworkModel model) {
  return ValidatedModel(std::move(model));
}

} // namespace hetnet
