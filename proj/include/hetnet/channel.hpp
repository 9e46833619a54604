#pragma once

// Nonnegative random gains: a base law (deterministic, exponential,
// inverse-exponential or tabulated atoms) optionally multiplied by an
// independent log-normal shadowing factor.

#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "hetnet/errors.hpp"
#include "hetnet/numerics.hpp"

namespace hetnet {

//! Natural-log standard deviation of a shadowing factor given in dB.
inline double db_to_ln(double db) { return db * std::log(10.0) / 10.0; }

enum class BaseLaw { deterministic, exponential, inverse_exponential, tabulated };

class ChannelModel {
public:
  //! Deterministic unit gain.
  ChannelModel() = default;

  //============================================================================
  // Constructors for the supported kinds.

  static ChannelModel deterministic(double value) {
    ChannelModel c;
    c.base_ = BaseLaw::deterministic;
    c.scale_ = value;
    c.check();
    return c;
  }
  //! Exponential (Rayleigh power) gain with the given mean.
  static ChannelModel exponential(double mean = 1.0) {
    ChannelModel c;
    c.base_ = BaseLaw::exponential;
    c.scale_ = mean;
    c.check();
    return c;
  }
  //! Log-normal gain 10^{X/10}, X ~ N(mu_db, sigma_db^2).
  static ChannelModel lognormal_db(double mu_db, double sigma_db) {
    ChannelModel c;
    c.base_ = BaseLaw::deterministic;
    c.scale_ = 1.0;
    c.mu_ln_ = db_to_ln(mu_db);
    c.sigma_ln_ = db_to_ln(sigma_db);
    c.check();
    return c;
  }
  //! Exponential fading with mean `fading_mean` times log-normal shadowing.
  static ChannelModel exp_lognormal_db(double fading_mean, double mu_db,
                                       double sigma_db) {
    ChannelModel c = lognormal_db(mu_db, sigma_db);
    c.base_ = BaseLaw::exponential;
    c.scale_ = fading_mean;
    c.check();
    return c;
  }
  //! Discrete law with the given atoms; probabilities are normalized.
  static ChannelModel tabulated(std::vector<double> values,
                                std::vector<double> probs) {
    if (values.empty() || values.size() != probs.size())
      throw DomainError("tabulated channel: values/probs size mismatch");
    const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    if (!(total > 0.0))
      throw DomainError("tabulated channel: probabilities must sum to > 0");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(values[i] >= 0.0) || !(probs[i] >= 0.0))
        throw DomainError("tabulated channel: atoms and probabilities must "
                          "be nonnegative");
      probs[i] /= total;
    }
    ChannelModel c;
    c.base_ = BaseLaw::tabulated;
    c.scale_ = 1.0;
    c.values_ = std::move(values);
    c.probs_ = std::move(probs);
    c.check();
    return c;
  }

  //============================================================================
  // Structure

  BaseLaw base() const noexcept { return base_; }
  bool shadowed() const noexcept { return sigma_ln_ > 0.0 || mu_ln_ != 0.0; }
  double shadow_mu_ln() const noexcept { return mu_ln_; }
  double shadow_sigma_ln() const noexcept { return sigma_ln_; }
  double scale() const noexcept { return scale_; }
  const std::vector<double> &atoms() const noexcept { return values_; }
  const std::vector<double> &atom_probs() const noexcept { return probs_; }

  //! Schema name used in scenario files.
  std::string kind_name() const {
    switch (base_) {
    case BaseLaw::deterministic:
      return shadowed() ? "lognormal" : "deterministic";
    case BaseLaw::exponential:
      return shadowed() ? "exp_lognormal" : "exponential";
    case BaseLaw::tabulated:
      return shadowed() ? "tabulated_lognormal" : "tabulated";
    case BaseLaw::inverse_exponential:
      return "inverse_exponential";
    }
    return "unknown";
  }

  //! The base law alone (shadowing stripped).
  ChannelModel base_only() const {
    ChannelModel c = *this;
    c.mu_ln_ = 0.0;
    c.sigma_ln_ = 0.0;
    return c;
  }

  //! The shadowing factor alone (deterministic 1 when unshadowed).
  ChannelModel shadow_only() const {
    ChannelModel c;
    c.base_ = BaseLaw::deterministic;
    c.scale_ = 1.0;
    c.mu_ln_ = mu_ln_;
    c.sigma_ln_ = sigma_ln_;
    return c;
  }

  //! Law of c * X.
  ChannelModel scaled(double factor) const {
    if (!(factor > 0.0) || !std::isfinite(factor))
      throw DomainError("ChannelModel::scaled: factor must be positive");
    ChannelModel c = *this;
    if (base_ == BaseLaw::tabulated)
      for (auto &v : c.values_)
        v *= factor;
    else
      c.scale_ *= factor;
    return c;
  }

  //! Law of X / E[X].
  ChannelModel normalized() const { return scaled(1.0 / mean()); }

  //! Law of 1 / X.
  ChannelModel reciprocal() const {
    ChannelModel c = *this;
    c.mu_ln_ = -mu_ln_;
    switch (base_) {
    case BaseLaw::deterministic:
      if (!(scale_ > 0.0))
        throw DomainError("reciprocal of a zero gain");
      c.scale_ = 1.0 / scale_;
      break;
    case BaseLaw::exponential:
      c.base_ = BaseLaw::inverse_exponential;
      c.scale_ = 1.0 / scale_;
      break;
    case BaseLaw::inverse_exponential:
      c.base_ = BaseLaw::exponential;
      c.scale_ = 1.0 / scale_;
      break;
    case BaseLaw::tabulated:
      for (std::size_t i = 0; i < values_.size(); ++i)
        if (probs_[i] > 0.0 && !(values_[i] > 0.0))
          throw DomainError("reciprocal of a tabulated law with a zero atom");
      for (auto &v : c.values_)
        v = v > 0.0 ? 1.0 / v : 0.0;
      break;
    }
    return c;
  }

  //! Law of X * Y where Y is an independent pure log-normal factor.
  ChannelModel times_shadow(double mu_ln, double sigma_ln) const {
    ChannelModel c = *this;
    c.mu_ln_ += mu_ln;
    c.sigma_ln_ = std::hypot(sigma_ln_, sigma_ln);
    return c;
  }

  //============================================================================
  // Moments and transforms

  double mean() const {
    if (base_ == BaseLaw::inverse_exponential)
      return std::numeric_limits<double>::infinity();
    return base_moment(1.0) * shadow_moment(1.0);
  }

  //! E[X^a]; throws NonFiniteMoment where the moment diverges.
  double fractional_moment(double a) const {
    if (a == 0.0)
      return 1.0;
    return base_moment(a) * shadow_moment(a);
  }

  //! E[exp(-s X)] for s >= 0.
  double laplace(double s) const {
    if (s < 0.0)
      throw DomainError("laplace: argument must be nonnegative");
    if (s == 0.0)
      return 1.0;
    if (!shadowed())
      return base_laplace(s);
    return numerics::expect_standard_normal([&](double z) {
      return base_laplace(s * std::exp(mu_ln_ + sigma_ln_ * z));
    });
  }

  //! 1 - E[exp(-s X)], accurate for small s.
  double one_minus_laplace(double s) const {
    if (s < 0.0)
      throw DomainError("laplace: argument must be nonnegative");
    if (s == 0.0)
      return 0.0;
    if (!shadowed())
      return base_one_minus_laplace(s);
    return numerics::expect_standard_normal([&](double z) {
      return base_one_minus_laplace(s * std::exp(mu_ln_ + sigma_ln_ * z));
    });
  }

  //! P[X > delta].
  double tail(double delta) const {
    if (delta < 0.0)
      return 1.0;
    if (!shadowed())
      return base_tail(delta);
    if (sigma_ln_ == 0.0)
      return base_tail(delta * std::exp(-mu_ln_));
    if (base_ == BaseLaw::deterministic || base_ == BaseLaw::tabulated) {
      // P[v S > delta] = Phi((mu - ln(delta / v)) / sigma), atom by atom.
      auto atom_tail = [&](double v) {
        if (!(v > 0.0))
          return 0.0;
        if (delta == 0.0)
          return 1.0;
        const double z = (mu_ln_ - std::log(delta / v)) / sigma_ln_;
        return 0.5 * std::erfc(-z / std::sqrt(2.0));
      };
      if (base_ == BaseLaw::deterministic)
        return atom_tail(scale_);
      double p = 0.0;
      for (std::size_t i = 0; i < values_.size(); ++i)
        p += probs_[i] * atom_tail(values_[i]);
      return p;
    }
    return numerics::expect_standard_normal([&](double z) {
      return base_tail(delta * std::exp(-(mu_ln_ + sigma_ln_ * z)));
    });
  }

  template <typename Rng> double sample(Rng &rng) const {
    double x = sample_base(rng);
    if (shadowed())
      x *= sample_shadow(rng);
    return x;
  }

  template <typename Rng> double sample_base(Rng &rng) const {
    switch (base_) {
    case BaseLaw::deterministic:
      return scale_;
    case BaseLaw::exponential:
      return scale_ * std::exponential_distribution<double>(1.0)(rng);
    case BaseLaw::inverse_exponential:
      return scale_ / std::exponential_distribution<double>(1.0)(rng);
    case BaseLaw::tabulated: {
      std::discrete_distribution<std::size_t> pick(probs_.begin(),
                                                   probs_.end());
      return values_[pick(rng)];
    }
    }
    return 0.0;
  }

  template <typename Rng> double sample_shadow(Rng &rng) const {
    if (!shadowed())
      return 1.0;
    return std::exp(mu_ln_ +
                    sigma_ln_ * std::normal_distribution<double>(0.0, 1.0)(rng));
  }

private:
  void check() const {
    if (!(scale_ >= 0.0) || !std::isfinite(scale_))
      throw DomainError("channel: scale must be finite and nonnegative");
    if (!(sigma_ln_ >= 0.0) || !std::isfinite(sigma_ln_) ||
        !std::isfinite(mu_ln_))
      throw DomainError("channel: shadowing parameters must be finite");
    if (base_ != BaseLaw::tabulated && !(scale_ > 0.0) &&
        base_ != BaseLaw::deterministic)
      throw DomainError("channel: mean must be positive");
  }

  double shadow_moment(double a) const {
    return std::exp(a * mu_ln_ + 0.5 * a * a * sigma_ln_ * sigma_ln_);
  }

  double base_moment(double a) const {
    switch (base_) {
    case BaseLaw::deterministic:
      if (scale_ == 0.0 && a < 0.0)
        throw NonFiniteMoment("negative moment of a zero gain");
      return std::pow(scale_, a);
    case BaseLaw::exponential:
      if (!(a > -1.0))
        throw NonFiniteMoment("exponential law: E[X^a] diverges for a <= -1");
      return std::pow(scale_, a) * std::tgamma(1.0 + a);
    case BaseLaw::inverse_exponential:
      if (!(a < 1.0))
        throw NonFiniteMoment(
            "inverse-exponential law: E[X^a] diverges for a >= 1");
      return std::pow(scale_, a) * std::tgamma(1.0 - a);
    case BaseLaw::tabulated: {
      double m = 0.0;
      for (std::size_t i = 0; i < values_.size(); ++i) {
        if (probs_[i] == 0.0)
          continue;
        if (values_[i] == 0.0 && a < 0.0)
          throw NonFiniteMoment(
              "tabulated law with an atom at zero has no negative moments");
        m += probs_[i] * std::pow(values_[i], a);
      }
      return m;
    }
    }
    return 0.0;
  }

  double base_laplace(double s) const {
    switch (base_) {
    case BaseLaw::deterministic:
      return std::exp(-s * scale_);
    case BaseLaw::exponential:
      return 1.0 / (1.0 + s * scale_);
    case BaseLaw::inverse_exponential: {
      // E[exp(-x/E)] = 2 sqrt(x) K1(2 sqrt(x)), E ~ Exp(1).
      const double x = s * scale_;
      const double r = 2.0 * std::sqrt(x);
      if (r > 700.0)
        return 0.0;
      return r * std::cyl_bessel_k(1.0, r);
    }
    case BaseLaw::tabulated: {
      double l = 0.0;
      for (std::size_t i = 0; i < values_.size(); ++i)
        l += probs_[i] * std::exp(-s * values_[i]);
      return l;
    }
    }
    return 0.0;
  }

  double base_one_minus_laplace(double s) const {
    switch (base_) {
    case BaseLaw::deterministic:
      return -std::expm1(-s * scale_);
    case BaseLaw::exponential:
      return s * scale_ / (1.0 + s * scale_);
    case BaseLaw::inverse_exponential:
      return 1.0 - base_laplace(s);
    case BaseLaw::tabulated: {
      double l = 0.0;
      for (std::size_t i = 0; i < values_.size(); ++i)
        l += probs_[i] * -std::expm1(-s * values_[i]);
      return l;
    }
    }
    return 0.0;
  }

  double base_tail(double delta) const {
    switch (base_) {
    case BaseLaw::deterministic:
      return scale_ > delta ? 1.0 : 0.0;
    case BaseLaw::exponential:
      return std::exp(-delta / scale_);
    case BaseLaw::inverse_exponential:
      return delta == 0.0 ? 1.0 : -std::expm1(-scale_ / delta);
    case BaseLaw::tabulated: {
      double p = 0.0;
      for (std::size_t i = 0; i < values_.size(); ++i)
        if (values_[i] > delta)
          p += probs_[i];
      return p;
    }
    }
    return 0.0;
  }

  BaseLaw base_ = BaseLaw::deterministic;
  double scale_ = 1.0;
  double mu_ln_ = 0.0;
  double sigma_ln_ = 0.0;
  std::vector<double> values_;
  std::vector<double> probs_;
};

} // namespace hetnet
