#pragma once

// Special functions, adaptive quadrature, fixed-point iteration and a
// derivative-free box-constrained maximizer.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hetnet/errors.hpp"

namespace hetnet::numerics {

//==============================================================================
// Special functions

//! Gamma function for positive arguments.
inline double gamma_fn(double x) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw DomainError("gamma_fn: argument must be positive and finite");
  return std::tgamma(x);
}

inline double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw DomainError("log_gamma: argument must be positive and finite");
  return std::lgamma(x);
}

//! Exponential integral E1(x) for x > 0.
inline double expint_e1(double x) {
  if (!(x > 0.0))
    throw DomainError("expint_e1: argument must be positive");
  return -std::expint(-x);
}

//! (1 - e^{-x}) / x, continuous at 0.
inline double one_minus_exp_over(double x) {
  if (std::abs(x) < 1e-8)
    return 1.0 - 0.5 * x;
  return -std::expm1(-x) / x;
}

//==============================================================================
// Quadrature

struct QuadratureSpec {
  double rel_tol = 1e-8;
  double abs_tol = 1e-12;
  int max_subdivisions = 400;

  void check() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
      throw DomainError("QuadratureSpec: tolerances must be positive");
    if (max_subdivisions < 64)
      throw DomainError("QuadratureSpec: max_subdivisions must be >= 64");
  }
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int subdivisions = 0;
};

namespace detail {

// Gauss-Kronrod 7/15 abscissae and weights.
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel &o) const { return error < o.error; }
};

template <typename F> Panel gk15(F &f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double s = f(c - dx) + f(c + dx);
    kronrod += kWgk[j] * s;
    if (j % 2 == 1)
      gauss += kWg[j / 2] * s;
  }
  return {a, b, kronrod * h, std::abs((kronrod - gauss) * h)};
}

} // namespace detail

//! Globally adaptive Gauss-Kronrod quadrature on a finite interval.
template <typename F>
QuadratureResult integrate(F &&f, double a, double b,
                           const QuadratureSpec &spec = {},
                           int initial_panels = 1) {
  spec.check();
  if (a == b)
    return {};
  std::priority_queue<detail::Panel> heap;
  double total = 0.0, err = 0.0;
  const double w = (b - a) / initial_panels;
  for (int i = 0; i < initial_panels; ++i) {
    const double lo = a + i * w;
    const double hi = (i + 1 == initial_panels) ? b : lo + w;
    auto p = detail::gk15(f, lo, hi);
    total += p.value;
    err += p.error;
    heap.push(p);
  }
  int splits = 0;
  while (err > std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
    if (splits >= spec.max_subdivisions) {
      std::ostringstream msg;
      msg << "integrate: subdivision budget exhausted on [" << a << ", " << b
          << "], value " << total << " +/- " << err;
      throw NoConvergence(msg.str());
    }
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) // interval cannot be split further
      break;
    auto left = detail::gk15(f, worst.a, mid);
    auto right = detail::gk15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++splits;
    if (!std::isfinite(total))
      throw NoConvergence("integrate: non-finite integrand");
  }
  // Recompute the sums to shed accumulated cancellation.
  total = err = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  return {total, err, splits};
}

//! Integral over (0, inf): [0,1] directly, [1,inf) through u = 1/t.
template <typename F>
QuadratureResult integrate_0_inf(F &&f, const QuadratureSpec &spec = {}) {
  auto head = integrate(f, 0.0, 1.0, spec);
  auto tail_fn = [&f](double t) {
    if (t <= 0.0)
      return 0.0;
    const double u = 1.0 / t;
    return f(u) * u * u;
  };
  auto tail = integrate(tail_fn, 0.0, 1.0, spec);
  return {head.value + tail.value, head.error + tail.error,
          head.subdivisions + tail.subdivisions};
}

//! E[g(Z)] for a standard normal Z, truncated to |z| <= 12.
template <typename G>
double expect_standard_normal(G &&g, const QuadratureSpec &spec = {1e-11,
                                                                    1e-15,
                                                                    400}) {
  constexpr double inv_sqrt_2pi = 0.398942280401432677939946059934;
  auto integrand = [&g](double z) {
    return g(z) * inv_sqrt_2pi * std::exp(-0.5 * z * z);
  };
  return integrate(integrand, -12.0, 12.0, spec, 8).value;
}

//==============================================================================
// Fixed-point iteration

struct FixedPointResult {
  double x = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

//! Damped iteration x <- (1-d) x + d g(x) until |x - g(x)| <= tol max(1,|x|).
template <typename G>
FixedPointResult fixed_point(G &&g, double x0, double damping, double tol,
                             int max_iter) {
  if (!(x0 > 0.0))
    throw DomainError("fixed_point: x0 must be positive");
  if (!(damping > 0.0 && damping <= 1.0))
    throw DomainError("fixed_point: damping must lie in (0, 1]");
  double x = x0;
  for (int it = 0; it <= max_iter; ++it) {
    const double gx = g(x);
    if (!std::isfinite(gx))
      throw NoConvergence("fixed_point: map returned a non-finite value");
    const double r = std::abs(x - gx);
    if (r <= tol * std::max(1.0, std::abs(x)))
      return {x, r, it};
    x = (1.0 - damping) * x + damping * gx;
    if (!std::isfinite(x))
      throw NoConvergence("fixed_point: iterate diverged");
  }
  throw NoConvergence("fixed_point: iteration budget exhausted");
}

//==============================================================================
// Derivative-free maximization over a box

struct MaximizeOptions {
  int restarts = 8;
  std::uint64_t seed = 1;
  double initial_step = 0.25; // fraction of each box side
  double min_step = 1e-6;     // fraction of each box side
  int max_evaluations = 20000;
  //! Extra starting points tried before the random ones.
  std::vector<std::vector<double>> starts;
};

struct MaximizeResult {
  std::vector<double> x;
  double value = -std::numeric_limits<double>::infinity();
  int evaluations = 0;
};

//! Multi-start compass search restricted to points where `feasible` holds.
//! The result dominates every feasible point evaluated along the way.
template <typename F, typename P>
MaximizeResult maximize_box(F &&f, const std::vector<double> &lower,
                            const std::vector<double> &upper, P &&feasible,
                            const MaximizeOptions &opt = {}) {
  const std::size_t dim = lower.size();
  if (dim == 0 || upper.size() != dim)
    throw DomainError("maximize_box: bounds must be nonempty and conformant");
  for (std::size_t i = 0; i < dim; ++i)
    if (!(lower[i] <= upper[i]))
      throw DomainError("maximize_box: empty box");

  MaximizeResult best;
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  auto evaluate = [&](const std::vector<double> &x, double &value) {
    if (best.evaluations >= opt.max_evaluations)
      return false;
    ++best.evaluations;
    if (!feasible(x))
      return false;
    value = f(x);
    if (!std::isfinite(value))
      return false;
    if (value > best.value) {
      best.value = value;
      best.x = x;
    }
    return true;
  };

  std::vector<std::vector<double>> starts = opt.starts;
  std::vector<double> centre(dim);
  for (std::size_t i = 0; i < dim; ++i)
    centre[i] = 0.5 * (lower[i] + upper[i]);
  starts.push_back(centre);
  for (int r = 0; r < opt.restarts; ++r) {
    std::vector<double> x(dim);
    for (std::size_t i = 0; i < dim; ++i)
      x[i] = lower[i] + unit(rng) * (upper[i] - lower[i]);
    starts.push_back(std::move(x));
  }

  for (auto x : starts) {
    for (std::size_t i = 0; i < dim; ++i)
      x[i] = std::clamp(x[i], lower[i], upper[i]);
    double fx;
    if (!evaluate(x, fx))
      continue;
    double step = opt.initial_step;
    while (step >= opt.min_step && best.evaluations < opt.max_evaluations) {
      bool improved = false;
      for (std::size_t i = 0; i < dim && !improved; ++i) {
        for (double dir : {+1.0, -1.0}) {
          auto y = x;
          y[i] = std::clamp(x[i] + dir * step * (upper[i] - lower[i]),
                            lower[i], upper[i]);
          if (y[i] == x[i])
            continue;
          double fy;
          if (evaluate(y, fy) && fy > fx) {
            x = std::move(y);
            fx = fy;
            improved = true;
            break;
          }
        }
      }
      if (!improved)
        step *= 0.5;
    }
  }
  if (best.x.empty())
    throw InfeasibleRegion("maximize_box: no feasible point found");
  return best;
}

//==============================================================================
// Seeding

//! SplitMix64 step; used to derive independent per-job seeds from one seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x5851F42D4C957F2Dull));
}

} // namespace hetnet::numerics
