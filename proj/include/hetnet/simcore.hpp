#pragma once

// Monte Carlo ground truth on a toroidal square window: marked PPP tiers,
// weighted association, opportunistic CSMA/CA contention and SIR samples at
// typical users.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <thread>
#include <vector>

#include "hetnet/errors.hpp"
#include "hetnet/model.hpp"
#include "hetnet/numerics.hpp"

namespace hetnet::sim {

struct Point {
  double x = 0.0, y = 0.0;
};

//! Squared distance on the torus [0, side)^2.
inline double torus_dist2(const Point &a, const Point &b, double side) {
  double dx = std::abs(a.x - b.x);
  double dy = std::abs(a.y - b.y);
  dx = std::min(dx, side - dx);
  dy = std::min(dy, side - dy);
  return dx * dx + dy * dy;
}

struct AccessPoint {
  std::size_t tier = 0;
  Point pos;
  double weight = 1.0; // W
  double reach = 1.0;  // W^{2/alpha}; association minimizes d^2 / reach
  double shadow_licensed = 1.0;
  double shadow_unlicensed = 1.0;
  double qualify_gain = 0.0; // unlicensed gain to the AP's own served user
  double timer = 0.0;        // backoff draw, U[0, tau]
  int load = 0;
  bool occupied = false;  // V
  bool qualified = false; // Xi
  bool wins = false;      // T
};

//! One sampled network. APs are stored tier by tier.
struct Realization {
  double side = 0.0;
  std::vector<AccessPoint> aps;
  std::vector<Point> users;
  std::vector<int> serving; // AP index per user, -1 before association
  std::vector<std::size_t> tier_begin; // size M + 1
};

//==============================================================================
// Sampling

//! Typical cell radius of tier m, sqrt(theta_m / (pi lambda_m)).
inline double typical_cell_radius(const ValidatedModel &vm, std::size_t m) {
  double denom = 0.0;
  for (std::size_t k = 0; k < vm.size(); ++k)
    denom += vm.tier(k).intensity * vm.derived(k).weight_moment_pos;
  const double theta =
      vm.tier(m).intensity * vm.derived(m).weight_moment_pos / denom;
  return std::sqrt(theta / (M_PI * vm.tier(m).intensity));
}

//! Smallest admissible window side: 20 typical cell radii of the tier with
//! the largest cells.
inline double minimum_window(const ValidatedModel &vm) {
  double r = 0.0;
  for (std::size_t m = 0; m < vm.size(); ++m)
    r = std::max(r, typical_cell_radius(vm, m));
  return 20.0 * r;
}

inline Realization sample_realization(const ValidatedModel &vm, double side,
                                      std::uint64_t seed) {
  if (!(side >= minimum_window(vm)))
    throw WindowTooSmall("window side " + std::to_string(side) +
                         " m is below the minimum " +
                         std::to_string(minimum_window(vm)) + " m");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double area = side * side;
  const double a = 2.0 / vm.alpha();
  const auto &net = vm.model();

  Realization r;
  r.side = side;
  for (std::size_t m = 0; m < vm.size(); ++m) {
    const TierSpec &t = vm.tier(m);
    r.tier_begin.push_back(r.aps.size());
    const auto n = std::poisson_distribution<long>(t.intensity * area)(rng);
    const ChannelModel shadow = tier_shadowing(t);
    const ChannelModel qual_law = net.threshold_gain == ThresholdGain::full
                                      ? t.unlicensed_channel
                                      : t.unlicensed_channel.base_only();
    for (long i = 0; i < n; ++i) {
      AccessPoint ap;
      ap.tier = m;
      ap.pos = {unit(rng) * side, unit(rng) * side};
      // One normal variate drives every shadowing factor of this AP.
      const double z = normal(rng);
      auto shadow_of = [z](const ChannelModel &c) {
        return c.shadowed() ? std::exp(c.shadow_mu_ln() + c.shadow_sigma_ln() * z)
                            : 1.0;
      };
      ap.shadow_licensed = shadow_of(t.licensed_channel);
      ap.shadow_unlicensed = shadow_of(t.unlicensed_channel);
      switch (t.weight.kind) {
      case WeightModel::Kind::constant:
        ap.weight = t.weight.bias;
        break;
      case WeightModel::Kind::biased_power:
        ap.weight = t.weight.bias * t.power;
        break;
      case WeightModel::Kind::biased_power_shadowing:
        ap.weight = t.weight.bias * t.power * shadow_of(shadow);
        break;
      case WeightModel::Kind::random:
        ap.weight = t.weight.bias * t.weight.distribution.sample(rng);
        break;
      }
      ap.reach = std::pow(ap.weight, a);
      // Qualification: fresh fading on the link to the AP's own user, the
      // AP's shadowing when the full gain gates.
      ap.qualify_gain = qual_law.sample_base(rng) *
                        (net.threshold_gain == ThresholdGain::full
                             ? ap.shadow_unlicensed
                             : 1.0);
      ap.timer = t.contends() ? unit(rng) * *t.max_backoff : 0.0;
      r.aps.push_back(ap);
    }
  }
  r.tier_begin.push_back(r.aps.size());
  const auto nu = std::poisson_distribution<long>(vm.mu() * area)(rng);
  r.users.reserve(nu);
  for (long i = 0; i < nu; ++i)
    r.users.push_back({unit(rng) * side, unit(rng) * side});
  r.serving.assign(r.users.size(), -1);
  return r;
}

//==============================================================================
// Spatial index

namespace detail {

//! Uniform bucket grid on the torus.
class Grid {
public:
  Grid(double side, double cell_hint, std::size_t count) : side_(side) {
    n_ = static_cast<int>(std::clamp(std::floor(side / cell_hint), 1.0, 4096.0));
    (void)count;
    cell_ = side / n_;
    buckets_.assign(static_cast<std::size_t>(n_) * n_, {});
  }
  void insert(const Point &p, std::size_t id) {
    buckets_[index(cell_of(p.x), cell_of(p.y))].push_back(id);
  }
  int cells() const { return n_; }
  double cell() const { return cell_; }
  int cell_of(double v) const {
    return std::clamp(static_cast<int>(v / cell_), 0, n_ - 1);
  }
  //! Visit the ids of every bucket at Chebyshev ring distance `ring` from
  //! cell (cx, cy); wrapped buckets may repeat on small grids.
  template <typename F> void ring(int cx, int cy, int ring, F &&f) const {
    if (ring == 0) {
      for (auto id : buckets_[index(cx, cy)])
        f(id);
      return;
    }
    for (int dx = -ring; dx <= ring; ++dx)
      for (int dy = -ring; dy <= ring; ++dy) {
        if (std::max(std::abs(dx), std::abs(dy)) != ring)
          continue;
        for (auto id : buckets_[index(wrap(cx + dx), wrap(cy + dy))])
          f(id);
      }
  }

private:
  int wrap(int i) const { return ((i % n_) + n_) % n_; }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * n_ + j;
  }
  double side_;
  int n_;
  double cell_;
  std::vector<std::vector<std::size_t>> buckets_;
};

} // namespace detail

//==============================================================================
// Association

//! Attach every user to argmax_i W_i |X_i - u|^{-alpha} on the torus and set
//! the void marks.
inline void associate(Realization &r, const ValidatedModel &vm) {
  if (r.aps.empty())
    throw NoAPs("associate: the realization contains no AP");
  const std::size_t M = r.tier_begin.size() - 1;
  std::vector<detail::Grid> grids;
  std::vector<double> max_reach(M, 0.0);
  for (std::size_t m = 0; m < M; ++m) {
    const std::size_t b = r.tier_begin[m], e = r.tier_begin[m + 1];
    grids.emplace_back(r.side, 1.5 / std::sqrt(vm.tier(m).intensity), e - b);
    for (std::size_t i = b; i < e; ++i) {
      grids.back().insert(r.aps[i].pos, i);
      max_reach[m] = std::max(max_reach[m], r.aps[i].reach);
    }
  }
  for (auto &ap : r.aps) {
    ap.load = 0;
    ap.occupied = false;
  }
  for (std::size_t u = 0; u < r.users.size(); ++u) {
    const Point p = r.users[u];
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_id = 0;
    for (std::size_t m = 0; m < M; ++m) {
      if (r.tier_begin[m] == r.tier_begin[m + 1])
        continue;
      const auto &g = grids[m];
      const int cx = g.cell_of(p.x), cy = g.cell_of(p.y);
      const int max_ring = g.cells() / 2 + 1;
      for (int ring = 0; ring <= max_ring; ++ring) {
        if (ring > 1) {
          const double lower = (ring - 1) * g.cell();
          if (lower * lower / max_reach[m] > best)
            break;
        }
        g.ring(cx, cy, ring, [&](std::size_t id) {
          const double score =
              torus_dist2(p, r.aps[id].pos, r.side) / r.aps[id].reach;
          if (score < best || (score == best && id < best_id)) {
            best = score;
            best_id = id;
          }
        });
      }
    }
    r.serving[u] = static_cast<int>(best_id);
    ++r.aps[best_id].load;
  }
  for (auto &ap : r.aps)
    ap.occupied = ap.load > 0;
}

//==============================================================================
// Contention

//! Sets Xi (threshold pass) and T (channel win). A qualified non-void AP wins
//! when no other qualified non-void contender inside its own sensing disk
//! drew a smaller timer; ties go to the lower index.
inline void contend_unlicensed(Realization &r, const ValidatedModel &vm) {
  const double delta = vm.model().csma_threshold;
  double radius_max = 0.0;
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < r.aps.size(); ++i) {
    auto &ap = r.aps[i];
    const TierSpec &t = vm.tier(ap.tier);
    ap.qualified = t.contends() &&
                   (!t.csma_threshold_enabled || ap.qualify_gain > delta);
    ap.wins = false;
    if (ap.qualified && ap.occupied) {
      active.push_back(i);
      radius_max = std::max(radius_max, std::sqrt(t.sensing_area / M_PI));
    }
  }
  if (active.empty())
    return;
  detail::Grid grid(r.side, std::max(radius_max, 1e-9), active.size());
  for (auto i : active)
    grid.insert(r.aps[i].pos, i);
  const int rings = static_cast<int>(std::ceil(radius_max / grid.cell()));
  for (auto i : active) {
    auto &ap = r.aps[i];
    const double rad = std::sqrt(vm.tier(ap.tier).sensing_area / M_PI);
    const double rad2 = rad * rad;
    const int cx = grid.cell_of(ap.pos.x), cy = grid.cell_of(ap.pos.y);
    bool beaten = false;
    for (int ring = 0; ring <= std::min(rings, grid.cells() / 2 + 1) && !beaten;
         ++ring)
      grid.ring(cx, cy, ring, [&](std::size_t j) {
        if (j == i || beaten)
          return;
        const auto &other = r.aps[j];
        if (other.timer < ap.timer || (other.timer == ap.timer && j < i))
          if (torus_dist2(ap.pos, other.pos, r.side) <= rad2)
            beaten = true;
      });
    ap.wins = !beaten;
  }
}

//! True when no two winners lie within each other's sensing disks.
inline bool hard_core_holds(const Realization &r, const ValidatedModel &vm) {
  std::vector<std::size_t> winners;
  for (std::size_t i = 0; i < r.aps.size(); ++i)
    if (r.aps[i].wins)
      winners.push_back(i);
  for (std::size_t a = 0; a < winners.size(); ++a)
    for (std::size_t b = a + 1; b < winners.size(); ++b) {
      const auto &p = r.aps[winners[a]], &q = r.aps[winners[b]];
      const double d2 = torus_dist2(p.pos, q.pos, r.side);
      const double ra = vm.tier(p.tier).sensing_area / M_PI;
      const double rb = vm.tier(q.tier).sensing_area / M_PI;
      if (d2 <= std::min(ra, rb))
        return false;
    }
  return true;
}

//==============================================================================
// Measurement

struct SimConfig {
  double window_side = 2000.0; // m
  int realizations = 100;
  std::uint64_t seed = 1;
  int jobs = 1; // 0: hardware concurrency
  //! Typical users per realization: the users nearest to the centres of a
  //! probe_grid x probe_grid lattice of the window (1: the window centre).
  int probe_grid = 1;
  //! Minimum rate samples per tier; fewer raises InsufficientSamples.
  long min_rate_samples = 0;
  int bootstrap_resamples = 200;
};

//! Per-realization counts; all estimates are ratios of sums of these.
struct RealizationStats {
  std::vector<double> aps, voids, contenders, qualified, active, winners,
      associated;
  std::vector<double> rl_sum, rl_n, ru_sum, ru_n;
  double users = 0.0;
  long skipped_licensed = 0;   // licensed SIR samples with no interferer
  long skipped_unlicensed = 0; // unlicensed SIR samples with no interferer
  long empty_probes = 0;       // probes in a realization without users
  bool hard_core = true;

  explicit RealizationStats(std::size_t M = 0)
      : aps(M, 0.0), voids(M, 0.0), contenders(M, 0.0), qualified(M, 0.0),
        active(M, 0.0), winners(M, 0.0), associated(M, 0.0), rl_sum(M, 0.0),
        rl_n(M, 0.0), ru_sum(M, 0.0), ru_n(M, 0.0) {}
};

//! Counts and typical-user SIR samples of one associated, contended
//! realization. `rng` drives the per-link fading to the typical users.
template <typename Rng>
RealizationStats measure_realization(const Realization &r,
                                     const ValidatedModel &vm, int probe_grid,
                                     Rng &rng) {
  const std::size_t M = vm.size();
  RealizationStats s(M);
  s.users = static_cast<double>(r.users.size());
  for (const auto &ap : r.aps) {
    const std::size_t m = ap.tier;
    s.aps[m] += 1;
    s.voids[m] += ap.occupied ? 0 : 1;
    if (vm.tier(m).contends()) {
      s.contenders[m] += 1;
      s.qualified[m] += ap.qualified ? 1 : 0;
      s.active[m] += (ap.qualified && ap.occupied) ? 1 : 0;
      s.winners[m] += ap.wins ? 1 : 0;
    }
  }
  for (int id : r.serving)
    s.associated[r.aps[id].tier] += 1;
  s.hard_core = hard_core_holds(r, vm);

  const double half_alpha = vm.alpha() / 2.0;
  const std::size_t last = vm.last();
  for (int gi = 0; gi < probe_grid; ++gi)
    for (int gj = 0; gj < probe_grid; ++gj) {
      if (r.users.empty()) {
        ++s.empty_probes;
        continue;
      }
      const Point centre{(gi + 0.5) * r.side / probe_grid,
                         (gj + 0.5) * r.side / probe_grid};
      std::size_t u = 0;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < r.users.size(); ++k) {
        const double d2 = torus_dist2(centre, r.users[k], r.side);
        if (d2 < best) {
          best = d2;
          u = k;
        }
      }
      const Point p = r.users[u];
      const std::size_t o = static_cast<std::size_t>(r.serving[u]);
      const std::size_t m = r.aps[o].tier;
      auto path = [&](const AccessPoint &ap) {
        return std::pow(torus_dist2(p, ap.pos, r.side), -half_alpha);
      };
      auto licensed_gain = [&](const AccessPoint &ap) {
        return vm.tier(ap.tier).licensed_channel.sample_base(rng) *
               ap.shadow_licensed;
      };
      auto unlicensed_gain = [&](const AccessPoint &ap) {
        return vm.tier(ap.tier).unlicensed_channel.sample_base(rng) *
               ap.shadow_unlicensed;
      };
      const auto &serving = r.aps[o];
      if (m != last) {
        const double signal =
            vm.tier(m).power * licensed_gain(serving) * path(serving);
        double interference = 0.0;
        for (std::size_t j = 0; j < r.tier_begin[last]; ++j) {
          if (j == o || !r.aps[j].occupied)
            continue;
          interference +=
              vm.tier(r.aps[j].tier).power * licensed_gain(r.aps[j]) *
              path(r.aps[j]);
        }
        if (interference > 0.0) {
          s.rl_sum[m] += std::log2(1.0 + signal / interference);
          s.rl_n[m] += 1;
        } else {
          ++s.skipped_licensed;
        }
      }
      if (vm.tier(m).contends()) {
        if (!(serving.qualified && serving.wins)) {
          s.ru_n[m] += 1; // the AP does not transmit: zero rate
        } else {
          const double signal =
              vm.tier(m).power * unlicensed_gain(serving) * path(serving);
          double interference = 0.0;
          for (std::size_t j = 0; j < r.aps.size(); ++j) {
            if (j == o || !r.aps[j].wins)
              continue;
            interference += vm.tier(r.aps[j].tier).power *
                            unlicensed_gain(r.aps[j]) * path(r.aps[j]);
          }
          if (interference > 0.0) {
            s.ru_sum[m] += std::log2(1.0 + signal / interference);
            s.ru_n[m] += 1;
          } else {
            ++s.skipped_unlicensed;
          }
        }
      }
    }
  return s;
}

//! Sample, associate, contend and measure realization `index` of a run.
inline RealizationStats run_realization(const ValidatedModel &vm,
                                        const SimConfig &cfg,
                                        std::uint64_t index) {
  const std::uint64_t seed = numerics::stream_seed(cfg.seed, index);
  Realization r = sample_realization(vm, cfg.window_side, seed);
  if (r.aps.empty()) {
    RealizationStats s(vm.size());
    s.users = static_cast<double>(r.users.size());
    return s;
  }
  associate(r, vm);
  contend_unlicensed(r, vm);
  std::mt19937_64 rng(numerics::stream_seed(seed, 1));
  return measure_realization(r, vm, cfg.probe_grid, rng);
}

//==============================================================================
// Aggregation

struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

struct EmpiricalTier {
  Estimate theta, void_prob, non_void, mean_load, xi, rho, rate_licensed,
      rate_unlicensed, link_throughput, per_user_throughput;
  long samples_licensed = 0;
  long samples_unlicensed = 0;
};

struct EmpiricalReport {
  std::vector<EmpiricalTier> tiers;
  Estimate network_throughput;
  int n_realizations = 0;
  long skipped_licensed = 0;
  long skipped_unlicensed = 0;
  long empty_probes = 0;
  long hard_core_violations = 0;
};

namespace detail {

// Ratio-of-sums estimate with its delta-method standard error.
inline Estimate ratio(const std::vector<RealizationStats> &st,
                      std::vector<double> RealizationStats::*num,
                      std::vector<double> RealizationStats::*den,
                      std::size_t m) {
  double sn = 0.0, sd = 0.0;
  for (const auto &s : st) {
    sn += (s.*num)[m];
    sd += (s.*den)[m];
  }
  if (!(sd > 0.0))
    return {};
  const double est = sn / sd;
  double var = 0.0;
  for (const auto &s : st) {
    const double e = (s.*num)[m] - est * (s.*den)[m];
    var += e * e;
  }
  return {est, std::sqrt(var) / sd};
}

// Point estimates only, for bootstrap resamples.
struct Point_ {
  std::vector<double> theta, q, rl, ru, c;
  double network = 0.0;
};

inline Point_ point_estimates(const ValidatedModel &vm,
                              const std::vector<const RealizationStats *> &st,
                              double area) {
  const std::size_t M = vm.size();
  Point_ p;
  double users = 0.0;
  std::vector<double> assoc(M, 0.0), aps(M, 0.0), voids(M, 0.0), rl(M, 0.0),
      rln(M, 0.0), ru(M, 0.0), run(M, 0.0);
  for (const auto *s : st) {
    users += s->users;
    for (std::size_t m = 0; m < M; ++m) {
      assoc[m] += s->associated[m];
      aps[m] += s->aps[m];
      voids[m] += s->voids[m];
      rl[m] += s->rl_sum[m];
      rln[m] += s->rl_n[m];
      ru[m] += s->ru_sum[m];
      run[m] += s->ru_n[m];
    }
  }
  const auto &net = vm.model();
  for (std::size_t m = 0; m < M; ++m) {
    const double theta = users > 0 ? assoc[m] / users : 0.0;
    const double q = aps[m] > 0 ? 1.0 - voids[m] / aps[m] : 0.0;
    const double rate_l = rln[m] > 0 ? rl[m] / rln[m] : 0.0;
    const double rate_u = run[m] > 0 ? ru[m] / run[m] : 0.0;
    const double C = (m != vm.last() ? net.bandwidth_licensed * rate_l : 0.0) +
                     net.bandwidth_unlicensed * rate_u;
    // c_m = q lambda C / (mu theta): empirical intensities per unit area.
    const double lambda_hat = aps[m] / (area * st.size());
    const double mu_hat = users / (area * st.size());
    const double c = theta > 0 ? q * lambda_hat * C / (mu_hat * theta) : 0.0;
    p.theta.push_back(theta);
    p.q.push_back(q);
    p.rl.push_back(rate_l);
    p.ru.push_back(rate_u);
    p.c.push_back(c);
    p.network += c * theta;
  }
  return p;
}

inline double stdev(const std::vector<double> &v) {
  if (v.size() < 2)
    return 0.0;
  double mean = 0.0;
  for (double x : v)
    mean += x;
  mean /= v.size();
  double ss = 0.0;
  for (double x : v)
    ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (v.size() - 1));
}

} // namespace detail

//! Resample realizations with replacement; `f` receives each resample.
template <typename F>
void bootstrap(const std::vector<RealizationStats> &stats, int resamples,
               std::uint64_t seed, F &&f) {
  std::mt19937_64 rng(numerics::stream_seed(seed, 0xB0075u));
  std::uniform_int_distribution<std::size_t> pick(0, stats.size() - 1);
  std::vector<const RealizationStats *> sample(stats.size());
  for (int b = 0; b < resamples; ++b) {
    for (auto &p : sample)
      p = &stats[pick(rng)];
    f(static_cast<const std::vector<const RealizationStats *> &>(sample));
  }
}

//! Empirical rate means of one resample: (R_L, R_U) per tier.
inline std::pair<std::vector<double>, std::vector<double>>
resample_rates(const ValidatedModel &vm,
               const std::vector<const RealizationStats *> &sample,
               double area) {
  auto p = detail::point_estimates(vm, sample, area);
  return {p.rl, p.ru};
}

inline EmpiricalReport
measure_typical_user(const std::vector<RealizationStats> &stats,
                     const ValidatedModel &vm, const SimConfig &cfg) {
  if (stats.empty())
    throw InsufficientSamples("no realizations to aggregate");
  const std::size_t M = vm.size();
  const double area = cfg.window_side * cfg.window_side;
  using S = RealizationStats;
  EmpiricalReport rep;
  rep.n_realizations = static_cast<int>(stats.size());
  std::vector<double> users_vec;
  for (const auto &s : stats) {
    rep.skipped_licensed += s.skipped_licensed;
    rep.skipped_unlicensed += s.skipped_unlicensed;
    rep.empty_probes += s.empty_probes;
    rep.hard_core_violations += s.hard_core ? 0 : 1;
  }
  // Association shares use the user count as denominator.
  std::vector<RealizationStats> shadow = stats;
  for (auto &s : shadow)
    s.rl_n.assign(M, s.users); // reuse a spare column as the denominator
  for (std::size_t m = 0; m < M; ++m) {
    EmpiricalTier t;
    t.theta = detail::ratio(shadow, &S::associated, &S::rl_n, m);
    t.void_prob = detail::ratio(stats, &S::voids, &S::aps, m);
    t.non_void = {1.0 - t.void_prob.value, t.void_prob.stderr_};
    t.mean_load = detail::ratio(stats, &S::associated, &S::aps, m);
    t.xi = detail::ratio(stats, &S::qualified, &S::contenders, m);
    t.rho = detail::ratio(stats, &S::winners, &S::active, m);
    t.rate_licensed = detail::ratio(stats, &S::rl_sum, &S::rl_n, m);
    t.rate_unlicensed = detail::ratio(stats, &S::ru_sum, &S::ru_n, m);
    for (const auto &s : stats) {
      t.samples_licensed += static_cast<long>(s.rl_n[m]);
      t.samples_unlicensed += static_cast<long>(s.ru_n[m]);
    }
    if (cfg.min_rate_samples > 0) {
      const bool needs_l = m != vm.last();
      const bool needs_u = vm.tier(m).contends();
      if ((needs_l && t.samples_licensed < cfg.min_rate_samples) ||
          (needs_u && t.samples_unlicensed < cfg.min_rate_samples))
        throw InsufficientSamples("tier " + std::to_string(m + 1) +
                                  ": too few typical-user rate samples");
    }
    rep.tiers.push_back(t);
  }

  std::vector<const RealizationStats *> all;
  for (const auto &s : stats)
    all.push_back(&s);
  const auto point = detail::point_estimates(vm, all, area);
  std::vector<std::vector<double>> c_boot(M), C_boot(M);
  std::vector<double> net_boot;
  if (stats.size() > 1)
    bootstrap(stats, cfg.bootstrap_resamples, cfg.seed,
              [&](const std::vector<const RealizationStats *> &sample) {
                auto p = detail::point_estimates(vm, sample, area);
                for (std::size_t m = 0; m < M; ++m) {
                  c_boot[m].push_back(p.c[m]);
                  C_boot[m].push_back(
                      (m != vm.last() ? vm.model().bandwidth_licensed * p.rl[m]
                                      : 0.0) +
                      vm.model().bandwidth_unlicensed * p.ru[m]);
                }
                net_boot.push_back(p.network);
              });
  for (std::size_t m = 0; m < M; ++m) {
    auto &t = rep.tiers[m];
    t.link_throughput = {
        (m != vm.last() ? vm.model().bandwidth_licensed * point.rl[m] : 0.0) +
            vm.model().bandwidth_unlicensed * point.ru[m],
        detail::stdev(C_boot[m])};
    t.per_user_throughput = {point.c[m], detail::stdev(c_boot[m])};
  }
  rep.network_throughput = {point.network, detail::stdev(net_boot)};
  return rep;
}

//! Every realization of a run, computed on `cfg.jobs` workers. Results are
//! stored by realization index, so the output does not depend on the number
//! of workers.
inline std::vector<RealizationStats> run_realizations(const ValidatedModel &vm,
                                                      const SimConfig &cfg) {
  if (cfg.realizations < 1)
    throw DomainError("at least one realization is required");
  if (cfg.probe_grid < 1)
    throw DomainError("probe_grid must be >= 1");
  if (!(cfg.window_side >= minimum_window(vm)))
    throw WindowTooSmall("window side " + std::to_string(cfg.window_side) +
                         " m is below the minimum " +
                         std::to_string(minimum_window(vm)) + " m");
  std::vector<RealizationStats> out(cfg.realizations);
  int jobs = cfg.jobs > 0 ? cfg.jobs
                          : static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::clamp(jobs, 1, cfg.realizations);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&]() {
    for (int i = next++; i < cfg.realizations && !failed; i = next++) {
      try {
        out[i] = run_realization(vm, cfg, static_cast<std::uint64_t>(i));
      } catch (...) {
        if (!failed.exchange(true))
          failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j)
    pool.emplace_back(worker);
  worker();
  for (auto &t : pool)
    t.join();
  if (failure)
    std::rethrow_exception(failure);
  return out;
}

struct SimulationResult {
  EmpiricalReport report;
  std::vector<RealizationStats> realizations;
};

inline SimulationResult simulate(const ValidatedModel &vm,
                                 const SimConfig &cfg) {
  SimulationResult res;
  res.realizations = run_realizations(vm, cfg);
  res.report = measure_typical_user(res.realizations, vm, cfg);
  return res;
}

} // namespace hetnet::sim
