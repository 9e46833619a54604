#pragma once

// Experiment orchestration: scenario + mode + sweep -> report files.
//
// Output files written to ExperimentSpec::out_dir:
//
//   point_<i>_analytic.{json,csv}   AnalyticReport at sweep point i
//   point_<i>_empirical.{json,csv}  EmpiricalReport at sweep point i
//   sweep.csv                       one row per sweep point (analytic)
//   compare.csv                     analytic vs empirical with stderr columns
//   fig2_void.csv  fig3_access.csv  fig4_rates.csv
//   fig5_peruser.csv  fig6_network.csv
//   trajectory_p<i>_tier<m>.csv     decentralized traffic trajectories
//   centralized.json                centralized optimizer result
//
// The fig*.csv files share one long-form schema:
//   <sweep parameter>,tier,quantity,source,value,stderr
// where source is `analytic`, `empirical` or (centralized mode, with the
// optimizer's equivalent inverse bias as x) `optimizer`; stderr is empty
// except for empirical rows. The network throughput uses tier `network`.

#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hetnet/analytics.hpp"
#include "hetnet/io.hpp"
#include "hetnet/simcore.hpp"
#include "hetnet/traffic.hpp"

namespace hetnet::experiment {

enum class Mode {
  analytic,
  simulate,
  compare,
  traffic_decentralized,
  traffic_centralized
};

inline Mode parse_mode(const std::string &s) {
  if (s == "analytic")
    return Mode::analytic;
  if (s == "simulate")
    return Mode::simulate;
  if (s == "compare")
    return Mode::compare;
  if (s == "traffic-decentralized")
    return Mode::traffic_decentralized;
  if (s == "traffic-centralized")
    return Mode::traffic_centralized;
  throw ConfigError("/mode", "unknown mode '" + s + "'");
}

struct Sweep {
  //! "" (single point), inverse_bias, user_intensity or csma_threshold.
  std::string parameter;
  std::vector<double> values;
};

struct ExperimentSpec {
  std::string scenario; // NetworkModel JSON path
  Mode mode = Mode::analytic;
  Sweep sweep;
  int realizations = 100;
  double window_side = 2000.0;
  std::uint64_t seed = 1;
  int jobs = 1;
  int probe_grid = 1;
  int bootstrap_resamples = 200;
  std::string out_dir = "out";
  //! Traffic modes: minimum tier-M per-user throughput (bps).
  double c_min = 0.0;
  //! Decentralized mode: managed tier (1-based); 0 runs every tier 1..M-1.
  int managed_tier = 0;
};

inline void check(const ExperimentSpec &spec) {
  const auto &p = spec.sweep.parameter;
  if (!p.empty() && p != "inverse_bias" && p != "user_intensity" &&
      p != "csma_threshold")
    throw ConfigError("/sweep/parameter", "unknown sweep parameter '" + p + "'");
  if (!p.empty() && spec.sweep.values.empty())
    throw ConfigError("/sweep/values", "sweep needs at least one value");
  for (std::size_t i = 1; i < spec.sweep.values.size(); ++i)
    if (!(spec.sweep.values[i] > spec.sweep.values[i - 1]))
      throw ConfigError("/sweep/values/" + std::to_string(i),
                        "sweep values must be strictly increasing");
  const bool simulates =
      spec.mode == Mode::simulate || spec.mode == Mode::compare;
  if (simulates && spec.realizations < 1)
    throw ConfigError("/realizations",
                      "at least one realization is required in this mode");
  if (simulates && !(spec.window_side > 0.0))
    throw ConfigError("/window", "window side must be positive");
  if (spec.jobs < 0)
    throw ConfigError("/jobs", "jobs must be non-negative");
  if (spec.probe_grid < 1)
    throw ConfigError("/probe_grid", "probe grid must be at least 1");
  if (spec.c_min < 0.0)
    throw ConfigError("/c_min", "c_min must be non-negative");
}

//! Reads an experiment document: either a bare scenario (has "tiers") or
//! {"scenario": path, "mode", "sweep": {"parameter", "values"},
//!  "realizations", "window", "seed", "jobs", "probe_grid", "c_min",
//!  "managed_tier", "out"}. Relative scenario paths resolve against the
//! document's directory.
inline ExperimentSpec spec_from_file(const std::string &path) {
  using namespace io::detail;
  const io::json j = io::parse_json(io::read_file(path));
  ExperimentSpec s;
  if (j.is_object() && j.contains("tiers")) {
    s.scenario = path;
    return s;
  }
  known_keys(j,
             {"scenario", "mode", "sweep", "realizations", "window", "seed",
              "jobs", "probe_grid", "c_min", "managed_tier", "out",
              "bootstrap_resamples"},
             "");
  std::filesystem::path sc = string(j, "scenario", "");
  if (sc.is_relative())
    sc = std::filesystem::path(path).parent_path() / sc;
  s.scenario = sc.string();
  if (j.contains("mode"))
    s.mode = parse_mode(string(j, "mode", ""));
  if (j.contains("sweep")) {
    const auto &sw = j["sweep"];
    known_keys(sw, {"parameter", "values"}, "/sweep");
    s.sweep.parameter = string(sw, "parameter", "/sweep");
    s.sweep.values = numbers(member(sw, "values", "/sweep"), "/sweep/values");
  }
  auto integer = [&](const char *key, int fallback) {
    const double v = number_or(j, key, "", fallback);
    if (v != std::floor(v))
      throw ConfigError(std::string("/") + key, "expected an integer");
    return static_cast<int>(v);
  };
  s.realizations = integer("realizations", s.realizations);
  s.jobs = integer("jobs", s.jobs);
  s.probe_grid = integer("probe_grid", s.probe_grid);
  s.managed_tier = integer("managed_tier", s.managed_tier);
  s.bootstrap_resamples = integer("bootstrap_resamples", s.bootstrap_resamples);
  s.window_side = number_or(j, "window", "", s.window_side);
  s.c_min = number_or(j, "c_min", "", s.c_min);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned())
      throw ConfigError("/seed", "expected a non-negative integer");
    s.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("out"))
    s.out_dir = string(j, "out", "");
  return s;
}

inline ValidatedModel apply_sweep(const ValidatedModel &vm,
                                  const std::string &parameter, double x) {
  if (parameter == "inverse_bias")
    return vm.with_inverse_bias(x);
  if (parameter == "user_intensity")
    return vm.with_user_intensity(x);
  if (parameter == "csma_threshold")
    return vm.with_csma_threshold(x);
  return vm;
}

namespace detail {

struct FigureRow {
  std::string x, tier, quantity, source, value, stderr_;
};

class Figures {
public:
  explicit Figures(std::string parameter)
      : parameter_(parameter.empty() ? "point" : std::move(parameter)) {}

  void add(const std::string &file, FigureRow row) {
    files_[file].push_back(std::move(row));
  }

  void analytic(const std::string &x, const analytics::AnalyticReport &r) {
    for (std::size_t m = 0; m < r.tiers.size(); ++m) {
      const auto &t = r.tiers[m];
      const std::string k = std::to_string(m + 1);
      put("fig2_void.csv", x, k, "void_prob", t.void_prob);
      put("fig3_access.csv", x, k, "rho", t.rho);
      put("fig3_access.csv", x, k, "xi", t.xi);
      put("fig4_rates.csv", x, k, "rate_licensed", t.rate_licensed);
      put("fig4_rates.csv", x, k, "rate_unlicensed", t.rate_unlicensed);
      put("fig5_peruser.csv", x, k, "per_user_throughput",
          t.per_user_throughput);
    }
    put("fig6_network.csv", x, "network", "network_throughput",
        r.network_throughput);
  }

  void empirical(const std::string &x, const sim::EmpiricalReport &r) {
    for (std::size_t m = 0; m < r.tiers.size(); ++m) {
      const auto &t = r.tiers[m];
      const std::string k = std::to_string(m + 1);
      put("fig2_void.csv", x, k, "void_prob", t.void_prob);
      put("fig3_access.csv", x, k, "rho", t.rho);
      put("fig3_access.csv", x, k, "xi", t.xi);
      put("fig4_rates.csv", x, k, "rate_licensed", t.rate_licensed);
      put("fig4_rates.csv", x, k, "rate_unlicensed", t.rate_unlicensed);
      put("fig5_peruser.csv", x, k, "per_user_throughput",
          t.per_user_throughput);
    }
    put("fig6_network.csv", x, "network", "network_throughput",
        r.network_throughput);
  }

  void write(const std::filesystem::path &dir) const {
    for (const auto &[file, rows] : files_) {
      std::ostringstream os;
      os << parameter_ << ",tier,quantity,source,value,stderr\n";
      for (const auto &r : rows)
        os << r.x << ',' << r.tier << ',' << r.quantity << ',' << r.source
           << ',' << r.value << ',' << r.stderr_ << '\n';
      io::write_file((dir / file).string(), os.str());
    }
  }

private:
  void put(const std::string &file, const std::string &x,
           const std::string &tier, const std::string &q, double v) {
    add(file, {x, tier, q, "analytic", io::fmt(v), ""});
  }
  void put(const std::string &file, const std::string &x,
           const std::string &tier, const std::string &q,
           const sim::Estimate &e) {
    add(file, {x, tier, q, "empirical", io::fmt(e.value), io::fmt(e.stderr_)});
  }

  std::string parameter_;
  std::map<std::string, std::vector<FigureRow>> files_;
};

inline std::string sweep_header(const std::string &parameter, std::size_t M) {
  std::ostringstream os;
  os << (parameter.empty() ? "point" : parameter);
  const char *fields[] = {"theta", "void_prob", "rho", "rate_licensed",
                          "rate_unlicensed", "per_user_throughput"};
  for (const char *f : fields)
    for (std::size_t m = 0; m < M; ++m)
      os << ',' << f << '_' << m + 1;
  os << ",network_throughput\n";
  return os.str();
}

inline std::string sweep_row(const std::string &x,
                             const analytics::AnalyticReport &r) {
  std::ostringstream os;
  os << x;
  auto col = [&](auto field) {
    for (const auto &t : r.tiers)
      os << ',' << io::fmt(field(t));
  };
  col([](const analytics::TierReport &t) { return t.theta; });
  col([](const analytics::TierReport &t) { return t.void_prob; });
  col([](const analytics::TierReport &t) { return t.rho; });
  col([](const analytics::TierReport &t) { return t.rate_licensed; });
  col([](const analytics::TierReport &t) { return t.rate_unlicensed; });
  col([](const analytics::TierReport &t) { return t.per_user_throughput; });
  os << ',' << io::fmt(r.network_throughput) << '\n';
  return os.str();
}

inline std::string compare_rows(const std::string &x,
                                const analytics::AnalyticReport &a,
                                const sim::EmpiricalReport &e) {
  std::ostringstream os;
  for (std::size_t m = 0; m < a.tiers.size(); ++m) {
    const auto av = io::values(a.tiers[m]);
    const auto ev = io::values(e.tiers[m]);
    for (std::size_t i = 0; i < av.size(); ++i) {
      const double diff = ev[i].value - av[i];
      os << x << ',' << m + 1 << ',' << io::report_fields()[i] << ','
         << io::fmt(av[i]) << ',' << io::fmt(ev[i].value) << ','
         << io::fmt(ev[i].stderr_) << ',' << io::fmt(diff) << ','
         << io::fmt(ev[i].stderr_ > 0 ? diff / ev[i].stderr_ : 0.0) << '\n';
    }
  }
  const double diff = e.network_throughput.value - a.network_throughput;
  os << x << ",network,network_throughput," << io::fmt(a.network_throughput)
     << ',' << io::fmt(e.network_throughput.value) << ','
     << io::fmt(e.network_throughput.stderr_) << ',' << io::fmt(diff) << ','
     << io::fmt(e.network_throughput.stderr_ > 0
                    ? diff / e.network_throughput.stderr_
                    : 0.0)
     << '\n';
  return os.str();
}

} // namespace detail

//! Runs the experiment and writes its artifacts. Library errors propagate:
//! ConfigError, IOFailure, or a numeric error from the pipelines.
inline void run(const ExperimentSpec &spec) {
  check(spec);
  const ValidatedModel base = io::load_model(spec.scenario);
  const std::filesystem::path dir(spec.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw IOFailure("cannot create output directory '" + spec.out_dir + "'");

  std::vector<double> points = spec.sweep.values;
  const bool swept = !spec.sweep.parameter.empty();
  if (!swept)
    points = {0.0};
  auto label = [&](std::size_t i) {
    return swept ? io::fmt(points[i]) : std::to_string(i);
  };
  auto file = [&](const std::string &name) { return (dir / name).string(); };

  sim::SimConfig cfg;
  cfg.window_side = spec.window_side;
  cfg.realizations = spec.realizations;
  cfg.seed = spec.seed;
  cfg.jobs = spec.jobs;
  cfg.probe_grid = spec.probe_grid;
  cfg.bootstrap_resamples = spec.bootstrap_resamples;

  detail::Figures figures(spec.sweep.parameter);
  std::string sweep_csv = detail::sweep_header(spec.sweep.parameter,
                                               base.size());
  std::string compare_csv = std::string(swept ? spec.sweep.parameter : "point") +
                            ",tier,quantity,analytic,empirical,stderr,diff,z\n";
  io::json traffic = io::json::array();

  for (std::size_t i = 0; i < points.size(); ++i) {
    const ValidatedModel vm =
        apply_sweep(base, spec.sweep.parameter, points[i]);
    const std::string x = label(i);
    const std::string stem = "point_" + std::to_string(i);

    std::optional<analytics::AnalyticReport> a;
    if (spec.mode != Mode::simulate) {
      a = analytics::evaluate(vm);
      io::write_file(file(stem + "_analytic.json"),
                     io::report_to_json(*a).dump(2) + "\n");
      io::write_file(file(stem + "_analytic.csv"), io::report_to_csv(*a));
      figures.analytic(x, *a);
      sweep_csv += detail::sweep_row(x, *a);
    }
    if (spec.mode == Mode::simulate || spec.mode == Mode::compare) {
      const auto e = sim::simulate(vm, cfg).report;
      io::write_file(file(stem + "_empirical.json"),
                     io::report_to_json(e).dump(2) + "\n");
      io::write_file(file(stem + "_empirical.csv"), io::report_to_csv(e));
      figures.empirical(x, e);
      if (a)
        compare_csv += detail::compare_rows(x, *a, e);
    }
    if (spec.mode == Mode::traffic_decentralized) {
      traffic::DecentralizedOptions opt;
      opt.c_min = spec.c_min;
      std::vector<std::size_t> tiers;
      if (spec.managed_tier > 0) {
        if (static_cast<std::size_t>(spec.managed_tier) > vm.last())
          throw ConfigError("/managed_tier",
                            "managed tier must be in 1..M-1");
        tiers.push_back(static_cast<std::size_t>(spec.managed_tier - 1));
      } else {
        for (std::size_t m = 0; m < vm.last(); ++m)
          tiers.push_back(m);
      }
      for (std::size_t m : tiers) {
        const auto s = traffic::decentralized_run(vm, m, {}, opt);
        std::ostringstream os;
        traffic::write_trajectory_csv(os, s);
        io::write_file(file("trajectory_p" + std::to_string(i) + "_tier" +
                            std::to_string(m + 1) + ".csv"),
                       os.str());
        io::json t;
        t["point"] = x;
        t["tier"] = m + 1;
        t["periods"] = s.n;
        t["converged"] = s.converged;
        t["residual"] = s.residual;
        t["c_star"] = s.c_star;
        t["omega"] = s.omega;
        t["rejected_steps"] = s.rejected_steps;
        traffic.push_back(t);
      }
    }
  }

  if (spec.mode == Mode::traffic_centralized) {
    traffic::CentralizedOptions opt;
    opt.c_min = spec.c_min;
    opt.seed = spec.seed;
    opt.common_bias_ray = spec.sweep.parameter == "inverse_bias" || !swept;
    const ValidatedModel ref =
        opt.common_bias_ray ? base.with_inverse_bias(1.0) : base;
    const auto res = traffic::centralized_optimize(ref, opt);
    io::json j;
    j["common_bias_ray"] = opt.common_bias_ray;
    j["c_min"] = spec.c_min;
    j["network_throughput"] = res.network_throughput;
    j["omega"] = res.omega;
    j["inverse_bias"] = res.inverse_bias;
    j["equivalent_inverse_bias"] = res.equivalent_inverse_bias;
    j["evaluations"] = res.evaluations;
    io::write_file(file("centralized.json"), j.dump(2) + "\n");
    figures.add("fig6_network.csv",
                {io::fmt(res.equivalent_inverse_bias), "network",
                 "network_throughput", "optimizer",
                 io::fmt(res.network_throughput), ""});
  }

  if (spec.mode != Mode::simulate)
    io::write_file(file("sweep.csv"), sweep_csv);
  if (spec.mode == Mode::compare)
    io::write_file(file("compare.csv"), compare_csv);
  if (spec.mode == Mode::traffic_decentralized)
    io::write_file(file("decentralized.json"), traffic.dump(2) + "\n");
  figures.write(dir);
}

} // namespace hetnet::experiment
