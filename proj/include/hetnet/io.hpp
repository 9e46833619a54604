#pragma once

// JSON scenario files and JSON/CSV report serialization.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hetnet/analytics.hpp"
#include "hetnet/errors.hpp"
#include "hetnet/model.hpp"
#include "hetnet/simcore.hpp"

namespace hetnet::io {

using json = nlohmann::ordered_json;

//==============================================================================
// Reading

namespace detail {

inline const json &member(const json &obj, const std::string &key,
                          const std::string &ptr) {
  if (!obj.is_object())
    throw ConfigError(ptr, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end())
    throw ConfigError(ptr + "/" + key, "required field is missing");
  return *it;
}

inline double number(const json &v, const std::string &ptr) {
  if (!v.is_number())
    throw ConfigError(ptr, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x))
    throw ConfigError(ptr, "expected a finite number");
  return x;
}

inline double number(const json &obj, const std::string &key,
                     const std::string &ptr) {
  return number(member(obj, key, ptr), ptr + "/" + key);
}

inline double number_or(const json &obj, const std::string &key,
                        const std::string &ptr, double fallback) {
  return obj.contains(key) ? number(obj[key], ptr + "/" + key) : fallback;
}

inline bool boolean_or(const json &obj, const std::string &key,
                       const std::string &ptr, bool fallback) {
  if (!obj.contains(key))
    return fallback;
  if (!obj[key].is_boolean())
    throw ConfigError(ptr + "/" + key, "expected a boolean");
  return obj[key].get<bool>();
}

inline std::string string(const json &obj, const std::string &key,
                          const std::string &ptr) {
  const json &v = member(obj, key, ptr);
  if (!v.is_string())
    throw ConfigError(ptr + "/" + key, "expected a string");
  return v.get<std::string>();
}

inline std::vector<double> numbers(const json &v, const std::string &ptr) {
  if (!v.is_array())
    throw ConfigError(ptr, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(number(v[i], ptr + "/" + std::to_string(i)));
  return out;
}

inline void known_keys(const json &obj, const std::vector<std::string> &keys,
                       const std::string &ptr) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (std::find(keys.begin(), keys.end(), it.key()) == keys.end())
      throw ConfigError(ptr + "/" + it.key(), "unknown field");
}

// Run a constructor that may throw a library error and report it at `ptr`.
template <typename F> auto at(const std::string &ptr, F &&f) {
  try {
    return f();
  } catch (const ConfigError &) {
    throw;
  } catch (const Error &e) {
    throw ConfigError(ptr, e.what());
  }
}

} // namespace detail

inline ChannelModel channel_from_json(const json &j, const std::string &ptr) {
  using namespace detail;
  const std::string kind = string(j, "kind", ptr);
  known_keys(j, {"kind", "mean", "mu_db", "sigma_db", "values", "probs"}, ptr);
  return at(ptr, [&] {
    if (kind == "deterministic")
      return ChannelModel::deterministic(number_or(j, "mean", ptr, 1.0));
    if (kind == "exponential")
      return ChannelModel::exponential(number_or(j, "mean", ptr, 1.0));
    if (kind == "lognormal")
      return ChannelModel::lognormal_db(number_or(j, "mu_db", ptr, 0.0),
                                        number(j, "sigma_db", ptr));
    if (kind == "exp_lognormal")
      return ChannelModel::exp_lognormal_db(number_or(j, "mean", ptr, 1.0),
                                            number_or(j, "mu_db", ptr, 0.0),
                                            number(j, "sigma_db", ptr));
    if (kind == "tabulated" || kind == "tabulated_lognormal") {
      auto c = ChannelModel::tabulated(
          numbers(member(j, "values", ptr), ptr + "/values"),
          numbers(member(j, "probs", ptr), ptr + "/probs"));
      if (j.contains("sigma_db") || j.contains("mu_db"))
        c = c.times_shadow(db_to_ln(number_or(j, "mu_db", ptr, 0.0)),
                           db_to_ln(number_or(j, "sigma_db", ptr, 0.0)));
      return c;
    }
    throw ConfigError(ptr + "/kind", "unknown channel kind '" + kind + "'");
  });
}

inline WeightModel weight_from_json(const json &j, const std::string &ptr) {
  using namespace detail;
  known_keys(j, {"kind", "bias", "distribution"}, ptr);
  WeightModel w;
  const std::string kind = string(j, "kind", ptr);
  if (kind == "constant")
    w.kind = WeightModel::Kind::constant;
  else if (kind == "biased_power")
    w.kind = WeightModel::Kind::biased_power;
  else if (kind == "biased_power_shadowing")
    w.kind = WeightModel::Kind::biased_power_shadowing;
  else if (kind == "random")
    w.kind = WeightModel::Kind::random;
  else
    throw ConfigError(ptr + "/kind", "unknown weight kind '" + kind + "'");
  w.bias = number_or(j, "bias", ptr, 1.0);
  if (w.kind == WeightModel::Kind::random)
    w.distribution = channel_from_json(member(j, "distribution", ptr),
                                       ptr + "/distribution");
  return w;
}

inline TierSpec tier_from_json(const json &j, const std::string &ptr) {
  using namespace detail;
  known_keys(j,
             {"name", "intensity", "power", "weight", "licensed_channel",
              "unlicensed_channel", "max_backoff", "sensing_area",
              "csma_threshold_enabled"},
             ptr);
  TierSpec t;
  if (j.contains("name")) {
    if (!j["name"].is_string())
      throw ConfigError(ptr + "/name", "expected a string");
    t.name = j["name"].get<std::string>();
  }
  t.intensity = number(j, "intensity", ptr);
  t.power = number(j, "power", ptr);
  t.weight = weight_from_json(member(j, "weight", ptr), ptr + "/weight");
  t.licensed_channel = channel_from_json(member(j, "licensed_channel", ptr),
                                         ptr + "/licensed_channel");
  t.unlicensed_channel = channel_from_json(
      member(j, "unlicensed_channel", ptr), ptr + "/unlicensed_channel");
  const json &b = member(j, "max_backoff", ptr);
  if (b.is_string()) {
    if (b.get<std::string>() != "unlimited")
      throw ConfigError(ptr + "/max_backoff",
                        "expected a number or \"unlimited\"");
    t.max_backoff.reset();
  } else {
    t.max_backoff = number(b, ptr + "/max_backoff");
  }
  t.sensing_area = number_or(j, "sensing_area", ptr, 0.0);
  t.csma_threshold_enabled =
      boolean_or(j, "csma_threshold_enabled", ptr, true);
  return t;
}

inline NetworkModel model_from_json(const json &j) {
  using namespace detail;
  const std::string ptr;
  known_keys(j,
             {"tiers", "user_intensity", "pathloss_exponent", "csma_threshold",
              "bandwidth_licensed", "bandwidth_unlicensed", "sensing_overlap",
              "weighted_sensing", "threshold_gain"},
             ptr);
  NetworkModel n;
  const json &tiers = member(j, "tiers", ptr);
  if (!tiers.is_array())
    throw ConfigError("/tiers", "expected an array");
  for (std::size_t i = 0; i < tiers.size(); ++i)
    n.tiers.push_back(tier_from_json(tiers[i], "/tiers/" + std::to_string(i)));
  n.user_intensity = number(j, "user_intensity", ptr);
  n.pathloss_exponent = number(j, "pathloss_exponent", ptr);
  n.csma_threshold = number(j, "csma_threshold", ptr);
  n.bandwidth_licensed = number(j, "bandwidth_licensed", ptr);
  n.bandwidth_unlicensed = number(j, "bandwidth_unlicensed", ptr);
  if (j.contains("sensing_overlap")) {
    const json &a = j["sensing_overlap"];
    if (!a.is_array())
      throw ConfigError("/sensing_overlap", "expected an array of arrays");
    for (std::size_t i = 0; i < a.size(); ++i)
      n.sensing_overlap.push_back(
          numbers(a[i], "/sensing_overlap/" + std::to_string(i)));
  }
  n.weighted_sensing = boolean_or(j, "weighted_sensing", ptr, false);
  if (j.contains("threshold_gain")) {
    const std::string g = string(j, "threshold_gain", ptr);
    if (g == "full")
      n.threshold_gain = ThresholdGain::full;
    else if (g == "fading_only")
      n.threshold_gain = ThresholdGain::fading_only;
    else
      throw ConfigError("/threshold_gain",
                        "expected \"full\" or \"fading_only\"");
  }
  return n;
}

inline json parse_json(const std::string &text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error &e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
}

inline std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IOFailure("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw IOFailure("cannot open '" + path + "' for writing");
  out << content;
  if (!out)
    throw IOFailure("write to '" + path + "' failed");
}

//! Parse and validate a scenario; validation failures become ConfigError.
inline ValidatedModel load_model_text(const std::string &text) {
  NetworkModel n = model_from_json(parse_json(text));
  return detail::at("", [&] { return validate(std::move(n)); });
}

inline ValidatedModel load_model(const std::string &path) {
  return load_model_text(read_file(path));
}

//==============================================================================
// Writing

inline json channel_to_json(const ChannelModel &c) {
  json j;
  j["kind"] = c.kind_name();
  const double to_db = 10.0 / std::log(10.0);
  switch (c.base()) {
  case BaseLaw::tabulated:
    j["kind"] = "tabulated";
    j["values"] = c.atoms();
    j["probs"] = c.atom_probs();
    break;
  case BaseLaw::deterministic:
    if (!c.shadowed())
      j["mean"] = c.scale();
    break;
  default:
    j["mean"] = c.scale();
  }
  if (c.shadowed()) {
    j["mu_db"] = c.shadow_mu_ln() * to_db;
    j["sigma_db"] = c.shadow_sigma_ln() * to_db;
  }
  return j;
}

inline json model_to_json(const NetworkModel &n) {
  json j;
  json tiers = json::array();
  for (const auto &t : n.tiers) {
    json jt;
    jt["name"] = t.name;
    jt["intensity"] = t.intensity;
    jt["power"] = t.power;
    json w;
    w["kind"] = to_string(t.weight.kind);
    w["bias"] = t.weight.bias;
    if (t.weight.kind == WeightModel::Kind::random)
      w["distribution"] = channel_to_json(t.weight.distribution);
    jt["weight"] = w;
    jt["licensed_channel"] = channel_to_json(t.licensed_channel);
    jt["unlicensed_channel"] = channel_to_json(t.unlicensed_channel);
    if (t.max_backoff)
      jt["max_backoff"] = *t.max_backoff;
    else
      jt["max_backoff"] = "unlimited";
    jt["sensing_area"] = t.sensing_area;
    jt["csma_threshold_enabled"] = t.csma_threshold_enabled;
    tiers.push_back(jt);
  }
  j["tiers"] = tiers;
  j["user_intensity"] = n.user_intensity;
  j["pathloss_exponent"] = n.pathloss_exponent;
  j["csma_threshold"] = n.csma_threshold;
  j["bandwidth_licensed"] = n.bandwidth_licensed;
  j["bandwidth_unlicensed"] = n.bandwidth_unlicensed;
  if (!n.sensing_overlap.empty())
    j["sensing_overlap"] = n.sensing_overlap;
  j["weighted_sensing"] = n.weighted_sensing;
  j["threshold_gain"] =
      n.threshold_gain == ThresholdGain::full ? "full" : "fading_only";
  return j;
}

//! Shortest round-trip-safe text for a double; stable across runs.
inline std::string fmt(double x) {
  if (std::isnan(x))
    return "nan";
  if (std::isinf(x))
    return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

inline const std::vector<std::string> &report_fields() {
  static const std::vector<std::string> f = {
      "theta",          "void_prob",       "non_void",
      "mean_load",      "xi",              "rho",
      "rate_licensed",  "rate_unlicensed", "link_throughput",
      "per_user_throughput"};
  return f;
}

inline std::vector<double> values(const analytics::TierReport &t) {
  return {t.theta,         t.void_prob,       t.non_void,
          t.mean_load,     t.xi,              t.rho,
          t.rate_licensed, t.rate_unlicensed, t.link_throughput,
          t.per_user_throughput};
}

inline std::vector<sim::Estimate> values(const sim::EmpiricalTier &t) {
  return {t.theta,         t.void_prob,       t.non_void,
          t.mean_load,     t.xi,              t.rho,
          t.rate_licensed, t.rate_unlicensed, t.link_throughput,
          t.per_user_throughput};
}

inline json report_to_json(const analytics::AnalyticReport &r) {
  json j;
  json tiers = json::array();
  for (std::size_t m = 0; m < r.tiers.size(); ++m) {
    json t;
    t["tier"] = m + 1;
    const auto v = values(r.tiers[m]);
    for (std::size_t i = 0; i < v.size(); ++i)
      t[report_fields()[i]] = v[i];
    t["zeta"] = r.tiers[m].zeta;
    tiers.push_back(t);
  }
  j["tiers"] = tiers;
  j["network_throughput"] = r.network_throughput;
  return j;
}

inline json report_to_json(const sim::EmpiricalReport &r) {
  json j;
  json tiers = json::array();
  for (std::size_t m = 0; m < r.tiers.size(); ++m) {
    json t;
    t["tier"] = m + 1;
    const auto v = values(r.tiers[m]);
    for (std::size_t i = 0; i < v.size(); ++i) {
      t[report_fields()[i]] = v[i].value;
      t["stderr_" + report_fields()[i]] = v[i].stderr_;
    }
    t["samples_licensed"] = r.tiers[m].samples_licensed;
    t["samples_unlicensed"] = r.tiers[m].samples_unlicensed;
    tiers.push_back(t);
  }
  j["tiers"] = tiers;
  j["network_throughput"] = r.network_throughput.value;
  j["stderr_network_throughput"] = r.network_throughput.stderr_;
  j["n_realizations"] = r.n_realizations;
  j["skipped_licensed"] = r.skipped_licensed;
  j["skipped_unlicensed"] = r.skipped_unlicensed;
  j["empty_probes"] = r.empty_probes;
  j["hard_core_violations"] = r.hard_core_violations;
  return j;
}

//! One row per tier plus a `network` row carrying the network throughput.
inline std::string report_to_csv(const analytics::AnalyticReport &r) {
  std::ostringstream os;
  os << "tier";
  for (const auto &f : report_fields())
    os << ',' << f;
  os << ",network_throughput\n";
  for (std::size_t m = 0; m < r.tiers.size(); ++m) {
    os << m + 1;
    for (double v : values(r.tiers[m]))
      os << ',' << fmt(v);
    os << ",\n";
  }
  os << "network";
  for (std::size_t i = 0; i < report_fields().size(); ++i)
    os << ',';
  os << ',' << fmt(r.network_throughput) << '\n';
  return os.str();
}

inline std::string report_to_csv(const sim::EmpiricalReport &r) {
  std::ostringstream os;
  os << "tier";
  for (const auto &f : report_fields())
    os << ',' << f << ",stderr_" << f;
  os << ",network_throughput,stderr_network_throughput,n_realizations\n";
  for (std::size_t m = 0; m < r.tiers.size(); ++m) {
    os << m + 1;
    for (const auto &e : values(r.tiers[m]))
      os << ',' << fmt(e.value) << ',' << fmt(e.stderr_);
    os << ",,," << r.n_realizations << '\n';
  }
  os << "network";
  for (std::size_t i = 0; i < report_fields().size(); ++i)
    os << ",,";
  os << ',' << fmt(r.network_throughput.value) << ','
     << fmt(r.network_throughput.stderr_) << ',' << r.n_realizations << '\n';
  return os.str();
}

} // namespace hetnet::io
