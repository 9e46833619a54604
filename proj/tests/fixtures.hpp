#pragma once

// Scenarios shared by the test programs.

#include <cmath>
#include <optional>

#include "hetnet/model.hpp"

namespace fixtures {

using namespace hetnet;

//! The four-tier reference deployment (macro, pico, femto, WiFi).
inline NetworkModel four_tier(double delta = 4.481) {
  NetworkModel n;
  n.user_intensity = 500e-6;
  n.pathloss_exponent = 4.0;
  n.csma_threshold = delta;
  n.bandwidth_licensed = 100e6;
  n.bandwidth_unlicensed = 160e6;
  const double power[4] = {20.0, 1.0, 0.2, 0.1};
  const double intensity[4] = {5e-6, 5e-5, 2.5e-4, 5e-4};
  const std::optional<double> backoff[4] = {std::nullopt, 2.0, 2.0, 1.0};
  const char *name[4] = {"macro", "pico", "femto", "wifi"};
  for (int k = 0; k < 4; ++k) {
    TierSpec t;
    t.name = name[k];
    t.intensity = intensity[k];
    t.power = power[k];
    t.weight.kind = WeightModel::Kind::biased_power_shadowing;
    t.weight.bias = 1.0;
    t.licensed_channel = ChannelModel::exp_lognormal_db(1.0, 0.0, 3.0);
    t.unlicensed_channel = t.licensed_channel;
    t.max_backoff = backoff[k];
    t.sensing_area = 900.0 * M_PI;
    n.tiers.push_back(t);
  }
  return n;
}

//! M statistically identical tiers with constant unit weights.
inline NetworkModel identical(int M, double lambda, double mu) {
  NetworkModel n;
  n.user_intensity = mu;
  n.pathloss_exponent = 4.0;
  n.csma_threshold = 1.0;
  n.bandwidth_licensed = 1e6;
  n.bandwidth_unlicensed = 1e6;
  for (int k = 0; k < M; ++k) {
    TierSpec t;
    t.intensity = lambda;
    t.weight.kind = WeightModel::Kind::constant;
    t.max_backoff = 1.0;
    t.sensing_area = 100.0;
    n.tiers.push_back(t);
  }
  return n;
}

} // namespace fixtures
