// Copyright 2026 The relay-truth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "relay_truth/channel_model.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "relay_truth/errors.h"

namespace relay_truth {
namespace {

void RequireSnr(double snr, const char* what) {
  if (!std::isfinite(snr) || snr < 0.0) {
    throw ArgumentError(std::string(what) + " must be finite and >= 0, got " +
                        std::to_string(snr));
  }
}

void RequireBandwidth(double bandwidth) {
  if (!std::isfinite(bandwidth) || bandwidth <= 0.0) {
    throw ArgumentError("bandwidth must be finite and > 0, got " +
                        std::to_string(bandwidth));
  }
}

double GainToSnr(double power, double gain, double noise_power) {
  if (!std::isfinite(noise_power) || noise_power <= 0.0) {
    throw ArgumentError("noise power must be > 0");
  }
  if (!std::isfinite(power) || power < 0.0) {
    throw ArgumentError("transmit power must be >= 0");
  }
  if (!std::isfinite(gain)) throw ArgumentError("channel gain must be finite");
  return power * gain * gain / noise_power;
}

}  // namespace

double DbToLinear(double db) {
  if (!std::isfinite(db)) {
    throw std::domain_error("decibel value must be finite");
  }
  return std::pow(10.0, db / 10.0);
}

RelayChannel RelayChannel::FromSnr(int id, double snr_d, double snr_e,
                                   double bandwidth) {
  if (id < 1) throw ArgumentError("relay id must be >= 1");
  RequireSnr(snr_d, "snr_d");
  RequireSnr(snr_e, "snr_e");
  RequireBandwidth(bandwidth);
  return RelayChannel(id, snr_d, snr_e, bandwidth);
}

RelayChannel RelayChannel::FromGains(int id, double power, double gain_d,
                                     double gain_e, double noise_power,
                                     double bandwidth) {
  return FromSnr(id, GainToSnr(power, gain_d, noise_power),
                 GainToSnr(power, gain_e, noise_power), bandwidth);
}

DirectLink DirectLink::FromSnr(double snr_sd, double snr_se) {
  RequireSnr(snr_sd, "snr_sd");
  RequireSnr(snr_se, "snr_se");
  return DirectLink(snr_sd, snr_se);
}

DirectLink DirectLink::FromGains(double power, double gain_sd, double gain_se,
                                 double noise_power) {
  return FromSnr(GainToSnr(power, gain_sd, noise_power),
                 GainToSnr(power, gain_se, noise_power));
}

double ChannelRate(double snr, double bandwidth) {
  return bandwidth * std::log2(1.0 + snr);
}

double RelaySecrecyRate(const RelayChannel& channel) {
  const double rate = channel.bandwidth() *
                      std::log2((1.0 + channel.snr_d()) / (1.0 + channel.snr_e()));
  return std::max(rate, 0.0);
}

double MrcRatio(const DirectLink& direct,
                std::span<const RelayChannel> selected) {
  double num = 1.0 + direct.snr_sd();
  double den = 1.0 + direct.snr_se();
  for (const RelayChannel& c : selected) {
    num += c.snr_d();
    den += c.snr_e();
  }
  return num / den;
}

double SystemSecrecyRate(const DirectLink& direct,
                         std::span<const RelayChannel> selected,
                         std::optional<double> bandwidth) {
  double w = bandwidth.value_or(selected.empty() ? 1.0
                                                 : selected.front().bandwidth());
  RequireBandwidth(w);
  for (const RelayChannel& c : selected) {
    if (c.bandwidth() != w) {
      throw ConfigError("relay " + std::to_string(c.id()) +
                        " bandwidth differs from the system bandwidth");
    }
  }
  return std::max(w * std::log2(MrcRatio(direct, selected)), 0.0);
}

}  // namespace relay_truth
