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

#ifndef RELAY_TRUTH_CHANNEL_MODEL_H_
#define RELAY_TRUTH_CHANNEL_MODEL_H_

#include <optional>
#include <span>

namespace relay_truth {

// Converts a decibel value to a linear power ratio. Throws std::domain_error
// on non-finite input.
double DbToLinear(double db);

// One relay's links towards the destination and the eavesdropper, reduced to
// linear SNRs. Immutable once built.
class RelayChannel {
 public:
  // `bandwidth` is W, the scale factor in front of log2.
  static RelayChannel FromSnr(int id, double snr_d, double snr_e,
                              double bandwidth = 1.0);

  // Builds SNR = P * h^2 / sigma^2 for both links.
  static RelayChannel FromGains(int id, double power, double gain_d,
                                double gain_e, double noise_power,
                                double bandwidth = 1.0);

  int id() const { return id_; }
  double snr_d() const { return snr_d_; }
  double snr_e() const { return snr_e_; }
  double bandwidth() const { return bandwidth_; }

  bool operator==(const RelayChannel&) const = default;

 private:
  RelayChannel(int id, double snr_d, double snr_e, double bandwidth)
      : id_(id), snr_d_(snr_d), snr_e_(snr_e), bandwidth_(bandwidth) {}

  int id_;
  double snr_d_;
  double snr_e_;
  double bandwidth_;
};

// Source-to-destination and source-to-eavesdropper SNRs.
class DirectLink {
 public:
  static DirectLink FromSnr(double snr_sd, double snr_se);
  static DirectLink FromGains(double power, double gain_sd, double gain_se,
                              double noise_power);

  double snr_sd() const { return snr_sd_; }
  double snr_se() const { return snr_se_; }

  bool operator==(const DirectLink&) const = default;

 private:
  DirectLink(double snr_sd, double snr_se) : snr_sd_(snr_sd), snr_se_(snr_se) {}

  double snr_sd_;
  double snr_se_;
};

// W * log2(1 + snr). Used for both C_{i,d} and C_{i,e}.
double ChannelRate(double snr, double bandwidth = 1.0);

// [W log2((1 + snr_d) / (1 + snr_e))]^+. The clamp is applied after the log.
double RelaySecrecyRate(const RelayChannel& channel);

// MRC ratio (1 + snr_sd + sum snr_d) / (1 + snr_se + sum snr_e).
double MrcRatio(const DirectLink& direct,
                std::span<const RelayChannel> selected);

// System secrecy rate [W log2(MrcRatio)]^+ over the selected relays.
//
// All selected relays must share one bandwidth; when `bandwidth` is given the
// relays must also match it. With no relays and no explicit bandwidth, W = 1.
// Throws ConfigError on mismatched bandwidths.
double SystemSecrecyRate(const DirectLink& direct,
                         std::span<const RelayChannel> selected,
                         std::optional<double> bandwidth = std::nullopt);

}  // namespace relay_truth

#endif  // RELAY_TRUTH_CHANNEL_MODEL_H_
