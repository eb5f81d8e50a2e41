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

#ifndef RELAY_TRUTH_SCENARIO_H_
#define RELAY_TRUTH_SCENARIO_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "relay_truth/analysis.h"
#include "relay_truth/channel_model.h"
#include "relay_truth/mechanisms.h"
#include "relay_truth/priors.h"
#include "relay_truth/selection.h"

namespace relay_truth {

inline constexpr int kScenarioSchemaVersion = 1;

// A relay as written in a scenario: either a true secrecy rate or a linear
// SNR pair, never both.
struct RelayInput {
  int id = 0;
  std::optional<double> rate;
  std::optional<double> snr_d;
  std::optional<double> snr_e;

  bool has_snr() const { return snr_d.has_value(); }
  bool operator==(const RelayInput&) const = default;
};

struct RelaySet {
  std::string label;
  // Sorted by id; ids are exactly 1..N.
  std::vector<RelayInput> relays;

  bool has_snr() const;
  bool operator==(const RelaySet&) const = default;
};

struct Scenario {
  int schema_version = kScenarioSchemaVersion;
  std::string name;
  double price = 1.0;
  // nullopt means "auto": choose K with OptimalKSelection.
  std::optional<int> k;
  double bandwidth = 1.0;
  std::optional<DirectLink> direct;
  std::vector<RelaySet> relay_sets;
  Prior prior = Prior::Exponential();
  McConfig mc;
  ReportGrid grid;
  ReportGrid true_rate_grid{0.0, 3.0, 0.1};
  std::vector<Mechanism> mechanisms{Mechanism::kAgv, Mechanism::kVcgExpected,
                                    Mechanism::kVcgRealized,
                                    Mechanism::kBaseline};
  // Empty means 1..N.
  std::vector<int> k_values;
  int focus_relay = 1;

  bool operator==(const Scenario&) const = default;
};

// Parses and validates scenario JSON. dB fields are converted to linear here
// and nowhere else. Throws ConfigError naming the offending field, including
// unknown keys.
Scenario ParseScenario(std::string_view json_text);
Scenario LoadScenario(const std::filesystem::path& path);

// Canonical JSON (linear SNRs, explicit relay_sets). ParseScenario of the
// result reproduces the scenario exactly.
std::string SerializeScenario(const Scenario& scenario);

// True secrecy rate of each relay, by id.
std::vector<double> TrueRates(const RelaySet& set, double bandwidth);
// Requires SNR pairs on every relay.
ReportVector ChannelReports(const RelaySet& set, double bandwidth);

// Game for one relay set; "auto" K is resolved with OptimalKSelection.
GameSpec ToGameSpec(const Scenario& scenario, const RelaySet& set);

}  // namespace relay_truth

#endif  // RELAY_TRUTH_SCENARIO_H_
