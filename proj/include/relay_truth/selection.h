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

#ifndef RELAY_TRUTH_SELECTION_H_
#define RELAY_TRUTH_SELECTION_H_

#include <optional>
#include <vector>

#include "relay_truth/channel_model.h"

namespace relay_truth {

// One relay's report to the source: a secrecy rate and, optionally, the SNR
// pair it was derived from.
struct ReportEntry {
  int id = 0;
  double rate = 0.0;
  std::optional<RelayChannel> channel;

  bool operator==(const ReportEntry&) const = default;
};

// Reported secrecy rates of N >= 1 relays. Ids are unique and >= 1; rates are
// finite and >= 0. When an entry carries an SNR pair, its rate must equal
// RelaySecrecyRate of that pair.
class ReportVector {
 public:
  // Relay ids are 1..N in order.
  static ReportVector FromRates(const std::vector<double>& rates);
  static ReportVector FromChannels(const std::vector<RelayChannel>& channels);
  static ReportVector FromEntries(std::vector<ReportEntry> entries);

  int size() const { return static_cast<int>(entries_.size()); }
  const std::vector<ReportEntry>& entries() const { return entries_; }
  const ReportEntry& at(int position) const { return entries_.at(position); }

  // Position of relay `id`, or throws ArgumentError.
  int PositionOf(int id) const;
  double RateOf(int id) const { return entries_[PositionOf(id)].rate; }
  bool has_channels() const;
  std::vector<double> rates() const;

  // Copy with relay `id` reporting `rate`; drops that entry's SNR pair.
  ReportVector WithReport(int id, double rate) const;
  // Copy with relay `id` removed. Requires size() >= 2.
  ReportVector Without(int id) const;

  bool operator==(const ReportVector&) const = default;

 private:
  explicit ReportVector(std::vector<ReportEntry> entries)
      : entries_(std::move(entries)) {}

  std::vector<ReportEntry> entries_;
};

struct SelectionOutcome {
  // Selected ids, best first.
  std::vector<int> selected;
  // Every id in descending report order (ties: lower id first).
  std::vector<int> ranking;
  // Sum of the selected relays' reported rates.
  double selected_total = 0.0;

  bool Contains(int id) const;
  bool operator==(const SelectionOutcome&) const = default;
};

// Top-k relays by reported rate; ties go to the lower id. Requires
// 1 <= k <= N.
SelectionOutcome SelectTopK(const ReportVector& reports, int k);

// snr_d / snr_e with the conventions snr_e = 0 < snr_d -> +inf and
// snr_d = snr_e = 0 -> 1.
double SnrRatio(const RelayChannel& channel);

struct OptimalKResult {
  int k = 0;
  SelectionOutcome outcome;
  // Psi_1 .. Psi_k: MRC ratio after adding the i best relays.
  std::vector<double> psi;
};

// Greedy relay-count choice: relays are ordered by SnrRatio (descending, ties
// to lower id) and added while Psi_i < ratio of the next relay.
OptimalKResult OptimalKSelection(const DirectLink& direct,
                                 const ReportVector& reports);

struct SecrecySweepPoint {
  int k = 0;
  double psi = 0.0;
  double secrecy_rate = 0.0;
};

// System secrecy rate when the top-k relays in SnrRatio order are used, for
// k = 1..N.
std::vector<SecrecySweepPoint> SecrecyVsKSweep(const DirectLink& direct,
                                               const ReportVector& reports);

}  // namespace relay_truth

#endif  // RELAY_TRUTH_SELECTION_H_
