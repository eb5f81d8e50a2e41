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

#include "relay_truth/selection.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "relay_truth/errors.h"

namespace relay_truth {
namespace {

constexpr double kRateConsistencyTol = 1e-12;

void Validate(const std::vector<ReportEntry>& entries) {
  if (entries.empty()) throw ArgumentError("report vector must be non-empty");
  std::set<int> ids;
  for (const ReportEntry& e : entries) {
    if (e.id < 1) throw ArgumentError("relay ids must be >= 1");
    if (!ids.insert(e.id).second) {
      throw ArgumentError("duplicate relay id " + std::to_string(e.id));
    }
    if (!std::isfinite(e.rate) || e.rate < 0.0) {
      throw ArgumentError("relay " + std::to_string(e.id) +
                          " reported rate must be finite and >= 0");
    }
    if (e.channel) {
      if (e.channel->id() != e.id) {
        throw ArgumentError("relay " + std::to_string(e.id) +
                            " carries a channel with a different id");
      }
      const double expected = RelaySecrecyRate(*e.channel);
      if (std::abs(expected - e.rate) >
          kRateConsistencyTol * std::max(1.0, expected)) {
        throw ArgumentError("relay " + std::to_string(e.id) +
                            " reported rate disagrees with its SNR pair");
      }
    }
  }
}

// Descending by key, ties to the lower id.
template <typename Key>
std::vector<int> RankPositions(const std::vector<ReportEntry>& entries,
                               Key key) {
  std::vector<int> order(entries.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double ka = key(entries[a]);
    const double kb = key(entries[b]);
    if (ka != kb) return ka > kb;
    return entries[a].id < entries[b].id;
  });
  return order;
}

std::vector<RelayChannel> ChannelsInRatioOrder(const ReportVector& reports) {
  if (!reports.has_channels()) {
    throw ArgumentError("relay-count selection needs SNR pairs for every relay");
  }
  const std::vector<int> order =
      RankPositions(reports.entries(), [](const ReportEntry& e) {
        return SnrRatio(*e.channel);
      });
  std::vector<RelayChannel> channels;
  channels.reserve(order.size());
  for (int pos : order) channels.push_back(*reports.at(pos).channel);
  const double w = channels.front().bandwidth();
  for (const RelayChannel& c : channels) {
    if (c.bandwidth() != w) {
      throw ConfigError("all relays must share one bandwidth");
    }
  }
  return channels;
}

}  // namespace

ReportVector ReportVector::FromRates(const std::vector<double>& rates) {
  std::vector<ReportEntry> entries;
  entries.reserve(rates.size());
  for (std::size_t i = 0; i < rates.size(); ++i) {
    entries.push_back({static_cast<int>(i) + 1, rates[i], std::nullopt});
  }
  return FromEntries(std::move(entries));
}

ReportVector ReportVector::FromChannels(
    const std::vector<RelayChannel>& channels) {
  std::vector<ReportEntry> entries;
  entries.reserve(channels.size());
  for (const RelayChannel& c : channels) {
    entries.push_back({c.id(), RelaySecrecyRate(c), c});
  }
  return FromEntries(std::move(entries));
}

ReportVector ReportVector::FromEntries(std::vector<ReportEntry> entries) {
  Validate(entries);
  return ReportVector(std::move(entries));
}

int ReportVector::PositionOf(int id) const {
  for (int i = 0; i < size(); ++i) {
    if (entries_[i].id == id) return i;
  }
  throw ArgumentError("unknown relay id " + std::to_string(id));
}

bool ReportVector::has_channels() const {
  return std::all_of(entries_.begin(), entries_.end(),
                     [](const ReportEntry& e) { return e.channel.has_value(); });
}

std::vector<double> ReportVector::rates() const {
  std::vector<double> out;
  out.reserve(entries_.size());
  for (const ReportEntry& e : entries_) out.push_back(e.rate);
  return out;
}

ReportVector ReportVector::WithReport(int id, double rate) const {
  std::vector<ReportEntry> entries = entries_;
  ReportEntry& e = entries[PositionOf(id)];
  e.rate = rate;
  e.channel.reset();
  return FromEntries(std::move(entries));
}

ReportVector ReportVector::Without(int id) const {
  if (size() < 2) throw ArgumentError("cannot remove the only relay");
  std::vector<ReportEntry> entries = entries_;
  entries.erase(entries.begin() + PositionOf(id));
  return ReportVector(std::move(entries));
}

bool SelectionOutcome::Contains(int id) const {
  return std::find(selected.begin(), selected.end(), id) != selected.end();
}

SelectionOutcome SelectTopK(const ReportVector& reports, int k) {
  if (k < 1 || k > reports.size()) {
    throw ArgumentError("k must lie in [1, " + std::to_string(reports.size()) +
                        "], got " + std::to_string(k));
  }
  const std::vector<int> order =
      RankPositions(reports.entries(), [](const ReportEntry& e) { return e.rate; });
  SelectionOutcome out;
  out.ranking.reserve(order.size());
  for (int pos : order) out.ranking.push_back(reports.at(pos).id);
  for (int r = 0; r < k; ++r) {
    out.selected.push_back(out.ranking[r]);
    out.selected_total += reports.at(order[r]).rate;
  }
  return out;
}

double SnrRatio(const RelayChannel& channel) {
  if (channel.snr_e() == 0.0) {
    return channel.snr_d() > 0.0 ? std::numeric_limits<double>::infinity()
                                 : 1.0;
  }
  return channel.snr_d() / channel.snr_e();
}

OptimalKResult OptimalKSelection(const DirectLink& direct,
                                 const ReportVector& reports) {
  const std::vector<RelayChannel> ordered = ChannelsInRatioOrder(reports);
  const int n = static_cast<int>(ordered.size());

  OptimalKResult out;
  double num = 1.0 + direct.snr_sd() + ordered[0].snr_d();
  double den = 1.0 + direct.snr_se() + ordered[0].snr_e();
  out.psi.push_back(num / den);
  int i = 1;
  while (i < n && out.psi.back() < SnrRatio(ordered[i])) {
    num += ordered[i].snr_d();
    den += ordered[i].snr_e();
    out.psi.push_back(num / den);
    ++i;
  }
  out.k = i;

  for (const RelayChannel& c : ordered) out.outcome.ranking.push_back(c.id());
  for (int r = 0; r < out.k; ++r) {
    out.outcome.selected.push_back(ordered[r].id());
    out.outcome.selected_total += reports.RateOf(ordered[r].id());
  }
  return out;
}

std::vector<SecrecySweepPoint> SecrecyVsKSweep(const DirectLink& direct,
                                               const ReportVector& reports) {
  const std::vector<RelayChannel> ordered = ChannelsInRatioOrder(reports);
  std::vector<SecrecySweepPoint> sweep;
  sweep.reserve(ordered.size());
  const std::span<const RelayChannel> all(ordered);
  for (std::size_t k = 1; k <= ordered.size(); ++k) {
    const auto chosen = all.first(k);
    sweep.push_back({static_cast<int>(k), MrcRatio(direct, chosen),
                     SystemSecrecyRate(direct, chosen)});
  }
  return sweep;
}

}  // namespace relay_truth
