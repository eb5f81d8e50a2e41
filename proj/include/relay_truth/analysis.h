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

#ifndef RELAY_TRUTH_ANALYSIS_H_
#define RELAY_TRUTH_ANALYSIS_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relay_truth/channel_model.h"
#include "relay_truth/mechanisms.h"
#include "relay_truth/selection.h"

namespace relay_truth {

enum class Mechanism { kVcgExpected, kVcgRealized, kAgv, kBaseline };
enum class Property { kIC, kIR, kBB, kBaselineMonotone, kOptimalKArgmax };

std::string_view MechanismName(Mechanism mechanism);
std::optional<Mechanism> ParseMechanism(std::string_view name);
std::string_view PropertyName(Property property);
std::optional<Property> ParseProperty(std::string_view name);

// Evenly spaced reports min, min + step, ..., up to max (inclusive within
// 1e-9 of a step).
struct ReportGrid {
  double min = 0.0;
  double max = 3.0;
  double step = 0.01;

  void Validate() const;
  std::vector<double> Points() const;
  bool operator==(const ReportGrid&) const = default;
};

struct ScanResult {
  std::vector<double> reports;
  std::vector<double> payoff;
  // For AGV, the error of the report-dependent part only; the others' term
  // is a constant shift of the whole curve.
  std::vector<double> payoff_se;
  std::vector<double> transfer;
  double argmax_report = 0.0;
  double argmax_payoff = 0.0;
};

// Payoff of relay `id` as its report sweeps `grid` (non-empty, ascending)
// while the other relays report their true rates. Expected mechanisms use
// one table, so every grid point sees the same draws.
ScanResult BestResponseScan(const GameSpec& spec, Mechanism mechanism, int id,
                            std::span<const double> grid, const McConfig& cfg);

// Mean of Phi_j at the other relays' true rates: the report-independent part
// of relay `id`'s AGV transfer. `true_moments[j - 1]` must hold the moments
// of query (true_rate_j, j).
double AgvOthersTerm(const GameSpec& spec, int id,
                     std::span<const ResponseMoments> true_moments);

// Builds an expected-mechanism scan from moments that were already evaluated
// for (grid[g], id). `agv_others_term` is only used by kAgv.
ScanResult ComposeScan(const GameSpec& spec, Mechanism mechanism, int id,
                       std::span<const double> grid,
                       std::span<const ResponseMoments> grid_moments,
                       double agv_others_term);

// Replayable description of a violated (or probed) property.
struct Witness {
  GameSpec spec;
  std::vector<double> reports;
  int relay_id = 0;
  double report = 0.0;
  double value = 0.0;
  McConfig cfg;
  std::string note;
};

struct PropertyVerdict {
  Property property = Property::kIC;
  Mechanism mechanism = Mechanism::kAgv;
  bool holds = false;
  // Slack of the deciding inequality; negative when it is violated.
  double margin = 0.0;
  std::optional<Witness> witness;
  std::string detail;
};

struct CheckOptions {
  ReportGrid grid;
  // Deviation grid spacing for the realized-VCG dominance check.
  double deviation_step = 0.1;
  // Random report profiles used by the AGV budget check.
  int bb_trials = 1000;
  // Standard errors required by statistical decisions.
  double z = 3.0;
  // Tolerance for algebraic identities.
  double exact_tol = 1e-12;
  // Only needed for kOptimalKArgmax.
  std::optional<DirectLink> direct;
  std::optional<ReportVector> channel_reports;
};

// Whether the theory predicts `property` for `mechanism`. Throws
// ArgumentError for pairs that are not meaningful (BB on the baseline,
// baseline-monotone on anything but the baseline, optimal-k-argmax on the baseline).
bool ClaimedByTheory(Mechanism mechanism, Property property);

// Runs the property's invariant suite on `spec` (true rates required).
// Deterministic under a fixed cfg. Throws ArgumentError for inapplicable
// pairs.
PropertyVerdict CheckProperty(const GameSpec& spec, Mechanism mechanism,
                              Property property, const McConfig& cfg,
                              const CheckOptions& options = {});

struct KCurve {
  int k = 0;
  std::vector<double> payoff;
  std::vector<double> transfer;
};

// AGV expected payoff and transfer of relay `id` (true rate `true_rate`) over
// `grid`, one curve per K. The other relays report their true rates.
std::vector<KCurve> TruthVsKScan(const GameSpec& spec, int id, double true_rate,
                                 std::span<const int> k_values,
                                 std::span<const double> grid,
                                 const McConfig& cfg);

// AGV expected payoff of relay `id` for every (true rate, report) pair;
// row-major over true_rates.
std::vector<double> AgvPayoffSurface(const GameSpec& spec, int id,
                                     std::span<const double> true_rates,
                                     std::span<const double> reports,
                                     const McConfig& cfg);

}  // namespace relay_truth

#endif  // RELAY_TRUTH_ANALYSIS_H_
