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

#ifndef RELAY_TRUTH_MECHANISMS_H_
#define RELAY_TRUTH_MECHANISMS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "relay_truth/priors.h"
#include "relay_truth/selection.h"

namespace relay_truth {

// One relay-selection game: N relays with ids 1..N, K of them are paid
// price * (true secrecy rate).
struct GameSpec {
  int n = 0;
  int k = 0;
  double price = 1.0;
  Prior prior = Prior::Exponential();
  // True secrecy rates indexed by id - 1.
  std::optional<std::vector<double>> true_rates;

  // Throws ArgumentError unless 1 <= k <= n, price > 0 and true_rates (when
  // present) has n finite non-negative entries.
  void Validate() const;
  // Requires true_rates.
  double TrueRate(int id) const;
  // The truthful report vector.
  ReportVector TruthfulReports() const;

  bool operator==(const GameSpec&) const = default;
};

enum class ResultMode { kRealized, kExpected };

struct EstimatorInfo {
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  std::vector<double> utility_se;
  std::vector<double> transfer_se;
  std::vector<double> payoff_se;
};

// Per-relay utility D, transfer t and payoff U = D + t, indexed by id - 1.
struct MechanismResult {
  ResultMode mode = ResultMode::kRealized;
  std::vector<double> utility;
  std::vector<double> transfer;
  std::vector<double> payoff;
  std::optional<EstimatorInfo> estimator;
};

// ---------------------------------------------------------------------------
// Realized quantities.

// D_i = price * true_rate_i for relays selected by `reports`, else 0.
std::vector<double> Utilities(const GameSpec& spec, const ReportVector& reports);

// Others' reported utility with relay `id` present minus the same with `id`
// withdrawn (K clamped to N - 1). Zero for unselected relays, <= 0 otherwise.
double VcgTransferRealized(const GameSpec& spec, const ReportVector& reports,
                           int id);

MechanismResult VcgRealized(const GameSpec& spec, const ReportVector& reports);

// Sum of transfers.
double BudgetBalance(std::span<const double> transfers);

// ---------------------------------------------------------------------------
// Expected quantities.

struct ResponseQuery {
  double report = 0.0;
  int relay_id = 1;
};

// Raw per-query sums over the prior's draws of the other N - 1 relays, all
// in report units (multiply by price for utilities).
struct ResponseMoments {
  std::uint64_t samples = 0;
  double sel = 0.0;
  double phi = 0.0;
  double phi2 = 0.0;
  double ext = 0.0;
  double ext2 = 0.0;
  double sel_phi = 0.0;

  // P(querying relay is selected).
  double SelectionProbability() const;
  // Others' expected total utility (AGV's Phi).
  Estimate Phi(double price) const;
  // Expected VCG transfer.
  Estimate VcgTransfer(double price) const;
  // price * true_rate * P(selected).
  Estimate ExpectedUtility(double price, double true_rate) const;
  Estimate VcgPayoff(double price, double true_rate) const;
  // Report-dependent part of the AGV payoff: E[D_i] + Phi.
  Estimate AgvWelfare(double price, double true_rate) const;
};

// sel_weight * 1{selected} + phi_weight * (others' selected total) for one
// query, evaluated on a single draw.
struct CombinationTerm {
  ResponseQuery query;
  double sel_weight = 0.0;
  double phi_weight = 0.0;
};
using Combination = std::vector<CombinationTerm>;

// Monte-Carlo table over one game's (prior, N, K) and one config. Every
// query against a table sees the same draws, so curves built from it use
// common random numbers and all relays share one estimate of Phi.
class ResponseTable {
 public:
  ResponseTable(Prior prior, int n, int k, McConfig cfg);
  ResponseTable(const GameSpec& spec, McConfig cfg)
      : ResponseTable(spec.prior, spec.n, spec.k, cfg) {}

  std::vector<ResponseMoments> Evaluate(
      std::span<const ResponseQuery> queries) const;
  ResponseMoments Evaluate(const ResponseQuery& query) const;

  // Mean and standard error of each combination's per-draw sum. Terms share
  // draws, so the error accounts for their correlation.
  std::vector<Estimate> EvaluateCombinations(
      std::span<const Combination> combinations) const;

  int n() const { return n_; }
  int k() const { return k_; }
  const McConfig& config() const { return cfg_; }

 private:
  Prior prior_;
  int n_;
  int k_;
  McConfig cfg_;
};

// price * true_rate * P(selected | report), others drawn from the prior.
Estimate BaselineExpectedPayoff(const GameSpec& spec, int id, double report,
                                const McConfig& cfg);

struct VcgExpectation {
  Estimate transfer;
  Estimate payoff;
};

VcgExpectation VcgExpected(const GameSpec& spec, int id, double report,
                           const McConfig& cfg);

// Others' expected total utility when relay `id` reports `report`.
Estimate AgvPhi(const GameSpec& spec, int id, double report,
                const McConfig& cfg);

// t_i = Phi_i - (1 / (N - 1)) * sum_{j != i} Phi_j over all N relays. Sums to
// zero by construction. Requires at least two entries.
std::vector<double> AgvTransfersFromPhi(std::span<const double> phi);

// AGV transfers for a report profile, every Phi_j from one shared table.
std::vector<double> AgvTransfer(const GameSpec& spec,
                                const ReportVector& reports,
                                const McConfig& cfg);

// E[D_i(report)] + E[t_i(report)] with the other relays reporting their true
// rates. The standard error covers the whole difference, others' term
// included.
Estimate AgvExpectedPayoff(const GameSpec& spec, int id, double report,
                           const McConfig& cfg);

// Expected-mode results for a report profile (each relay evaluated at its
// own report, utilities at its true rate).
MechanismResult VcgExpectedResult(const GameSpec& spec,
                                  const ReportVector& reports,
                                  const McConfig& cfg);
MechanismResult AgvResult(const GameSpec& spec, const ReportVector& reports,
                          const McConfig& cfg);
MechanismResult BaselineResult(const GameSpec& spec,
                               const ReportVector& reports,
                               const McConfig& cfg);

}  // namespace relay_truth

#endif  // RELAY_TRUTH_MECHANISMS_H_
