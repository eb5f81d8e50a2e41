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

#include "relay_truth/analysis.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "relay_truth/errors.h"

namespace relay_truth {
namespace {

constexpr std::pair<Mechanism, std::string_view> kMechanismNames[] = {
    {Mechanism::kVcgExpected, "vcg-expected"},
    {Mechanism::kVcgRealized, "vcg-realized"},
    {Mechanism::kAgv, "agv"},
    {Mechanism::kBaseline, "baseline"},
};

constexpr std::pair<Property, std::string_view> kPropertyNames[] = {
    {Property::kIC, "IC"},
    {Property::kIR, "IR"},
    {Property::kBB, "BB"},
    {Property::kBaselineMonotone, "baseline-monotone"},
    {Property::kOptimalKArgmax, "optimal-k-argmax"},
};

void ValidateGrid(std::span<const double> grid) {
  if (grid.empty()) throw ArgumentError("report grid must be non-empty");
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (!std::isfinite(grid[g]) || grid[g] < 0.0) {
      throw ArgumentError("report grid values must be finite and >= 0");
    }
    if (g > 0 && !(grid[g] > grid[g - 1])) {
      throw ArgumentError("report grid must be strictly ascending");
    }
  }
}

void FinishScan(ScanResult& scan) {
  std::size_t best = 0;
  for (std::size_t g = 1; g < scan.payoff.size(); ++g) {
    if (scan.payoff[g] > scan.payoff[best]) best = g;
  }
  scan.argmax_report = scan.reports[best];
  scan.argmax_payoff = scan.payoff[best];
}

std::vector<ResponseQuery> GridQueries(std::span<const double> grid, int id) {
  std::vector<ResponseQuery> q;
  q.reserve(grid.size());
  for (double r : grid) q.push_back({r, id});
  return q;
}

// Appends (true_rate_j, j) for every relay.
void AppendTruthQueries(const GameSpec& spec, std::vector<ResponseQuery>& q) {
  for (int j = 1; j <= spec.n; ++j) q.push_back({spec.TrueRate(j), j});
}

Witness MakeWitness(const GameSpec& spec, const McConfig& cfg) {
  Witness w;
  w.spec = spec;
  w.reports = *spec.true_rates;
  w.cfg = cfg;
  return w;
}

double UnitExponential(std::mt19937_64& gen) {
  const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
  return -std::log1p(-u);
}

bool IsExpectedMechanism(Mechanism m) {
  return m == Mechanism::kAgv || m == Mechanism::kVcgExpected ||
         m == Mechanism::kBaseline;
}

// Scans every relay from one shared table.
std::vector<ScanResult> ScanAllRelays(const GameSpec& spec, Mechanism mechanism,
                                      std::span<const double> grid,
                                      const McConfig& cfg) {
  std::vector<ScanResult> scans;
  if (mechanism == Mechanism::kVcgRealized) {
    for (int id = 1; id <= spec.n; ++id) {
      scans.push_back(BestResponseScan(spec, mechanism, id, grid, cfg));
    }
    return scans;
  }
  std::vector<ResponseQuery> queries;
  for (int id = 1; id <= spec.n; ++id) {
    const auto g = GridQueries(grid, id);
    queries.insert(queries.end(), g.begin(), g.end());
  }
  const std::size_t truth_offset = queries.size();
  AppendTruthQueries(spec, queries);
  const std::vector<ResponseMoments> m =
      ResponseTable(spec, cfg).Evaluate(queries);
  const std::span<const ResponseMoments> all(m);
  const auto truths = all.subspan(truth_offset, spec.n);
  for (int id = 1; id <= spec.n; ++id) {
    const double others =
        mechanism == Mechanism::kAgv ? AgvOthersTerm(spec, id, truths) : 0.0;
    scans.push_back(ComposeScan(spec, mechanism, id, grid,
                                all.subspan((id - 1) * grid.size(), grid.size()),
                                others));
  }
  return scans;
}

PropertyVerdict CheckIc(const GameSpec& spec, Mechanism mechanism,
                        const McConfig& cfg, const CheckOptions& opt) {
  PropertyVerdict v;
  if (mechanism == Mechanism::kVcgRealized) {
    const ReportGrid deviations{opt.grid.min, opt.grid.max, opt.deviation_step};
    const std::vector<double> points = deviations.Points();
    v.margin = std::numeric_limits<double>::infinity();
    const ReportVector truthful = spec.TruthfulReports();
    for (int id = 1; id <= spec.n; ++id) {
      const double truthful_payoff =
          VcgRealized(spec, truthful).payoff[id - 1];
      for (double r : points) {
        const ReportVector lie = truthful.WithReport(id, r);
        const double lie_payoff = VcgRealized(spec, lie).payoff[id - 1];
        const double slack = truthful_payoff - lie_payoff;
        if (slack < v.margin) {
          v.margin = slack;
          if (slack < -opt.exact_tol) {
            Witness w = MakeWitness(spec, cfg);
            w.reports = lie.rates();
            w.relay_id = id;
            w.report = r;
            w.value = slack;
            w.note = "deviating report beats the truthful payoff";
            v.witness = std::move(w);
          }
        }
      }
    }
    v.holds = v.margin >= -opt.exact_tol;
    v.detail = "truthful realized payoff vs every deviation on the grid";
    return v;
  }

  const std::vector<double> grid = opt.grid.Points();
  const std::vector<ScanResult> scans = ScanAllRelays(spec, mechanism, grid, cfg);
  double worst = 0.0;
  int worst_id = 1;
  for (int id = 1; id <= spec.n; ++id) {
    const double dist = std::abs(scans[id - 1].argmax_report - spec.TrueRate(id));
    if (dist > worst || id == 1) {
      worst = dist;
      worst_id = id;
    }
  }
  // Points() spaces reports by step up to rounding; allow that rounding.
  const double allowed = opt.grid.step * (1.0 + 1e-9);
  v.margin = allowed - worst;
  v.holds = v.margin >= 0.0;
  std::ostringstream detail;
  detail << "largest |argmax - true rate| = " << worst << " (relay "
         << worst_id << ")";
  v.detail = detail.str();
  if (!v.holds) {
    Witness w = MakeWitness(spec, cfg);
    w.relay_id = worst_id;
    w.report = scans[worst_id - 1].argmax_report;
    w.value = scans[worst_id - 1].argmax_payoff;
    w.note = "best response is not the true rate";
    v.witness = std::move(w);
  }
  return v;
}

PropertyVerdict CheckIr(const GameSpec& spec, Mechanism mechanism,
                        const McConfig& cfg, const CheckOptions& opt) {
  PropertyVerdict v;
  const ReportVector truthful = spec.TruthfulReports();
  MechanismResult result;
  switch (mechanism) {
    case Mechanism::kVcgRealized:
      result = VcgRealized(spec, truthful);
      break;
    case Mechanism::kVcgExpected:
      result = VcgExpectedResult(spec, truthful, cfg);
      break;
    case Mechanism::kAgv:
      result = AgvResult(spec, truthful, cfg);
      break;
    case Mechanism::kBaseline:
      result = BaselineResult(spec, truthful, cfg);
      break;
  }
  v.margin = std::numeric_limits<double>::infinity();
  int worst_id = 1;
  for (int i = 0; i < spec.n; ++i) {
    const double se =
        result.estimator ? result.estimator->payoff_se[i] : 0.0;
    double slack = 0.0;
    if (mechanism == Mechanism::kAgv) {
      // Strictly positive payoff, z standard errors clear of zero.
      slack = result.payoff[i] - opt.z * se;
    } else if (mechanism == Mechanism::kVcgExpected) {
      slack = result.payoff[i] + opt.z * se;
    } else {
      slack = result.payoff[i] + opt.exact_tol;
    }
    if (slack < v.margin) {
      v.margin = slack;
      worst_id = i + 1;
    }
  }
  v.holds = mechanism == Mechanism::kAgv ? v.margin > 0.0 : v.margin >= 0.0;
  std::ostringstream detail;
  detail << "smallest truthful payoff slack " << v.margin << " (relay "
         << worst_id << ")";
  v.detail = detail.str();
  if (!v.holds) {
    Witness w = MakeWitness(spec, cfg);
    w.relay_id = worst_id;
    w.report = spec.TrueRate(worst_id);
    w.value = result.payoff[worst_id - 1];
    w.note = "truthful payoff is not individually rational";
    v.witness = std::move(w);
  }
  return v;
}

PropertyVerdict CheckBb(const GameSpec& spec, Mechanism mechanism,
                        const McConfig& cfg, const CheckOptions& opt) {
  PropertyVerdict v;
  const ReportVector truthful = spec.TruthfulReports();

  if (mechanism == Mechanism::kAgv) {
    std::vector<std::vector<double>> profiles{*spec.true_rates};
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed),
                      static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(cfg.stream_id), 0xBBu};
    std::mt19937_64 gen(seq);
    for (int t = 0; t < opt.bb_trials; ++t) {
      std::vector<double> p(spec.n);
      for (double& x : p) x = UnitExponential(gen);
      profiles.push_back(std::move(p));
    }
    std::vector<ResponseQuery> queries;
    for (const auto& p : profiles) {
      for (int j = 0; j < spec.n; ++j) queries.push_back({p[j], j + 1});
    }
    const std::vector<ResponseMoments> m =
        ResponseTable(spec, cfg).Evaluate(queries);
    double worst = 0.0;
    std::size_t worst_profile = 0;
    for (std::size_t p = 0; p < profiles.size(); ++p) {
      std::vector<double> phi;
      for (int j = 0; j < spec.n; ++j) {
        phi.push_back(m[p * spec.n + j].Phi(spec.price).mean);
      }
      const double total = std::abs(BudgetBalance(AgvTransfersFromPhi(phi)));
      if (total > worst || p == 0) {
        worst = total;
        worst_profile = p;
      }
    }
    v.margin = opt.exact_tol - worst;
    v.holds = v.margin >= 0.0;
    std::ostringstream detail;
    detail << "max |sum t| = " << worst << " over " << profiles.size()
           << " report profiles";
    v.detail = detail.str();
    if (!v.holds) {
      Witness w = MakeWitness(spec, cfg);
      w.reports = profiles[worst_profile];
      w.value = worst;
      w.note = "AGV transfers do not sum to zero";
      v.witness = std::move(w);
    }
    return v;
  }

  double total = 0.0;
  double tol = opt.exact_tol;
  if (mechanism == Mechanism::kVcgRealized) {
    total = BudgetBalance(VcgRealized(spec, truthful).transfer);
  } else {
    const MechanismResult r = VcgExpectedResult(spec, truthful, cfg);
    total = BudgetBalance(r.transfer);
    double var = 0.0;
    for (double se : r.estimator->transfer_se) var += se * se;
    tol = std::max(tol, opt.z * std::sqrt(var));
  }
  v.margin = tol - std::abs(total);
  v.holds = v.margin >= 0.0;
  std::ostringstream detail;
  detail << "sum of truthful transfers = " << total
         << (total <= opt.exact_tol ? " (no deficit)" : " (deficit)");
  v.detail = detail.str();
  if (!v.holds) {
    Witness w = MakeWitness(spec, cfg);
    w.value = total;
    w.note = "transfers do not balance";
    v.witness = std::move(w);
  }
  return v;
}

PropertyVerdict CheckBaselineMonotone(const GameSpec& spec, const McConfig& cfg,
                           const CheckOptions& opt) {
  PropertyVerdict v;
  const std::vector<double> grid = opt.grid.Points();
  const std::vector<ScanResult> scans =
      ScanAllRelays(spec, Mechanism::kBaseline, grid, cfg);
  v.margin = std::numeric_limits<double>::infinity();
  for (int id = 1; id <= spec.n; ++id) {
    const auto& p = scans[id - 1].payoff;
    for (std::size_t g = 1; g < p.size(); ++g) {
      const double step = p[g] - p[g - 1];
      if (step < v.margin) {
        v.margin = step;
        if (step < 0.0) {
          Witness w = MakeWitness(spec, cfg);
          w.relay_id = id;
          w.report = grid[g];
          w.value = step;
          w.note = "no-transfer payoff decreases with the report";
          v.witness = std::move(w);
        }
      }
    }
  }
  if (grid.size() < 2) v.margin = 0.0;
  v.holds = v.margin >= 0.0;
  v.detail = "smallest consecutive payoff increment along the grid";
  return v;
}

PropertyVerdict CheckOptimalKArgmax(const GameSpec& spec, const McConfig& cfg,
                           const CheckOptions& opt) {
  if (!opt.direct || !opt.channel_reports) {
    throw ArgumentError("optimal-k-argmax needs a direct link and SNR pairs");
  }
  PropertyVerdict v;
  const OptimalKResult best = OptimalKSelection(*opt.direct, *opt.channel_reports);
  const std::vector<SecrecySweepPoint> sweep =
      SecrecyVsKSweep(*opt.direct, *opt.channel_reports);
  double max_psi = 0.0;
  double max_rate = 0.0;
  for (const SecrecySweepPoint& p : sweep) {
    max_psi = std::max(max_psi, p.psi);
    max_rate = std::max(max_rate, p.secrecy_rate);
  }
  const double psi_k = best.psi.back();
  const double rate_k = sweep[best.k - 1].secrecy_rate;
  v.margin = std::min(psi_k - max_psi, rate_k - max_rate) + opt.exact_tol;
  v.holds = v.margin >= 0.0;
  std::ostringstream detail;
  detail << "K = " << best.k << ", Psi_K = " << psi_k << ", max Psi = "
         << max_psi;
  v.detail = detail.str();
  if (!v.holds) {
    Witness w = MakeWitness(spec, cfg);
    w.value = psi_k - max_psi;
    w.note = "greedy relay count is not the secrecy-rate argmax";
    v.witness = std::move(w);
  }
  return v;
}

}  // namespace

std::string_view MechanismName(Mechanism mechanism) {
  for (const auto& [m, name] : kMechanismNames) {
    if (m == mechanism) return name;
  }
  return "unknown";
}

std::optional<Mechanism> ParseMechanism(std::string_view name) {
  for (const auto& [m, n] : kMechanismNames) {
    if (n == name) return m;
  }
  return std::nullopt;
}

std::string_view PropertyName(Property property) {
  for (const auto& [p, name] : kPropertyNames) {
    if (p == property) return name;
  }
  return "unknown";
}

std::optional<Property> ParseProperty(std::string_view name) {
  for (const auto& [p, n] : kPropertyNames) {
    if (n == name) return p;
  }
  return std::nullopt;
}

void ReportGrid::Validate() const {
  if (!std::isfinite(min) || !std::isfinite(max) || !std::isfinite(step)) {
    throw ArgumentError("grid bounds must be finite");
  }
  if (min < 0.0) throw ArgumentError("grid minimum must be >= 0");
  if (step <= 0.0) throw ArgumentError("grid step must be > 0");
  if (max < min) throw ArgumentError("grid maximum must be >= minimum");
}

std::vector<double> ReportGrid::Points() const {
  Validate();
  const auto count =
      static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
  std::vector<double> points(count);
  for (std::size_t g = 0; g < count; ++g) {
    points[g] = min + static_cast<double>(g) * step;
  }
  return points;
}

double AgvOthersTerm(const GameSpec& spec, int id,
                     std::span<const ResponseMoments> true_moments) {
  if (spec.n < 2) throw ArgumentError("the AGV transfer needs N >= 2");
  double others = 0.0;
  for (int j = 1; j <= spec.n; ++j) {
    if (j != id) others += true_moments[j - 1].Phi(spec.price).mean;
  }
  return others / static_cast<double>(spec.n - 1);
}

ScanResult ComposeScan(const GameSpec& spec, Mechanism mechanism, int id,
                       std::span<const double> grid,
                       std::span<const ResponseMoments> grid_moments,
                       double agv_others_term) {
  if (!IsExpectedMechanism(mechanism)) {
    throw ArgumentError("only expected-mode mechanisms compose from moments");
  }
  if (grid.size() != grid_moments.size()) {
    throw ArgumentError("one moment set per grid point is required");
  }
  const double v = spec.TrueRate(id);
  ScanResult scan;
  scan.reports.assign(grid.begin(), grid.end());
  for (const ResponseMoments& m : grid_moments) {
    Estimate payoff;
    double transfer = 0.0;
    switch (mechanism) {
      case Mechanism::kBaseline:
        payoff = m.ExpectedUtility(spec.price, v);
        break;
      case Mechanism::kVcgExpected:
        payoff = m.VcgPayoff(spec.price, v);
        transfer = m.VcgTransfer(spec.price).mean;
        break;
      case Mechanism::kAgv:
        payoff = m.AgvWelfare(spec.price, v);
        payoff.mean -= agv_others_term;
        transfer = m.Phi(spec.price).mean - agv_others_term;
        break;
      case Mechanism::kVcgRealized:
        break;
    }
    scan.payoff.push_back(payoff.mean);
    scan.payoff_se.push_back(payoff.std_error);
    scan.transfer.push_back(transfer);
  }
  FinishScan(scan);
  return scan;
}

ScanResult BestResponseScan(const GameSpec& spec, Mechanism mechanism, int id,
                            std::span<const double> grid, const McConfig& cfg) {
  spec.Validate();
  ValidateGrid(grid);
  spec.TrueRate(id);

  if (mechanism == Mechanism::kVcgRealized) {
    const ReportVector truthful = spec.TruthfulReports();
    ScanResult scan;
    scan.reports.assign(grid.begin(), grid.end());
    for (double r : grid) {
      const ReportVector profile = truthful.WithReport(id, r);
      const double d = Utilities(spec, profile)[id - 1];
      const double t = VcgTransferRealized(spec, profile, id);
      scan.payoff.push_back(d + t);
      scan.payoff_se.push_back(0.0);
      scan.transfer.push_back(t);
    }
    FinishScan(scan);
    return scan;
  }

  std::vector<ResponseQuery> queries = GridQueries(grid, id);
  if (mechanism == Mechanism::kAgv) AppendTruthQueries(spec, queries);
  const std::vector<ResponseMoments> m =
      ResponseTable(spec, cfg).Evaluate(queries);
  const std::span<const ResponseMoments> all(m);
  const double others =
      mechanism == Mechanism::kAgv
          ? AgvOthersTerm(spec, id, all.subspan(grid.size(), spec.n))
          : 0.0;
  return ComposeScan(spec, mechanism, id, grid, all.first(grid.size()), others);
}

bool ClaimedByTheory(Mechanism mechanism, Property property) {
  switch (property) {
    case Property::kIC:
      return mechanism != Mechanism::kBaseline;
    case Property::kIR:
      return true;
    case Property::kBB:
      if (mechanism == Mechanism::kBaseline) {
        throw ArgumentError("budget balance is vacuous without transfers");
      }
      return mechanism == Mechanism::kAgv;
    case Property::kBaselineMonotone:
      if (mechanism != Mechanism::kBaseline) {
        throw ArgumentError("baseline-monotone applies to the baseline only");
      }
      return true;
    case Property::kOptimalKArgmax:
      if (mechanism == Mechanism::kBaseline) {
        throw ArgumentError(
            "optimal-k-argmax assumes truthful reports, which the baseline lacks");
      }
      return true;
  }
  return false;
}

PropertyVerdict CheckProperty(const GameSpec& spec, Mechanism mechanism,
                              Property property, const McConfig& cfg,
                              const CheckOptions& options) {
  ClaimedByTheory(mechanism, property);
  spec.Validate();
  if (!spec.true_rates) throw ArgumentError("property checks need true rates");
  if (mechanism == Mechanism::kAgv && spec.n < 2) {
    throw ArgumentError("the AGV mechanism needs N >= 2");
  }

  PropertyVerdict v;
  switch (property) {
    case Property::kIC:
      v = CheckIc(spec, mechanism, cfg, options);
      break;
    case Property::kIR:
      v = CheckIr(spec, mechanism, cfg, options);
      break;
    case Property::kBB:
      v = CheckBb(spec, mechanism, cfg, options);
      break;
    case Property::kBaselineMonotone:
      v = CheckBaselineMonotone(spec, cfg, options);
      break;
    case Property::kOptimalKArgmax:
      v = CheckOptimalKArgmax(spec, cfg, options);
      break;
  }
  v.property = property;
  v.mechanism = mechanism;
  return v;
}

std::vector<KCurve> TruthVsKScan(const GameSpec& spec, int id, double true_rate,
                                 std::span<const int> k_values,
                                 std::span<const double> grid,
                                 const McConfig& cfg) {
  ValidateGrid(grid);
  GameSpec base = spec;
  if (!base.true_rates) throw ArgumentError("K scans need true rates");
  if (id < 1 || id > base.n) throw ArgumentError("relay id out of range");
  (*base.true_rates)[id - 1] = true_rate;

  std::vector<KCurve> curves;
  for (int k : k_values) {
    GameSpec g = base;
    g.k = k;
    g.Validate();
    const ScanResult scan = BestResponseScan(g, Mechanism::kAgv, id, grid, cfg);
    curves.push_back({k, scan.payoff, scan.transfer});
  }
  return curves;
}

std::vector<double> AgvPayoffSurface(const GameSpec& spec, int id,
                                     std::span<const double> true_rates,
                                     std::span<const double> reports,
                                     const McConfig& cfg) {
  spec.Validate();
  ValidateGrid(reports);
  if (spec.n < 2) throw ArgumentError("the AGV mechanism needs N >= 2");
  std::vector<ResponseQuery> queries = GridQueries(reports, id);
  AppendTruthQueries(spec, queries);
  const std::vector<ResponseMoments> m =
      ResponseTable(spec, cfg).Evaluate(queries);
  const std::span<const ResponseMoments> all(m);
  const double others =
      AgvOthersTerm(spec, id, all.subspan(reports.size(), spec.n));
  std::vector<double> surface;
  surface.reserve(true_rates.size() * reports.size());
  for (double v : true_rates) {
    for (std::size_t r = 0; r < reports.size(); ++r) {
      surface.push_back(m[r].AgvWelfare(spec.price, v).mean - others);
    }
  }
  return surface;
}

}  // namespace relay_truth
