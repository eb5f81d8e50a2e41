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

#include "relay_truth/mechanisms.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "relay_truth/errors.h"
#include "relay_truth/simd/response_kernel.h"

namespace relay_truth {
namespace {

double StdErrorFromSums(double sum, double sum2, std::uint64_t samples) {
  if (samples < 2) return 0.0;
  const auto n = static_cast<double>(samples);
  const double var = std::max(0.0, (sum2 - sum * sum / n) / (n - 1.0));
  return std::sqrt(var / n);
}

Estimate MakeEstimate(double scale, double sum, double sum2,
                      std::uint64_t samples) {
  Estimate e;
  e.samples = samples;
  e.mean = scale * sum / static_cast<double>(samples);
  e.std_error = std::abs(scale) * StdErrorFromSums(sum, sum2, samples);
  return e;
}

// Per-sample summaries of the other relays' reports, structure of arrays.
struct SummaryBlock {
  std::vector<double> threshold;
  std::vector<double> threshold_col;
  std::vector<double> top_km1;
  std::vector<double> top_k;

  simd::SummaryView View() const {
    return {threshold.size(), threshold.data(), threshold_col.data(),
            top_km1.data(), top_k.data()};
  }
};

// Ranks each row's m values (descending, ties to the lower column) and keeps
// what the selection rule needs for any querying relay.
void Summarize(const std::vector<double>& draws, std::size_t rows, int m,
               int k, SummaryBlock& out) {
  out.threshold.resize(rows);
  out.threshold_col.resize(rows);
  out.top_km1.resize(rows);
  out.top_k.resize(rows);
  const int kept = std::min(k, m);
  std::vector<int> order(static_cast<std::size_t>(m));
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = draws.data() + r * static_cast<std::size_t>(m);
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + kept, order.end(),
                      [row](int a, int b) {
                        if (row[a] != row[b]) return row[a] > row[b];
                        return a < b;
                      });
    double above = 0.0;
    for (int j = 0; j < std::min(k - 1, m); ++j) above += row[order[j]];
    out.top_km1[r] = above;
    if (m >= k) {
      const int col = order[k - 1];
      out.threshold[r] = row[col];
      out.threshold_col[r] = col;
      out.top_k[r] = above + row[col];
    } else {
      out.threshold[r] = -std::numeric_limits<double>::infinity();
      out.threshold_col[r] = -1.0;
      out.top_k[r] = above;
    }
  }
}

void ValidateQuery(const ResponseQuery& q, int n) {
  if (q.relay_id < 1 || q.relay_id > n) {
    throw ArgumentError("relay id " + std::to_string(q.relay_id) +
                        " outside 1.." + std::to_string(n));
  }
  if (!std::isfinite(q.report) || q.report < 0.0) {
    throw ArgumentError("reported rate must be finite and >= 0");
  }
}

ResponseMoments ToMoments(const simd::ResponseSums& s, std::uint64_t samples) {
  ResponseMoments m;
  m.samples = samples;
  m.sel = s.sel;
  m.phi = s.phi;
  m.phi2 = s.phi2;
  m.ext = s.ext;
  m.ext2 = s.ext2;
  m.sel_phi = s.sel_phi;
  return m;
}

void RequireReportsMatch(const GameSpec& spec, const ReportVector& reports) {
  if (reports.size() != spec.n) {
    throw ArgumentError("expected " + std::to_string(spec.n) +
                        " reports, got " + std::to_string(reports.size()));
  }
  for (int i = 0; i < spec.n; ++i) {
    if (reports.at(i).id != i + 1) {
      throw ArgumentError("reports must carry ids 1..N in order");
    }
  }
}

double PricedSelectedTotal(const ReportVector& reports,
                           const SelectionOutcome& outcome, int skip_id,
                           double price) {
  double total = 0.0;
  for (int id : outcome.selected) {
    if (id != skip_id) total += price * reports.RateOf(id);
  }
  return total;
}

EstimatorInfo MakeEstimatorInfo(const Prior& prior, const McConfig& cfg,
                                int n) {
  EstimatorInfo info;
  info.samples = EffectiveSamples(prior, cfg);
  info.seed = cfg.seed;
  info.stream_id = cfg.stream_id;
  info.utility_se.assign(n, 0.0);
  info.transfer_se.assign(n, 0.0);
  info.payoff_se.assign(n, 0.0);
  return info;
}

std::vector<ResponseQuery> ProfileQueries(const ReportVector& reports) {
  std::vector<ResponseQuery> queries;
  for (const ReportEntry& e : reports.entries()) {
    queries.push_back({e.rate, e.id});
  }
  return queries;
}

// Per-draw AGV transfer (own_utility = 0) or payoff of relay `id` under
// `reports`, as a combination over one table.
Combination AgvCombination(const GameSpec& spec, const ReportVector& reports,
                           int id, double own_utility) {
  Combination c;
  const double share = spec.price / static_cast<double>(spec.n - 1);
  for (const ReportEntry& e : reports.entries()) {
    if (e.id == id) {
      c.push_back({{e.rate, e.id}, own_utility, spec.price});
    } else {
      c.push_back({{e.rate, e.id}, 0.0, -share});
    }
  }
  return c;
}

}  // namespace

void GameSpec::Validate() const {
  if (n < 1) throw ArgumentError("game needs at least one relay");
  if (k < 1 || k > n) {
    throw ArgumentError("K must lie in [1, N], got K=" + std::to_string(k) +
                        " N=" + std::to_string(n));
  }
  if (!std::isfinite(price) || price <= 0.0) {
    throw ArgumentError("price must be finite and > 0");
  }
  if (true_rates) {
    if (static_cast<int>(true_rates->size()) != n) {
      throw ArgumentError("true_rates must have N entries");
    }
    for (double r : *true_rates) {
      if (!std::isfinite(r) || r < 0.0) {
        throw ArgumentError("true rates must be finite and >= 0");
      }
    }
  }
  if (prior.kind() == PriorKind::kPointMass &&
      static_cast<int>(prior.point().size()) != n) {
    throw ArgumentError("point-mass prior must list all N reports");
  }
}

double GameSpec::TrueRate(int id) const {
  if (!true_rates) throw ArgumentError("true rates are required");
  if (id < 1 || id > n) throw ArgumentError("relay id out of range");
  return (*true_rates)[id - 1];
}

ReportVector GameSpec::TruthfulReports() const {
  if (!true_rates) throw ArgumentError("true rates are required");
  return ReportVector::FromRates(*true_rates);
}

// ---------------------------------------------------------------------------

std::vector<double> Utilities(const GameSpec& spec,
                              const ReportVector& reports) {
  spec.Validate();
  if (!spec.true_rates) throw ArgumentError("utilities need true rates");
  RequireReportsMatch(spec, reports);
  const SelectionOutcome outcome = SelectTopK(reports, spec.k);
  std::vector<double> d(spec.n, 0.0);
  for (int id : outcome.selected) d[id - 1] = spec.price * spec.TrueRate(id);
  return d;
}

double VcgTransferRealized(const GameSpec& spec, const ReportVector& reports,
                           int id) {
  spec.Validate();
  RequireReportsMatch(spec, reports);
  if (id < 1 || id > spec.n) throw ArgumentError("relay id out of range");
  if (spec.n == 1) return 0.0;
  const SelectionOutcome with = SelectTopK(reports, spec.k);
  const ReportVector rest = reports.Without(id);
  const SelectionOutcome without = SelectTopK(rest, std::min(spec.k, spec.n - 1));
  return PricedSelectedTotal(reports, with, id, spec.price) -
         PricedSelectedTotal(rest, without, id, spec.price);
}

MechanismResult VcgRealized(const GameSpec& spec, const ReportVector& reports) {
  MechanismResult out;
  out.mode = ResultMode::kRealized;
  out.utility = Utilities(spec, reports);
  for (int id = 1; id <= spec.n; ++id) {
    out.transfer.push_back(VcgTransferRealized(spec, reports, id));
    out.payoff.push_back(out.utility[id - 1] + out.transfer.back());
  }
  return out;
}

double BudgetBalance(std::span<const double> transfers) {
  double total = 0.0;
  for (double t : transfers) total += t;
  return total;
}

// ---------------------------------------------------------------------------

double ResponseMoments::SelectionProbability() const {
  return sel / static_cast<double>(samples);
}

Estimate ResponseMoments::Phi(double price) const {
  return MakeEstimate(price, phi, phi2, samples);
}

Estimate ResponseMoments::VcgTransfer(double price) const {
  return MakeEstimate(price, ext, ext2, samples);
}

Estimate ResponseMoments::ExpectedUtility(double price,
                                          double true_rate) const {
  // sel is 0/1, so its sum of squares equals its sum.
  return MakeEstimate(price * true_rate, sel, sel, samples);
}

Estimate ResponseMoments::VcgPayoff(double price, double true_rate) const {
  // Per sample v*sel + ext; ext vanishes whenever sel does.
  const double v = true_rate;
  const double sum = v * sel + ext;
  const double sum2 = v * v * sel + ext2 + 2.0 * v * ext;
  return MakeEstimate(price, sum, sum2, samples);
}

Estimate ResponseMoments::AgvWelfare(double price, double true_rate) const {
  const double v = true_rate;
  const double sum = v * sel + phi;
  const double sum2 = v * v * sel + phi2 + 2.0 * v * sel_phi;
  return MakeEstimate(price, sum, sum2, samples);
}

ResponseTable::ResponseTable(Prior prior, int n, int k, McConfig cfg)
    : prior_(std::move(prior)), n_(n), k_(k), cfg_(cfg) {
  if (n < 1 || k < 1 || k > n) throw ArgumentError("need 1 <= K <= N");
  if (cfg.samples < 1) throw ArgumentError("samples must be >= 1");
  if (prior_.kind() == PriorKind::kPointMass &&
      static_cast<int>(prior_.point().size()) != n) {
    throw ArgumentError("point-mass prior must list all N reports");
  }
}

ResponseMoments ResponseTable::Evaluate(const ResponseQuery& query) const {
  return Evaluate(std::span<const ResponseQuery>(&query, 1)).front();
}

std::vector<ResponseMoments> ResponseTable::Evaluate(
    std::span<const ResponseQuery> queries) const {
  for (const ResponseQuery& q : queries) ValidateQuery(q, n_);
  const simd::ResponseKernel kernel = simd::ActiveKernel();
  const int m = n_ - 1;
  std::vector<ResponseMoments> out(queries.size());

  if (prior_.kind() == PriorKind::kPointMass) {
    SummaryBlock block;
    for (std::size_t q = 0; q < queries.size(); ++q) {
      std::vector<double> others = prior_.point();
      others.erase(others.begin() + (queries[q].relay_id - 1));
      Summarize(others, 1, m, k_, block);
      out[q] = ToMoments(
          kernel(block.View(), queries[q].report, queries[q].relay_id - 1), 1);
    }
    return out;
  }

  const std::uint64_t blocks = NumBlocks(prior_, cfg_);
  const std::uint64_t chunks = NumChunks(prior_, cfg_);
  std::vector<std::vector<simd::ResponseSums>> partial(chunks);

  ParallelChunks(chunks, cfg_.workers, [&](std::uint64_t chunk) {
    std::vector<simd::ResponseSums> acc(queries.size());
    std::vector<double> draws;
    SummaryBlock block;
    const std::uint64_t end = std::min(blocks, (chunk + 1) * kBlocksPerChunk);
    for (std::uint64_t b = chunk * kBlocksPerChunk; b < end; ++b) {
      const std::size_t rows = DrawBlock(prior_, m, cfg_, b, draws);
      Summarize(draws, rows, m, k_, block);
      const simd::SummaryView view = block.View();
      for (std::size_t q = 0; q < queries.size(); ++q) {
        acc[q] += kernel(view, queries[q].report, queries[q].relay_id - 1);
      }
    }
    partial[chunk] = std::move(acc);
  });

  std::vector<simd::ResponseSums> total(queries.size());
  for (const auto& chunk : partial) {
    for (std::size_t q = 0; q < queries.size(); ++q) total[q] += chunk[q];
  }
  const std::uint64_t samples = EffectiveSamples(prior_, cfg_);
  for (std::size_t q = 0; q < queries.size(); ++q) {
    out[q] = ToMoments(total[q], samples);
  }
  return out;
}

std::vector<Estimate> ResponseTable::EvaluateCombinations(
    std::span<const Combination> combinations) const {
  for (const Combination& c : combinations) {
    for (const CombinationTerm& t : c) ValidateQuery(t.query, n_);
  }
  const int m = n_ - 1;
  auto value = [](const Combination& c, const SummaryBlock& block,
                  std::size_t s) {
    double x = 0.0;
    for (const CombinationTerm& t : c) {
      const double thr = block.threshold[s];
      const bool selected =
          t.query.report > thr ||
          (t.query.report == thr &&
           block.threshold_col[s] >= t.query.relay_id - 1);
      x += t.sel_weight * (selected ? 1.0 : 0.0) +
           t.phi_weight * (selected ? block.top_km1[s] : block.top_k[s]);
    }
    return x;
  };

  std::vector<Estimate> out(combinations.size());
  if (prior_.kind() == PriorKind::kPointMass) {
    SummaryBlock block;
    for (std::size_t c = 0; c < combinations.size(); ++c) {
      double x = 0.0;
      for (const CombinationTerm& t : combinations[c]) {
        std::vector<double> others = prior_.point();
        others.erase(others.begin() + (t.query.relay_id - 1));
        Summarize(others, 1, m, k_, block);
        x += value(Combination{t}, block, 0);
      }
      out[c] = {x, 0.0, 1};
    }
    return out;
  }

  // Welford accumulators per combination, merged in chunk order.
  struct Running {
    double n = 0.0, mean = 0.0, m2 = 0.0;
    void Add(double x) {
      n += 1.0;
      const double d = x - mean;
      mean += d / n;
      m2 += d * (x - mean);
    }
    void Merge(const Running& o) {
      if (o.n == 0.0) return;
      if (n == 0.0) {
        *this = o;
        return;
      }
      const double total = n + o.n;
      const double d = o.mean - mean;
      mean += d * o.n / total;
      m2 += o.m2 + d * d * n * o.n / total;
      n = total;
    }
  };
  const std::uint64_t blocks = NumBlocks(prior_, cfg_);
  const std::uint64_t chunks = NumChunks(prior_, cfg_);
  std::vector<std::vector<Running>> partial(chunks);
  ParallelChunks(chunks, cfg_.workers, [&](std::uint64_t chunk) {
    std::vector<Running> acc(combinations.size());
    std::vector<double> draws;
    SummaryBlock block;
    const std::uint64_t end = std::min(blocks, (chunk + 1) * kBlocksPerChunk);
    for (std::uint64_t b = chunk * kBlocksPerChunk; b < end; ++b) {
      const std::size_t rows = DrawBlock(prior_, m, cfg_, b, draws);
      Summarize(draws, rows, m, k_, block);
      for (std::size_t c = 0; c < combinations.size(); ++c) {
        for (std::size_t s = 0; s < rows; ++s) {
          acc[c].Add(value(combinations[c], block, s));
        }
      }
    }
    partial[chunk] = std::move(acc);
  });
  std::vector<Running> total(combinations.size());
  for (const auto& chunk : partial) {
    for (std::size_t c = 0; c < total.size(); ++c) total[c].Merge(chunk[c]);
  }
  for (std::size_t c = 0; c < total.size(); ++c) {
    const double n = total[c].n;
    out[c].mean = total[c].mean;
    out[c].samples = static_cast<std::uint64_t>(n);
    out[c].std_error = n > 1 ? std::sqrt(total[c].m2 / (n - 1) / n) : 0.0;
  }
  return out;
}

// ---------------------------------------------------------------------------

Estimate BaselineExpectedPayoff(const GameSpec& spec, int id, double report,
                                const McConfig& cfg) {
  spec.Validate();
  const double v = spec.TrueRate(id);
  return ResponseTable(spec, cfg)
      .Evaluate({report, id})
      .ExpectedUtility(spec.price, v);
}

VcgExpectation VcgExpected(const GameSpec& spec, int id, double report,
                           const McConfig& cfg) {
  spec.Validate();
  const double v = spec.TrueRate(id);
  const ResponseMoments m = ResponseTable(spec, cfg).Evaluate({report, id});
  return {m.VcgTransfer(spec.price), m.VcgPayoff(spec.price, v)};
}

Estimate AgvPhi(const GameSpec& spec, int id, double report,
                const McConfig& cfg) {
  spec.Validate();
  return ResponseTable(spec, cfg).Evaluate({report, id}).Phi(spec.price);
}

std::vector<double> AgvTransfersFromPhi(std::span<const double> phi) {
  const std::size_t n = phi.size();
  if (n < 2) throw ArgumentError("the AGV transfer needs at least two relays");
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) {
    double others = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) others += phi[j];
    }
    t[i] = phi[i] - others / static_cast<double>(n - 1);
  }
  return t;
}

std::vector<double> AgvTransfer(const GameSpec& spec,
                                const ReportVector& reports,
                                const McConfig& cfg) {
  spec.Validate();
  if (spec.n < 2) throw ArgumentError("the AGV transfer needs N >= 2");
  RequireReportsMatch(spec, reports);
  const std::vector<ResponseQuery> queries = ProfileQueries(reports);
  const std::vector<ResponseMoments> m =
      ResponseTable(spec, cfg).Evaluate(queries);
  std::vector<double> phi;
  for (const ResponseMoments& x : m) phi.push_back(x.Phi(spec.price).mean);
  return AgvTransfersFromPhi(phi);
}

Estimate AgvExpectedPayoff(const GameSpec& spec, int id, double report,
                           const McConfig& cfg) {
  spec.Validate();
  if (spec.n < 2) throw ArgumentError("the AGV transfer needs N >= 2");
  const double v = spec.TrueRate(id);
  std::vector<ResponseQuery> queries{{report, id}};
  for (int j = 1; j <= spec.n; ++j) {
    if (j != id) queries.push_back({spec.TrueRate(j), j});
  }
  const ResponseTable table(spec, cfg);
  const std::vector<ResponseMoments> m = table.Evaluate(queries);
  double others = 0.0;
  for (std::size_t q = 1; q < m.size(); ++q) others += m[q].Phi(spec.price).mean;
  Estimate payoff = m[0].AgvWelfare(spec.price, v);
  payoff.mean -= others / static_cast<double>(spec.n - 1);
  const Combination joint = AgvCombination(
      spec, spec.TruthfulReports().WithReport(id, report), id, spec.price * v);
  payoff.std_error =
      table.EvaluateCombinations(std::span<const Combination>(&joint, 1))
          .front()
          .std_error;
  return payoff;
}

MechanismResult VcgExpectedResult(const GameSpec& spec,
                                  const ReportVector& reports,
                                  const McConfig& cfg) {
  spec.Validate();
  RequireReportsMatch(spec, reports);
  const std::vector<ResponseMoments> m =
      ResponseTable(spec, cfg).Evaluate(ProfileQueries(reports));
  MechanismResult out;
  out.mode = ResultMode::kExpected;
  EstimatorInfo info = MakeEstimatorInfo(spec.prior, cfg, spec.n);
  for (int i = 0; i < spec.n; ++i) {
    const double v = spec.TrueRate(i + 1);
    const Estimate d = m[i].ExpectedUtility(spec.price, v);
    const Estimate t = m[i].VcgTransfer(spec.price);
    const Estimate u = m[i].VcgPayoff(spec.price, v);
    out.utility.push_back(d.mean);
    out.transfer.push_back(t.mean);
    out.payoff.push_back(u.mean);
    info.utility_se[i] = d.std_error;
    info.transfer_se[i] = t.std_error;
    info.payoff_se[i] = u.std_error;
  }
  out.estimator = std::move(info);
  return out;
}

MechanismResult AgvResult(const GameSpec& spec, const ReportVector& reports,
                          const McConfig& cfg) {
  spec.Validate();
  if (spec.n < 2) throw ArgumentError("the AGV transfer needs N >= 2");
  RequireReportsMatch(spec, reports);
  const ResponseTable table(spec, cfg);
  const std::vector<ResponseMoments> m = table.Evaluate(ProfileQueries(reports));
  std::vector<double> phi;
  for (const ResponseMoments& x : m) phi.push_back(x.Phi(spec.price).mean);
  std::vector<Combination> joint;
  for (int i = 1; i <= spec.n; ++i) {
    joint.push_back(AgvCombination(spec, reports, i, 0.0));
    joint.push_back(
        AgvCombination(spec, reports, i, spec.price * spec.TrueRate(i)));
  }
  const std::vector<Estimate> joint_est = table.EvaluateCombinations(joint);

  MechanismResult out;
  out.mode = ResultMode::kExpected;
  out.transfer = AgvTransfersFromPhi(phi);
  EstimatorInfo info = MakeEstimatorInfo(spec.prior, cfg, spec.n);
  for (int i = 0; i < spec.n; ++i) {
    const double v = spec.TrueRate(i + 1);
    const Estimate d = m[i].ExpectedUtility(spec.price, v);
    out.utility.push_back(d.mean);
    out.payoff.push_back(d.mean + out.transfer[i]);
    info.utility_se[i] = d.std_error;
    info.transfer_se[i] = joint_est[2 * i].std_error;
    info.payoff_se[i] = joint_est[2 * i + 1].std_error;
  }
  out.estimator = std::move(info);
  return out;
}

MechanismResult BaselineResult(const GameSpec& spec,
                               const ReportVector& reports,
                               const McConfig& cfg) {
  spec.Validate();
  RequireReportsMatch(spec, reports);
  const std::vector<ResponseMoments> m =
      ResponseTable(spec, cfg).Evaluate(ProfileQueries(reports));
  MechanismResult out;
  out.mode = ResultMode::kExpected;
  EstimatorInfo info = MakeEstimatorInfo(spec.prior, cfg, spec.n);
  for (int i = 0; i < spec.n; ++i) {
    const Estimate d = m[i].ExpectedUtility(spec.price, spec.TrueRate(i + 1));
    out.utility.push_back(d.mean);
    out.transfer.push_back(0.0);
    out.payoff.push_back(d.mean);
    info.utility_se[i] = d.std_error;
    info.payoff_se[i] = d.std_error;
  }
  out.estimator = std::move(info);
  return out;
}

}  // namespace relay_truth
