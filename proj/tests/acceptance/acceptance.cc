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

// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails. All seeds and tolerances are fixed here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <utility>

#include <unistd.h>
#include <vector>

#include "oracle/order_statistics.h"
#include "relay_truth/analysis.h"
#include "relay_truth/channel_model.h"
#include "relay_truth/mechanisms.h"
#include "relay_truth/runner.h"
#include "relay_truth/scenario.h"
#include "relay_truth/selection.h"
#include "relay_truth/simd/response_kernel.h"

namespace relay_truth {
namespace {

constexpr std::uint64_t kInstanceSeed = 20261015;
constexpr std::uint64_t kMcSeed = 20261015;
constexpr int kRandomInstances = 100;

const std::vector<double> kSampleRates{1.0132, 0.6091, 0.3885, 1.3210};
const std::vector<double> kSampleAgvTransfers{-0.1247, 0.1570, 0.2831,
                                              -0.3154};

int failures = 0;

void Report(int criterion, bool pass, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion,
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

McConfig Mc(std::uint64_t samples, std::uint64_t stream = 0) {
  McConfig cfg;
  cfg.samples = samples;
  cfg.seed = kMcSeed;
  cfg.stream_id = stream;
  return cfg;
}

GameSpec SampleGame() {
  GameSpec spec;
  spec.n = 4;
  spec.k = 2;
  spec.true_rates = kSampleRates;
  return spec;
}

double UnitExponential(std::mt19937_64& gen) {
  return -std::log1p(-static_cast<double>(gen() >> 11) * 0x1.0p-53);
}

// The four-relay sample game followed by 100 random games: N in {3, 4, 5},
// K in {1, 2}, true rates ~ Exp(1).
std::vector<GameSpec> Instances() {
  std::vector<GameSpec> out{SampleGame()};
  std::mt19937_64 gen(kInstanceSeed);
  for (int t = 0; t < kRandomInstances; ++t) {
    GameSpec spec;
    spec.n = 3 + static_cast<int>(gen() % 3);
    spec.k = 1 + static_cast<int>(gen() % 2);
    std::vector<double> rates(spec.n);
    for (double& x : rates) x = UnitExponential(gen);
    spec.true_rates = rates;
    out.push_back(std::move(spec));
  }
  return out;
}

std::string Fmt(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, x);
  return buf;
}

// ---------------------------------------------------------------------------

void CriterionOne() {
  const GameSpec spec = SampleGame();
  const auto start = std::chrono::steady_clock::now();
  const MechanismResult r = AgvResult(spec, spec.TruthfulReports(), Mc(10'000'000));
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  bool pass = true;
  std::string values;
  for (int i = 0; i < 4; ++i) {
    pass = pass && std::abs(r.transfer[i] - kSampleAgvTransfers[i]) <= 0.02;
    values += (i ? ", " : "") + Fmt(r.transfer[i]);
  }
  const double sum = BudgetBalance(r.transfer);
  pass = pass && std::abs(sum) <= 1e-12 && seconds < 60.0;
  Report(1, pass,
         "AGV truthful transfers (" + values +
             ") vs (-0.1247, 0.1570, 0.2831, -0.3154) tol 0.02; sum " +
             std::to_string(sum) + " tol 1e-12; " + Fmt(seconds, 1) +
             " s at 1e7 samples (limit 60 s)");
}

void CriterionTwo() {
  const GameSpec spec = SampleGame();
  const VcgExpectation v = VcgExpected(spec, 4, 1.3210, Mc(10'000'000));
  const bool pass = std::abs(v.payoff.mean - 0.5822) <= 0.03;
  Report(2, pass,
         "VCG expected-transfer payoff of relay 4 = " + Fmt(v.payoff.mean) +
             " (se " + Fmt(v.payoff.std_error, 5) +
             ") vs 0.5822 tol 0.03; interpretation: expected transfers");
}

// Criteria 3, 4 and 5 share one response table per (N, K): the grid
// queries do not depend on the instance, and each instance adds its truthful
// queries.
struct Tables {
  std::vector<double> grid;
  // (n, k) -> moments of [grid x ids..., then truths of the listed instances]
  std::map<std::pair<int, int>, std::vector<ResponseMoments>> moments;
  std::map<std::pair<int, int>, std::vector<std::size_t>> truth_offset;
  // Joint per-draw AGV truthful payoff of every instance relay, in instance
  // order within each (n, k).
  std::map<std::pair<int, int>, std::vector<Estimate>> agv_payoff;
};

// Per-draw AGV payoff of relay `id` with everyone truthful.
Combination AgvTruthfulPayoff(const GameSpec& spec, int id) {
  Combination c;
  for (int j = 1; j <= spec.n; ++j) {
    const double v = spec.TrueRate(j);
    if (j == id) {
      c.push_back({{v, j}, spec.price * v, spec.price});
    } else {
      c.push_back({{v, j}, 0.0, -spec.price / (spec.n - 1)});
    }
  }
  return c;
}

Tables BuildTables(const std::vector<GameSpec>& games, const McConfig& cfg) {
  Tables t;
  t.grid = ReportGrid{0.0, 3.0, 0.01}.Points();
  std::map<std::pair<int, int>, std::vector<ResponseQuery>> queries;
  std::map<std::pair<int, int>, std::vector<Combination>> combinations;
  std::vector<std::size_t> offset(games.size());
  for (std::size_t g = 0; g < games.size(); ++g) {
    const auto key = std::make_pair(games[g].n, games[g].k);
    auto& q = queries[key];
    if (q.empty()) {
      for (int id = 1; id <= key.first; ++id) {
        for (double r : t.grid) q.push_back({r, id});
      }
    }
    offset[g] = q.size();
    for (int id = 1; id <= games[g].n; ++id) {
      q.push_back({games[g].TrueRate(id), id});
      combinations[key].push_back(AgvTruthfulPayoff(games[g], id));
    }
  }
  for (auto& [key, q] : queries) {
    const ResponseTable table(Prior::Exponential(), key.first, key.second,
                              cfg);
    t.moments[key] = table.Evaluate(q);
    t.agv_payoff[key] = table.EvaluateCombinations(combinations[key]);
  }
  for (std::size_t g = 0; g < games.size(); ++g) {
    t.truth_offset[{games[g].n, games[g].k}].push_back(offset[g]);
  }
  return t;
}

void CriteriaThreeFourFive(const std::vector<GameSpec>& games) {
  const McConfig cfg = Mc(1'000'000, 3);
  const Tables t = BuildTables(games, cfg);
  const std::size_t points = t.grid.size();
  const double step = 0.01;

  int cases = 0, hits = 0, beyond_grid = 0, misses_in_grid = 0;
  int plateau_ties = 0;
  int baseline_monotone = 0;
  int agv_ir_ok = 0, agv_ir_total = 0;
  double worst_ir_z = 1e300;
  std::map<std::pair<int, int>, std::size_t> seen;
  std::map<std::pair<int, int>, std::size_t> relays_seen;
  for (const GameSpec& spec : games) {
    const auto key = std::make_pair(spec.n, spec.k);
    const std::vector<ResponseMoments>& m = t.moments.at(key);
    const std::size_t off = t.truth_offset.at(key)[seen[key]++];
    const std::span<const ResponseMoments> all(m);
    const std::span<const ResponseMoments> truth = all.subspan(off, spec.n);
    bool monotone = true;
    for (int id = 1; id <= spec.n; ++id) {
      const auto grid_m = all.subspan(points * (id - 1), points);
      const double v = spec.TrueRate(id);
      const double others = AgvOthersTerm(spec, id, truth);
      for (Mechanism mech : {Mechanism::kAgv, Mechanism::kVcgExpected}) {
        const ScanResult s = ComposeScan(spec, mech, id, t.grid, grid_m,
                                         mech == Mechanism::kAgv ? others : 0);
        ++cases;
        if (std::abs(s.argmax_report - v) <= step * (1 + 1e-9)) {
          ++hits;
        } else if (v > t.grid.back()) {
          ++beyond_grid;
        } else {
          ++misses_in_grid;
          // A flat stretch of the curve: a report within one step of the
          // truth ties the first maximizer exactly.
          for (std::size_t g = 0; g < points; ++g) {
            if (std::abs(t.grid[g] - v) <= step * (1 + 1e-9) &&
                s.payoff[g] == s.argmax_payoff) {
              ++plateau_ties;
              break;
            }
          }
          if (std::getenv("ACCEPTANCE_DEBUG")) {
            std::printf("miss %s n=%d k=%d id=%d v=%.6f argmax=%.4f\n",
                        std::string(MechanismName(mech)).c_str(), spec.n,
                        spec.k, id, v, s.argmax_report);
          }
        }
      }
      const ScanResult base =
          ComposeScan(spec, Mechanism::kBaseline, id, t.grid, grid_m, 0.0);
      for (std::size_t g = 1; g < points; ++g) {
        monotone = monotone && base.payoff[g] >= base.payoff[g - 1];
      }
      const double payoff =
          truth[id - 1].AgvWelfare(spec.price, v).mean - others;
      const Estimate w = t.agv_payoff.at(key)[relays_seen[key]++];
      ++agv_ir_total;
      if (payoff > 3 * w.std_error) {
        ++agv_ir_ok;
      } else if (std::getenv("ACCEPTANCE_DEBUG")) {
        std::printf("ir n=%d k=%d id=%d v=%.6f payoff=%.6g se=%.3g\n", spec.n,
                    spec.k, id, v, payoff, w.std_error);
      }
      if (w.std_error > 0) worst_ir_z = std::min(worst_ir_z, payoff / w.std_error);
    }
    if (monotone) ++baseline_monotone;
  }

  // Realized VCG: every relay, every deviation on the 0.1 grid, others
  // truthful; for N = 3 also every report profile of the others on the grid.
  const std::vector<double> coarse = ReportGrid{0.0, 3.0, 0.1}.Points();
  long checks = 0, counterexamples = 0, ir_checks = 0, ir_violations = 0;
  auto payoff_of = [](const GameSpec& spec, const ReportVector& r, int id) {
    return Utilities(spec, r)[id - 1] + VcgTransferRealized(spec, r, id);
  };
  for (const GameSpec& spec : games) {
    for (int id = 1; id <= spec.n; ++id) {
      std::vector<ReportVector> profiles{spec.TruthfulReports()};
      if (spec.n == 3) {
        const ReportVector base = spec.TruthfulReports();
        const int a = id == 1 ? 2 : 1;
        const int b = id == 3 ? 2 : 3;
        for (double x : coarse) {
          for (double y : coarse) {
            profiles.push_back(base.WithReport(a, x).WithReport(b, y));
          }
        }
      }
      for (const ReportVector& honest : profiles) {
        const double truthful = payoff_of(spec, honest, id);
        ++ir_checks;
        if (truthful < -1e-12) ++ir_violations;
        for (double lie : coarse) {
          ++checks;
          if (payoff_of(spec, honest.WithReport(id, lie), id) >
              truthful + 1e-12) {
            ++counterexamples;
          }
        }
      }
    }
  }

  const double rate = static_cast<double>(hits) / cases;
  Report(3, rate >= 0.95 && counterexamples == 0,
         "AGV + VCG-expected argmax within 0.01 of truth in " +
             std::to_string(hits) + "/" + std::to_string(cases) + " = " +
             Fmt(100 * rate, 2) + "% (need >= 95%; misses: " +
             std::to_string(beyond_grid) + " with truth > 3, " +
             std::to_string(misses_in_grid) + " inside the grid, " +
             std::to_string(plateau_ties) +
             " of them exact ties with a report within one step); within "
             "the grid " +
             std::to_string(hits) + "/" + std::to_string(cases - beyond_grid) +
             "; realized VCG " + std::to_string(checks) +
             " deviations, " + std::to_string(counterexamples) +
             " counterexamples");

  // Closed form for N = 2, K = 1: price * v * (1 - e^{-r}).
  GameSpec two;
  two.n = 2;
  two.k = 1;
  two.price = 1.0;
  two.true_rates = std::vector<double>{1.0132, 0.6091};
  std::vector<double> r20;
  for (int j = 1; j <= 20; ++j) r20.push_back(0.15 * j);
  const ScanResult s =
      BestResponseScan(two, Mechanism::kBaseline, 1, r20, Mc(1'000'000, 4));
  int within = 0;
  double worst_z = 0.0;
  for (std::size_t j = 0; j < r20.size(); ++j) {
    const double exact = two.price * 1.0132 * -std::expm1(-r20[j]);
    const double z = std::abs(s.payoff[j] - exact) / s.payoff_se[j];
    worst_z = std::max(worst_z, z);
    if (std::abs(s.payoff[j] - exact) <= 3 * s.payoff_se[j]) ++within;
  }
  Report(4,
         baseline_monotone == static_cast<int>(games.size()) && within == 20,
         "baseline curve nondecreasing for " +
             std::to_string(baseline_monotone) + "/" +
             std::to_string(games.size()) +
             " instances; N=2 K=1 closed form within 3 se at " +
             std::to_string(within) + "/20 points (max |z| " +
             Fmt(worst_z, 2) + ")");

  Report(5, ir_violations == 0 && agv_ir_ok == agv_ir_total,
         "realized VCG truthful payoff >= 0 in " +
             std::to_string(ir_checks - ir_violations) + "/" +
             std::to_string(ir_checks) +
             " swept profiles; AGV truthful expected payoff > 3 se for " +
             std::to_string(agv_ir_ok) + "/" + std::to_string(agv_ir_total) +
             " relays (min payoff/se " + Fmt(worst_ir_z, 1) + ")");
}

void CriterionSix(const std::vector<GameSpec>& games) {
  const GameSpec spec = SampleGame();
  const double sample_total =
      BudgetBalance(VcgRealized(spec, spec.TruthfulReports()).transfer);
  bool nonpositive = true;
  for (const GameSpec& g : games) {
    nonpositive = nonpositive &&
                  BudgetBalance(VcgRealized(g, g.TruthfulReports()).transfer) <=
                      1e-12;
  }
  CheckOptions opt;
  opt.bb_trials = 1000;
  opt.exact_tol = 1e-12;
  const PropertyVerdict agv =
      CheckProperty(spec, Mechanism::kAgv, Property::kBB, Mc(1'000'000, 6), opt);
  Report(6,
         std::abs(sample_total - -1.2182) <= 1e-12 && nonpositive && agv.holds,
         "realized VCG sample total " + Fmt(sample_total, 12) +
             " (want -1.2182), total <= 0 on all " +
             std::to_string(games.size()) + " instances: " +
             (nonpositive ? "yes" : "no") + "; AGV " + agv.detail +
             " (tol 1e-12)");
}

void CriterionSeven() {
  const Scenario s = LoadScenario(RELAY_TRUTH_SCENARIO_DIR "/snr_samples.json");
  const RunReport r = Run(s, Subcommand::kOptimalK);
  std::map<std::string, int> want{{"low1", 2}, {"low2", 3}, {"high1", 1},
                                  {"high2", 1}};
  bool samples_ok = r.optimal_k.size() == 4;
  std::string got;
  for (const OptimalKRecord& rec : r.optimal_k) {
    samples_ok = samples_ok && want[rec.set_label] == rec.optimum.k;
    got += (got.empty() ? "" : ", ") + rec.set_label + "=" +
           std::to_string(rec.optimum.k);
  }

  std::mt19937_64 gen(kInstanceSeed + 7);
  int agree = 0;
  for (int t = 0; t < 1000; ++t) {
    auto db = [&] { return -5.0 + 25.0 * (gen() >> 11) * 0x1.0p-53; };
    const int n = 1 + static_cast<int>(gen() % 8);
    std::vector<RelayChannel> relays;
    for (int id = 1; id <= n; ++id) {
      const double d = db(), e = db();
      relays.push_back(RelayChannel::FromSnr(id, DbToLinear(d), DbToLinear(e)));
    }
    const double sd = db(), se = db();
    const DirectLink direct = DirectLink::FromSnr(DbToLinear(sd), DbToLinear(se));
    const ReportVector reports = ReportVector::FromChannels(relays);
    const OptimalKResult best = OptimalKSelection(direct, reports);
    const std::vector<SecrecySweepPoint> sweep = SecrecyVsKSweep(direct, reports);
    double max_psi = 0.0, max_rate = 0.0;
    for (const SecrecySweepPoint& p : sweep) {
      max_psi = std::max(max_psi, p.psi);
      max_rate = std::max(max_rate, p.secrecy_rate);
    }
    if (std::abs(best.psi.back() - max_psi) <= 1e-12 &&
        sweep[best.k - 1].secrecy_rate == max_rate) {
      ++agree;
    }
  }
  Report(7, samples_ok && agree == 1000,
         "optimal K " + got + " (want low1=2, low2=3, high1=1, high2=1); " +
             std::to_string(agree) +
             "/1000 random instances with Psi_K = max Psi (1e-12) and K an "
             "argmax of the secrecy sweep");
}

void CriterionEight() {
  const McConfig cfg = Mc(1'000'000, 8);
  const std::vector<std::pair<int, int>> games{
      {2, 1}, {3, 1}, {3, 2}, {4, 1}, {4, 2}};
  const std::vector<double> reports{0.1, 0.35, 0.6, 0.85, 1.1,
                                    1.4, 1.7, 2.0, 2.4, 2.9};
  int spots = 0, ok = 0;
  double worst = 0.0;
  for (const auto& [n, k] : games) {
    const ResponseTable table(Prior::Exponential(), n, k, cfg);
    for (double r : reports) {
      const int id = 1 + spots % n;
      const ResponseMoments m = table.Evaluate(ResponseQuery{r, id});
      const double p = m.SelectionProbability();
      const double p_se = std::sqrt(p * (1 - p) / cfg.samples);
      const Estimate phi = m.Phi(1.0);
      const double zp =
          std::abs(p - relay_truth_oracle::SelectionProbability(n, k, r)) / p_se;
      const double zphi =
          std::abs(phi.mean - relay_truth_oracle::Phi(n, k, r)) / phi.std_error;
      worst = std::max({worst, zp, zphi});
      ++spots;
      if (zp <= 3.0 && zphi <= 3.0) ++ok;
    }
  }
  Report(8, ok == spots,
         std::to_string(ok) + "/" + std::to_string(spots) +
             " spot checks with Phi and P(selected) within 3 se of the "
             "order-statistic integrals (max |z| " +
             Fmt(worst, 2) + ")");
}

std::string ReadFile(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void CriterionNine() {
  const auto root = std::filesystem::temp_directory_path() /
                    ("relay_truth_acceptance_" + std::to_string(::getpid()));
  Scenario sample = LoadScenario(RELAY_TRUTH_SCENARIO_DIR "/four_relays.json");
  sample.mc.samples = 200'000;
  sample.mc.seed = kMcSeed;
  Scenario snr = LoadScenario(RELAY_TRUTH_SCENARIO_DIR "/snr_samples.json");

  int compared = 0, identical = 0;
  for (Subcommand sub : AllSubcommands()) {
    if (sub == Subcommand::kVerify) continue;
    const bool needs_snr =
        sub == Subcommand::kFig8 || sub == Subcommand::kOptimalK;
    Scenario s = needs_snr ? snr : sample;
    std::vector<std::string> bodies;
    for (int run = 0; run < 3; ++run) {
      s.mc.workers = run == 2 ? 8 : 1;
      const auto dir = root / ("run" + std::to_string(run));
      bodies.push_back(ReadFile(WriteOutputs(Run(s, sub), dir).csv));
    }
    ++compared;
    if (!bodies[0].empty() && bodies[0] == bodies[1] && bodies[0] == bodies[2]) {
      ++identical;
    }
  }
  std::filesystem::remove_all(root);
  Report(9, identical == compared,
         std::to_string(identical) + "/" + std::to_string(compared) +
             " subcommands wrote byte-identical CSVs across two 1-worker runs "
             "and an 8-worker run");
}

}  // namespace
}  // namespace relay_truth

int main() {
  using namespace relay_truth;
  std::printf("kernel: %s\n", std::string(simd::IsaName(simd::ActiveIsa())).c_str());
  const std::vector<GameSpec> games = Instances();
  CriterionOne();
  CriterionTwo();
  CriteriaThreeFourFive(games);
  CriterionSix(games);
  CriterionSeven();
  CriterionEight();
  CriterionNine();
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
