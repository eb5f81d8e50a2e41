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

#include "relay_truth/runner.h"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <utility>

#include "json.hpp"
#include "relay_truth/errors.h"
#include "relay_truth/simd/response_kernel.h"

namespace relay_truth {
namespace {

using Json = nlohmann::ordered_json;

constexpr std::pair<Subcommand, std::string_view> kSubcommands[] = {
    {Subcommand::kFig2, "fig2"},   {Subcommand::kFig3, "fig3"},
    {Subcommand::kFig4, "fig4"},   {Subcommand::kFig5, "fig5"},
    {Subcommand::kFig3d, "fig3d"}, {Subcommand::kFig6, "fig6"},
    {Subcommand::kFig7, "fig7"},   {Subcommand::kFig8, "fig8"},
    {Subcommand::kVerify, "verify"}, {Subcommand::kOptimalK, "optimal-k"},
};

std::optional<std::uint64_t> ParseUnsigned(std::string_view text) {
  std::uint64_t value = 0;
  const auto [end, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty()) {
    return std::nullopt;
  }
  return value;
}

std::optional<std::uint64_t> EnvUnsigned(const EnvLookup& env,
                                         const char* name) {
  const std::optional<std::string> raw = env(name);
  if (!raw) return std::nullopt;
  const auto value = ParseUnsigned(*raw);
  if (!value) {
    throw UsageError(std::string(name) + "='" + *raw +
                     "' is not a non-negative integer");
  }
  return value;
}

const RelaySet& SingleSet(const Scenario& s, Subcommand sub) {
  if (s.relay_sets.size() != 1) {
    throw UsageError(std::string(SubcommandName(sub)) +
                     " draws curves for one relay set; scenario '" + s.name +
                     "' has " + std::to_string(s.relay_sets.size()));
  }
  return s.relay_sets.front();
}

void RequireSnr(const Scenario& s, Subcommand sub) {
  if (!s.direct) {
    throw UsageError(std::string(SubcommandName(sub)) +
                     " needs a direct_link in scenario '" + s.name + "'");
  }
  for (const RelaySet& set : s.relay_sets) {
    if (!set.has_snr()) {
      throw UsageError(std::string(SubcommandName(sub)) +
                       " needs SNR pairs on every relay; set '" + set.label +
                       "' has direct rates");
    }
  }
}

std::vector<double> ReportsOf(const ReportVector& reports) {
  return reports.rates();
}

MechanismResult TruthfulResult(const GameSpec& spec, Mechanism mechanism,
                               const McConfig& cfg) {
  const ReportVector truthful = spec.TruthfulReports();
  switch (mechanism) {
    case Mechanism::kVcgExpected:
      return VcgExpectedResult(spec, truthful, cfg);
    case Mechanism::kVcgRealized:
      return VcgRealized(spec, truthful);
    case Mechanism::kAgv:
      return AgvResult(spec, truthful, cfg);
    case Mechanism::kBaseline:
      return BaselineResult(spec, truthful, cfg);
  }
  return {};
}

void AddTruthfulTable(RunReport& report, const RelaySet& set,
                      const GameSpec& spec, Mechanism mechanism) {
  report.results.push_back({set.label, mechanism, spec.k,
                            ReportsOf(spec.TruthfulReports()),
                            TruthfulResult(spec, mechanism, report.scenario.mc)});
}

// Per-relay curves of an expected mechanism from one shared table.
void RelayCurves(RunReport& report, const GameSpec& spec, Mechanism mechanism,
                 bool transfer) {
  const std::vector<double> grid = report.scenario.grid.Points();
  std::vector<ResponseQuery> queries;
  queries.reserve(grid.size() * spec.n + spec.n);
  for (int id = 1; id <= spec.n; ++id) {
    for (double r : grid) queries.push_back({r, id});
  }
  for (int id = 1; id <= spec.n; ++id) queries.push_back({spec.TrueRate(id), id});
  const std::vector<ResponseMoments> m =
      ResponseTable(spec, report.scenario.mc).Evaluate(queries);
  const std::span<const ResponseMoments> all(m);
  const std::span<const ResponseMoments> truth =
      all.subspan(grid.size() * spec.n, spec.n);

  report.csv = "report,relay_id,value\n";
  for (int id = 1; id <= spec.n; ++id) {
    const double others = mechanism == Mechanism::kAgv
                              ? AgvOthersTerm(spec, id, truth)
                              : 0.0;
    const ScanResult scan = ComposeScan(
        spec, mechanism, id, grid,
        all.subspan(grid.size() * (id - 1), grid.size()), others);
    const std::vector<double>& values = transfer ? scan.transfer : scan.payoff;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      report.csv += FormatNumber(grid[g]) + "," + std::to_string(id) + "," +
                    FormatNumber(values[g]) + "\n";
    }
  }
}

void RunCurves(RunReport& report, Subcommand sub) {
  const Scenario& s = report.scenario;
  const RelaySet& set = SingleSet(s, sub);
  const GameSpec spec = ToGameSpec(s, set);
  const bool vcg = sub == Subcommand::kFig2 || sub == Subcommand::kFig3;
  const Mechanism mechanism = vcg ? Mechanism::kVcgExpected : Mechanism::kAgv;
  if (mechanism == Mechanism::kAgv && spec.n < 2) {
    throw UsageError("AGV curves need at least two relays");
  }
  const bool transfer = sub == Subcommand::kFig3 || sub == Subcommand::kFig5;
  RelayCurves(report, spec, mechanism, transfer);
  AddTruthfulTable(report, set, spec, mechanism);
}

void RunSurface(RunReport& report) {
  const Scenario& s = report.scenario;
  const RelaySet& set = SingleSet(s, Subcommand::kFig3d);
  const GameSpec spec = ToGameSpec(s, set);
  if (spec.n < 2) throw UsageError("fig3d needs at least two relays");
  if (s.focus_relay > spec.n) throw UsageError("focus_relay out of range");
  const std::vector<double> truths = s.true_rate_grid.Points();
  const std::vector<double> reports = s.grid.Points();
  const std::vector<double> surface =
      AgvPayoffSurface(spec, s.focus_relay, truths, reports, s.mc);
  report.csv = "report,true_rate,value\n";
  for (std::size_t t = 0; t < truths.size(); ++t) {
    for (std::size_t r = 0; r < reports.size(); ++r) {
      report.csv += FormatNumber(reports[r]) + "," + FormatNumber(truths[t]) +
                    "," + FormatNumber(surface[t * reports.size() + r]) + "\n";
    }
  }
  AddTruthfulTable(report, set, spec, Mechanism::kAgv);
}

void RunKFamily(RunReport& report, Subcommand sub) {
  const Scenario& s = report.scenario;
  const RelaySet& set = SingleSet(s, sub);
  const GameSpec spec = ToGameSpec(s, set);
  if (spec.n < 2) throw UsageError("K curves need at least two relays");
  if (s.focus_relay > spec.n) throw UsageError("focus_relay out of range");
  std::vector<int> ks = s.k_values;
  if (ks.empty()) {
    for (int k = 1; k <= spec.n; ++k) ks.push_back(k);
  }
  const std::vector<double> grid = s.grid.Points();
  const std::vector<KCurve> curves = TruthVsKScan(
      spec, s.focus_relay, spec.TrueRate(s.focus_relay), ks, grid, s.mc);
  report.csv = "report,k,value\n";
  for (const KCurve& c : curves) {
    const std::vector<double>& values =
        sub == Subcommand::kFig6 ? c.payoff : c.transfer;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      report.csv += FormatNumber(grid[g]) + "," + std::to_string(c.k) + "," +
                    FormatNumber(values[g]) + "\n";
    }
  }
  for (int k : ks) {
    GameSpec g = spec;
    g.k = k;
    AddTruthfulTable(report, set, g, Mechanism::kAgv);
  }
}

void RunSecrecy(RunReport& report, Subcommand sub) {
  const Scenario& s = report.scenario;
  RequireSnr(s, sub);
  report.csv = sub == Subcommand::kFig8 ? "k,secrecy_rate,sample\n"
                                        : "sample,k,psi,secrecy_rate\n";
  for (const RelaySet& set : s.relay_sets) {
    const ReportVector channels = ChannelReports(set, s.bandwidth);
    OptimalKRecord rec{set.label, OptimalKSelection(*s.direct, channels),
                       SecrecyVsKSweep(*s.direct, channels)};
    if (sub == Subcommand::kFig8) {
      for (const SecrecySweepPoint& p : rec.sweep) {
        report.csv += std::to_string(p.k) + "," +
                      FormatNumber(p.secrecy_rate) + "," + set.label + "\n";
      }
    } else {
      const SecrecySweepPoint& p = rec.sweep.at(rec.optimum.k - 1);
      report.csv += set.label + "," + std::to_string(rec.optimum.k) + "," +
                    FormatNumber(p.psi) + "," + FormatNumber(p.secrecy_rate) +
                    "\n";
    }
    report.optimal_k.push_back(std::move(rec));
  }
}

std::vector<Property> PropertiesFor(Mechanism m, bool relay_count) {
  switch (m) {
    case Mechanism::kBaseline:
      return {Property::kIC, Property::kIR, Property::kBaselineMonotone};
    case Mechanism::kAgv:
    case Mechanism::kVcgExpected:
    case Mechanism::kVcgRealized:
      if (relay_count) {
        return {Property::kIC, Property::kIR, Property::kBB,
                Property::kOptimalKArgmax};
      }
      return {Property::kIC, Property::kIR, Property::kBB};
  }
  return {};
}

void RunVerify(RunReport& report) {
  const Scenario& s = report.scenario;
  report.csv = "sample,mechanism,property,claimed,holds,margin\n";
  for (const RelaySet& set : s.relay_sets) {
    const GameSpec spec = ToGameSpec(s, set);
    CheckOptions options;
    options.grid = s.grid;
    const bool relay_count = s.direct.has_value() && set.has_snr();
    if (relay_count) {
      options.direct = s.direct;
      options.channel_reports = ChannelReports(set, s.bandwidth);
    }
    for (Mechanism m : s.mechanisms) {
      if (m == Mechanism::kAgv && spec.n < 2) {
        report.notes.push_back("set '" + set.label +
                               "': AGV skipped, it needs at least two relays");
        continue;
      }
      AddTruthfulTable(report, set, spec, m);
      for (Property p : PropertiesFor(m, relay_count)) {
        VerdictRecord rec{set.label, ClaimedByTheory(m, p),
                          CheckProperty(spec, m, p, s.mc, options)};
        report.csv += set.label + "," + std::string(MechanismName(m)) + "," +
                      std::string(PropertyName(p)) + "," +
                      (rec.claimed ? "true" : "false") + "," +
                      (rec.verdict.holds ? "true" : "false") + "," +
                      FormatNumber(rec.verdict.margin) + "\n";
        report.verdicts.push_back(std::move(rec));
      }
    }
  }
}

Json NumberOrNull(double x) {
  return std::isfinite(x) ? Json(x) : Json(nullptr);
}

Json Numbers(const std::vector<double>& xs) {
  Json out = Json::array();
  for (double x : xs) out.push_back(NumberOrNull(x));
  return out;
}

Json ConfigJson(const McConfig& cfg) {
  return Json{{"samples", cfg.samples},
              {"seed", cfg.seed},
              {"stream_id", cfg.stream_id},
              {"workers", cfg.workers}};
}

Json ResultJson(const ResultTable& t) {
  Json j;
  j["sample"] = t.set_label;
  j["mechanism"] = MechanismName(t.mechanism);
  j["k"] = t.k;
  j["mode"] = t.result.mode == ResultMode::kRealized ? "realized" : "expected";
  j["reports"] = Numbers(t.reports);
  j["utility"] = Numbers(t.result.utility);
  j["transfer"] = Numbers(t.result.transfer);
  j["payoff"] = Numbers(t.result.payoff);
  j["transfer_sum"] = NumberOrNull(BudgetBalance(t.result.transfer));
  if (t.result.estimator) {
    const EstimatorInfo& e = *t.result.estimator;
    j["estimator"] = Json{{"samples", e.samples},
                          {"seed", e.seed},
                          {"stream_id", e.stream_id},
                          {"utility_se", Numbers(e.utility_se)},
                          {"transfer_se", Numbers(e.transfer_se)},
                          {"payoff_se", Numbers(e.payoff_se)}};
  }
  return j;
}

Json VerdictJson(const VerdictRecord& r) {
  const PropertyVerdict& v = r.verdict;
  Json j;
  j["sample"] = r.set_label;
  j["mechanism"] = MechanismName(v.mechanism);
  j["property"] = PropertyName(v.property);
  j["claimed"] = r.claimed;
  j["holds"] = v.holds;
  j["margin"] = NumberOrNull(v.margin);
  j["detail"] = v.detail;
  if (v.witness) {
    const Witness& w = *v.witness;
    j["witness"] = Json{
        {"n", w.spec.n},
        {"k", w.spec.k},
        {"price", w.spec.price},
        {"true_rates", w.spec.true_rates ? Numbers(*w.spec.true_rates)
                                         : Json(nullptr)},
        {"reports", Numbers(w.reports)},
        {"relay_id", w.relay_id},
        {"report", NumberOrNull(w.report)},
        {"value", NumberOrNull(w.value)},
        {"mc", ConfigJson(w.cfg)},
        {"note", w.note}};
  }
  return j;
}

Json OptimalKJson(const OptimalKRecord& r) {
  Json sweep = Json::array();
  for (const SecrecySweepPoint& p : r.sweep) {
    sweep.push_back(Json{{"k", p.k},
                         {"psi", NumberOrNull(p.psi)},
                         {"secrecy_rate", NumberOrNull(p.secrecy_rate)}});
  }
  Json selected = Json::array();
  for (int id : r.optimum.outcome.selected) selected.push_back(id);
  return Json{{"sample", r.set_label},
              {"k", r.optimum.k},
              {"selected", selected},
              {"psi", Numbers(r.optimum.psi)},
              {"sweep", sweep}};
}

}  // namespace

std::string_view SubcommandName(Subcommand subcommand) {
  for (const auto& [sub, name] : kSubcommands) {
    if (sub == subcommand) return name;
  }
  return "unknown";
}

std::optional<Subcommand> ParseSubcommand(std::string_view name) {
  for (const auto& [sub, n] : kSubcommands) {
    if (n == name) return sub;
  }
  return std::nullopt;
}

std::vector<Subcommand> AllSubcommands() {
  std::vector<Subcommand> out;
  for (const auto& entry : kSubcommands) out.push_back(entry.first);
  return out;
}

std::optional<std::string> ProcessEnv(const char* name) {
  const char* value = std::getenv(name);
  if (value == nullptr) return std::nullopt;
  return std::string(value);
}

Scenario ApplyOverrides(Scenario scenario, const RunOptions& flags,
                        const EnvLookup& env) {
  if (const auto seed = flags.seed ? flags.seed
                                   : EnvUnsigned(env, "RELAY_TRUTH_SEED")) {
    scenario.mc.seed = *seed;
  }
  if (const auto samples = flags.samples
                               ? flags.samples
                               : EnvUnsigned(env, "RELAY_TRUTH_SAMPLES")) {
    if (*samples < 1) throw UsageError("samples must be >= 1");
    scenario.mc.samples = *samples;
  }
  if (flags.workers) {
    if (*flags.workers < 1) throw UsageError("workers must be >= 1");
    scenario.mc.workers = *flags.workers;
  }
  if (flags.grid) {
    try {
      flags.grid->Validate();
    } catch (const ArgumentError& e) {
      throw UsageError(std::string("bad grid: ") + e.what());
    }
    scenario.grid = *flags.grid;
  }
  return scenario;
}

ReportGrid ParseGridSpec(std::string_view text) {
  double parts[3] = {0.0, 0.0, 0.0};
  std::string_view rest = text;
  for (int i = 0; i < 3; ++i) {
    const std::size_t colon = rest.find(':');
    if ((i < 2) == (colon == std::string_view::npos)) {
      throw UsageError("grid must look like MIN:MAX:STEP, got '" +
                       std::string(text) + "'");
    }
    const std::string_view field = i < 2 ? rest.substr(0, colon) : rest;
    const auto [end, ec] =
        std::from_chars(field.data(), field.data() + field.size(), parts[i]);
    if (ec != std::errc() || end != field.data() + field.size() ||
        field.empty()) {
      throw UsageError("grid field '" + std::string(field) +
                       "' is not a number");
    }
    if (i < 2) rest = rest.substr(colon + 1);
  }
  ReportGrid grid{parts[0], parts[1], parts[2]};
  try {
    grid.Validate();
  } catch (const ArgumentError& e) {
    throw UsageError(std::string("bad grid: ") + e.what());
  }
  return grid;
}

int RunReport::ExitCode() const {
  for (const VerdictRecord& r : verdicts) {
    if (r.claimed && !r.verdict.holds) return 1;
  }
  return 0;
}

RunReport Run(const Scenario& scenario, Subcommand subcommand) {
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.subcommand = subcommand;
  report.scenario = scenario;
  try {
    switch (subcommand) {
      case Subcommand::kFig2:
      case Subcommand::kFig3:
      case Subcommand::kFig4:
      case Subcommand::kFig5:
        RunCurves(report, subcommand);
        break;
      case Subcommand::kFig3d:
        RunSurface(report);
        break;
      case Subcommand::kFig6:
      case Subcommand::kFig7:
        RunKFamily(report, subcommand);
        break;
      case Subcommand::kFig8:
      case Subcommand::kOptimalK:
        RunSecrecy(report, subcommand);
        break;
      case Subcommand::kVerify:
        RunVerify(report);
        break;
    }
  } catch (const ArgumentError& e) {
    throw UsageError(std::string(SubcommandName(subcommand)) + ": " +
                     e.what());
  }
  report.provenance.tool_version = std::string(kToolVersion);
  report.provenance.seed = scenario.mc.seed;
  report.provenance.samples = scenario.mc.samples;
  report.provenance.workers = scenario.mc.workers;
  report.provenance.isa = std::string(simd::IsaName(simd::ActiveIsa()));
  report.provenance.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

std::string ReportToJson(const RunReport& report) {
  Json j;
  j["subcommand"] = SubcommandName(report.subcommand);
  j["scenario"] = Json::parse(SerializeScenario(report.scenario));
  j["vcg_transfer_interpretation"] = "expected";
  Json results = Json::array();
  for (const ResultTable& t : report.results) results.push_back(ResultJson(t));
  j["results"] = std::move(results);
  Json verdicts = Json::array();
  for (const VerdictRecord& v : report.verdicts) {
    verdicts.push_back(VerdictJson(v));
  }
  j["verdicts"] = std::move(verdicts);
  Json optimal = Json::array();
  for (const OptimalKRecord& r : report.optimal_k) {
    optimal.push_back(OptimalKJson(r));
  }
  j["optimal_k"] = std::move(optimal);
  j["csv"] = report.csv;
  j["notes"] = report.notes;
  j["exit_code"] = report.ExitCode();
  j["provenance"] = Json{{"tool_version", report.provenance.tool_version},
                         {"seed", report.provenance.seed},
                         {"samples", report.provenance.samples},
                         {"workers", report.provenance.workers},
                         {"isa", report.provenance.isa},
                         {"wall_seconds", report.provenance.wall_seconds}};
  return j.dump(2) + "\n";
}

std::string FormatNumber(double x) {
  if (x == 0.0) return "0";
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) return "nan";
  return std::string(buf, end);
}

OutputPaths WriteOutputs(const RunReport& report,
                         const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::string stem =
      report.scenario.name + "." + std::string(SubcommandName(report.subcommand));
  OutputPaths paths{out_dir / (stem + ".csv"), out_dir / (stem + ".report.json")};
  auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + p.string());
    out << text;
  };
  write(paths.csv, report.csv);
  write(paths.report, ReportToJson(report));
  return paths;
}

}  // namespace relay_truth
