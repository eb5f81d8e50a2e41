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

#ifndef RELAY_TRUTH_RUNNER_H_
#define RELAY_TRUTH_RUNNER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "relay_truth/analysis.h"
#include "relay_truth/mechanisms.h"
#include "relay_truth/scenario.h"
#include "relay_truth/selection.h"

namespace relay_truth {

inline constexpr std::string_view kToolVersion = "0.1.0";

enum class Subcommand {
  kFig2,
  kFig3,
  kFig4,
  kFig5,
  kFig3d,
  kFig6,
  kFig7,
  kFig8,
  kVerify,
  kOptimalK,
};

std::string_view SubcommandName(Subcommand subcommand);
std::optional<Subcommand> ParseSubcommand(std::string_view name);
std::vector<Subcommand> AllSubcommands();

// Command-line overrides. Unset fields fall back to the environment
// (RELAY_TRUTH_SEED, RELAY_TRUTH_SAMPLES) and then to the scenario.
struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> samples;
  std::optional<int> workers;
  std::optional<ReportGrid> grid;
};

using EnvLookup = std::function<std::optional<std::string>(const char*)>;

// Reads the process environment.
std::optional<std::string> ProcessEnv(const char* name);

// Returns `scenario` with env and flag overrides applied (flag wins). Throws
// UsageError on malformed env values.
Scenario ApplyOverrides(Scenario scenario, const RunOptions& flags,
                        const EnvLookup& env = ProcessEnv);

// Parses "MIN:MAX:STEP". Throws UsageError.
ReportGrid ParseGridSpec(std::string_view text);

struct ResultTable {
  std::string set_label;
  Mechanism mechanism = Mechanism::kAgv;
  int k = 0;
  std::vector<double> reports;
  MechanismResult result;
};

struct VerdictRecord {
  std::string set_label;
  bool claimed = false;
  PropertyVerdict verdict;
};

struct OptimalKRecord {
  std::string set_label;
  OptimalKResult optimum;
  std::vector<SecrecySweepPoint> sweep;
};

struct Provenance {
  std::string tool_version;
  std::uint64_t seed = 0;
  std::uint64_t samples = 0;
  int workers = 1;
  std::string isa;
  double wall_seconds = 0.0;
};

struct RunReport {
  Subcommand subcommand = Subcommand::kVerify;
  Scenario scenario;
  std::vector<ResultTable> results;
  std::vector<VerdictRecord> verdicts;
  std::vector<OptimalKRecord> optimal_k;
  // Header row plus one line per data row, '\n' terminated.
  std::string csv;
  std::vector<std::string> notes;
  Provenance provenance;

  // 1 if a property the theory claims fails, else 0.
  int ExitCode() const;
};

// Runs one subcommand. Throws UsageError when the scenario lacks what the
// subcommand needs (e.g. fig8 without SNR pairs).
RunReport Run(const Scenario& scenario, Subcommand subcommand);

// Structured report with stable key names; the format is documented in the
// README.
std::string ReportToJson(const RunReport& report);

// Shortest round-trip decimal form of `x`.
std::string FormatNumber(double x);

struct OutputPaths {
  std::filesystem::path csv;
  std::filesystem::path report;
};

// Writes <name>.<subcommand>.csv and <name>.<subcommand>.report.json.
OutputPaths WriteOutputs(const RunReport& report,
                         const std::filesystem::path& out_dir);

}  // namespace relay_truth

#endif  // RELAY_TRUTH_RUNNER_H_
