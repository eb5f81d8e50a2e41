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

// relay-truth <subcommand> --scenario <path> [--seed N] [--samples N]
//             [--out DIR] [--grid MIN:MAX:STEP] [--workers N]
//
// Exit status: 0 on success, 1 when a property the theory claims fails,
// 2 on bad usage or input.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "relay_truth/errors.h"
#include "relay_truth/runner.h"
#include "relay_truth/scenario.h"

namespace {

constexpr int kUsageExit = 2;

void PrintSummary(const relay_truth::RunReport& report) {
  using relay_truth::FormatNumber;
  for (const auto& rec : report.optimal_k) {
    std::cout << "sample " << rec.set_label << ": K = " << rec.optimum.k
              << "\n";
  }
  for (const auto& rec : report.verdicts) {
    std::cout << (rec.verdict.holds ? "holds " : "FAILS ")
              << relay_truth::MechanismName(rec.verdict.mechanism) << " "
              << relay_truth::PropertyName(rec.verdict.property)
              << " [sample " << rec.set_label << "]"
              << (rec.claimed ? "" : " (not claimed)") << " margin "
              << FormatNumber(rec.verdict.margin) << "\n";
  }
  for (const auto& note : report.notes) std::cout << "note: " << note << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relay secrecy-rate mechanism simulator"};
  std::vector<std::string> names;
  for (auto sub : relay_truth::AllSubcommands()) {
    names.emplace_back(relay_truth::SubcommandName(sub));
  }

  std::string subcommand;
  std::string scenario_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> samples;
  std::optional<int> workers;
  std::optional<std::string> grid;

  app.add_option("subcommand", subcommand, "What to run")
      ->required()
      ->check(CLI::IsMember(names));
  app.add_option("--scenario", scenario_path, "Scenario JSON file")
      ->required();
  app.add_option("--seed", seed, "Monte-Carlo seed (overrides RELAY_TRUTH_SEED)");
  app.add_option("--samples", samples,
                 "Monte-Carlo samples (overrides RELAY_TRUTH_SAMPLES)");
  app.add_option("--workers", workers, "Worker threads");
  app.add_option("--grid", grid, "Report grid MIN:MAX:STEP");
  app.add_option("--out", out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageExit;
  }

  try {
    relay_truth::RunOptions options{seed, samples, workers, std::nullopt};
    if (grid) options.grid = relay_truth::ParseGridSpec(*grid);
    const relay_truth::Scenario scenario = relay_truth::ApplyOverrides(
        relay_truth::LoadScenario(scenario_path), options);
    const relay_truth::RunReport report =
        relay_truth::Run(scenario, *relay_truth::ParseSubcommand(subcommand));
    const relay_truth::OutputPaths paths =
        relay_truth::WriteOutputs(report, out_dir);
    PrintSummary(report);
    std::cout << "wrote " << paths.csv.string() << "\n"
              << "wrote " << paths.report.string() << "\n";
    return report.ExitCode();
  } catch (const relay_truth::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
  } catch (const relay_truth::ConfigError& e) {
    std::cerr << "input error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return kUsageExit;
}
