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

#ifndef RELAY_TRUTH_PRIORS_H_
#define RELAY_TRUTH_PRIORS_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace relay_truth {

enum class PriorKind { kExponential, kPointMass };

// Belief about the other relays' reported secrecy rates.
//
// kExponential: i.i.d. unit-rate exponential, density e^{-x} on [0, inf).
// kPointMass: the reports are known exactly. For mechanism computations the
// vector holds every relay's report indexed by id - 1; for SampleReports and
// Expect it is the joint draw itself.
class Prior {
 public:
  static Prior Exponential() { return Prior(PriorKind::kExponential, {}); }
  static Prior PointMass(std::vector<double> values);

  PriorKind kind() const { return kind_; }
  const std::vector<double>& point() const { return point_; }

  // Density of one report; only defined for kExponential.
  double Density(double x) const;

  bool operator==(const Prior&) const = default;

 private:
  Prior(PriorKind kind, std::vector<double> point)
      : kind_(kind), point_(std::move(point)) {}

  PriorKind kind_;
  std::vector<double> point_;
};

struct McConfig {
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  // Thread count. Results do not depend on it.
  int workers = 1;

  bool operator==(const McConfig&) const = default;
};

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
};

// Samples are generated in fixed blocks, each from its own generator seeded
// by (seed, stream_id, block). Blocks are grouped into fixed chunks that are
// reduced sequentially and merged in chunk order, so any worker count gives
// bit-identical sums.
inline constexpr std::uint64_t kBlockSamples = 4096;
inline constexpr std::uint64_t kBlocksPerChunk = 32;

// Number of effective samples: cfg.samples for kExponential, 1 for kPointMass.
std::uint64_t EffectiveSamples(const Prior& prior, const McConfig& cfg);
std::uint64_t NumBlocks(const Prior& prior, const McConfig& cfg);
std::uint64_t NumChunks(const Prior& prior, const McConfig& cfg);

// Writes block `block`'s draws row-major into `out` (resized to rows *
// n_others) and returns the row count.
std::size_t DrawBlock(const Prior& prior, int n_others, const McConfig& cfg,
                      std::uint64_t block, std::vector<double>& out);

// Runs fn(chunk) for chunk in [0, chunks) on up to `workers` threads.
void ParallelChunks(std::uint64_t chunks, int workers,
                    const std::function<void(std::uint64_t)>& fn);

struct SampleMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double at(std::size_t row, std::size_t col) const {
    return values[row * cols + col];
  }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(values).subspan(r * cols, cols);
  }
};

// samples x n_others matrix of draws. Deterministic in (seed, stream_id).
SampleMatrix SampleReports(const Prior& prior, int n_others,
                           const McConfig& cfg);

using JointFunctional = std::function<double(std::span<const double>)>;

// Sample mean and standard error of f over the prior's draws. Reusing a
// config reuses identical draws. Throws EstimationError if f returns a
// non-finite value.
Estimate Expect(const JointFunctional& f, const Prior& prior, int n_others,
                const McConfig& cfg);

}  // namespace relay_truth

#endif  // RELAY_TRUTH_PRIORS_H_
