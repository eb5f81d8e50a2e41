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

#include "relay_truth/priors.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "relay_truth/errors.h"

namespace relay_truth {
namespace {

std::mt19937_64 BlockGenerator(const McConfig& cfg, std::uint64_t block) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(cfg.seed),      hi(cfg.seed), lo(cfg.stream_id),
                    hi(cfg.stream_id), lo(block),    hi(block)};
  return std::mt19937_64(seq);
}

// Inverse-CDF draw from 53 random bits; u in [0, 1).
double UnitExponential(std::mt19937_64& gen) {
  const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
  return -std::log1p(-u);
}

// Welford accumulator with Chan's pairwise merge.
struct Moments {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void Add(double x) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }

  void Merge(const Moments& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double total = static_cast<double>(n + o.n);
    const double delta = o.mean - mean;
    mean += delta * static_cast<double>(o.n) / total;
    m2 += o.m2 + delta * delta * static_cast<double>(n) *
                     static_cast<double>(o.n) / total;
    n += o.n;
  }
};

}  // namespace

Prior Prior::PointMass(std::vector<double> values) {
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ArgumentError("point-mass prior values must be finite and >= 0");
    }
  }
  return Prior(PriorKind::kPointMass, std::move(values));
}

double Prior::Density(double x) const {
  if (kind_ != PriorKind::kExponential) {
    throw ArgumentError("a point-mass prior has no density");
  }
  return x < 0.0 ? 0.0 : std::exp(-x);
}

std::uint64_t EffectiveSamples(const Prior& prior, const McConfig& cfg) {
  if (cfg.samples < 1) throw ArgumentError("samples must be >= 1");
  return prior.kind() == PriorKind::kPointMass ? 1 : cfg.samples;
}

std::uint64_t NumBlocks(const Prior& prior, const McConfig& cfg) {
  return (EffectiveSamples(prior, cfg) + kBlockSamples - 1) / kBlockSamples;
}

std::uint64_t NumChunks(const Prior& prior, const McConfig& cfg) {
  return (NumBlocks(prior, cfg) + kBlocksPerChunk - 1) / kBlocksPerChunk;
}

std::size_t DrawBlock(const Prior& prior, int n_others, const McConfig& cfg,
                      std::uint64_t block, std::vector<double>& out) {
  if (n_others < 0) throw ArgumentError("n_others must be >= 0");
  const std::uint64_t total = EffectiveSamples(prior, cfg);
  const std::uint64_t first = block * kBlockSamples;
  if (first >= total) throw ArgumentError("block index out of range");
  const auto rows =
      static_cast<std::size_t>(std::min(kBlockSamples, total - first));
  const auto cols = static_cast<std::size_t>(n_others);
  out.resize(rows * cols);

  if (prior.kind() == PriorKind::kPointMass) {
    if (prior.point().size() != cols) {
      throw ArgumentError("point-mass prior has " +
                          std::to_string(prior.point().size()) +
                          " values but " + std::to_string(cols) +
                          " were requested");
    }
    std::copy(prior.point().begin(), prior.point().end(), out.begin());
    return rows;
  }

  std::mt19937_64 gen = BlockGenerator(cfg, block);
  for (double& x : out) x = UnitExponential(gen);
  return rows;
}

void ParallelChunks(std::uint64_t chunks, int workers,
                    const std::function<void(std::uint64_t)>& fn) {
  const auto threads = static_cast<std::uint64_t>(std::max(1, workers));
  if (threads == 1 || chunks <= 1) {
    for (std::uint64_t c = 0; c < chunks; ++c) fn(c);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> pool;
  const std::uint64_t spawn = std::min(threads, chunks);
  pool.reserve(spawn);
  for (std::uint64_t t = 0; t < spawn; ++t) {
    pool.emplace_back([&] {
      for (std::uint64_t c = next++; c < chunks; c = next++) {
        try {
          fn(c);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mu);
          if (!failure) failure = std::current_exception();
          next = chunks;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

SampleMatrix SampleReports(const Prior& prior, int n_others,
                           const McConfig& cfg) {
  if (n_others < 0) throw ArgumentError("n_others must be >= 0");
  SampleMatrix m;
  if (n_others == 0) return m;
  m.cols = static_cast<std::size_t>(n_others);
  m.rows = static_cast<std::size_t>(EffectiveSamples(prior, cfg));
  m.values.resize(m.rows * m.cols);
  std::vector<double> block;
  const std::uint64_t blocks = NumBlocks(prior, cfg);
  for (std::uint64_t b = 0; b < blocks; ++b) {
    const std::size_t rows = DrawBlock(prior, n_others, cfg, b, block);
    std::copy(block.begin(), block.begin() + rows * m.cols,
              m.values.begin() + b * kBlockSamples * m.cols);
  }
  return m;
}

Estimate Expect(const JointFunctional& f, const Prior& prior, int n_others,
                const McConfig& cfg) {
  const std::uint64_t chunks = NumChunks(prior, cfg);
  const std::uint64_t blocks = NumBlocks(prior, cfg);
  std::vector<Moments> partial(chunks);

  ParallelChunks(chunks, cfg.workers, [&](std::uint64_t chunk) {
    std::vector<double> draws;
    Moments acc;
    const std::uint64_t end = std::min(blocks, (chunk + 1) * kBlocksPerChunk);
    const auto cols = static_cast<std::size_t>(n_others);
    for (std::uint64_t b = chunk * kBlocksPerChunk; b < end; ++b) {
      const std::size_t rows = DrawBlock(prior, n_others, cfg, b, draws);
      for (std::size_t r = 0; r < rows; ++r) {
        const std::span<const double> joint(draws.data() + r * cols, cols);
        const double value = f(joint);
        if (!std::isfinite(value)) {
          std::ostringstream msg;
          msg << "functional returned " << value << " at sample "
              << b * kBlockSamples + r << " (seed " << cfg.seed << ", stream "
              << cfg.stream_id << ")";
          throw EstimationError(msg.str());
        }
        acc.Add(value);
      }
    }
    partial[chunk] = acc;
  });

  Moments total;
  for (const Moments& m : partial) total.Merge(m);
  Estimate est;
  est.samples = total.n;
  est.mean = total.mean;
  est.std_error =
      total.n > 1 ? std::sqrt(total.m2 / static_cast<double>(total.n - 1) /
                              static_cast<double>(total.n))
                  : 0.0;
  return est;
}

}  // namespace relay_truth
