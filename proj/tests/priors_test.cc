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
#include <cmath>
#include <limits>
#include <vector>

#include "gtest/gtest.h"
#include "relay_truth/errors.h"

namespace relay_truth {
namespace {

McConfig Config(std::uint64_t samples, std::uint64_t seed = 1,
                int workers = 1) {
  McConfig cfg;
  cfg.samples = samples;
  cfg.seed = seed;
  cfg.workers = workers;
  return cfg;
}

TEST(PriorTest, ExponentialDensity) {
  const Prior p = Prior::Exponential();
  EXPECT_DOUBLE_EQ(p.Density(0.0), 1.0);
  EXPECT_DOUBLE_EQ(p.Density(2.0), std::exp(-2.0));
  EXPECT_EQ(p.Density(-1.0), 0.0);
  EXPECT_THROW(Prior::PointMass({1.0}).Density(1.0), ArgumentError);
  EXPECT_THROW(Prior::PointMass({-1.0}), ArgumentError);
}

TEST(SampleReportsTest, ShapeAndZeroColumns) {
  const SampleMatrix m = SampleReports(Prior::Exponential(), 3, Config(5000));
  EXPECT_EQ(m.rows, 5000u);
  EXPECT_EQ(m.cols, 3u);
  EXPECT_EQ(m.values.size(), 15000u);
  EXPECT_EQ(SampleReports(Prior::Exponential(), 0, Config(10)).rows, 0u);
  EXPECT_THROW(SampleReports(Prior::Exponential(), -1, Config(10)),
               ArgumentError);
}

TEST(SampleReportsTest, DrawsAreNonNegativeWithUnitMeanAndLogTwoMedian) {
  const SampleMatrix m = SampleReports(Prior::Exponential(), 1, Config(200000));
  std::vector<double> v = m.values;
  double sum = 0.0;
  for (double x : v) {
    ASSERT_GE(x, 0.0);
    sum += x;
  }
  const double mean = sum / v.size();
  // SE of the mean is 1/sqrt(n) ~ 0.0022.
  EXPECT_NEAR(mean, 1.0, 4 * 0.0023);
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  EXPECT_NEAR(v[v.size() / 2], std::log(2.0), 0.01);
}

TEST(SampleReportsTest, ReproducibleAndSeedSensitive) {
  const SampleMatrix a = SampleReports(Prior::Exponential(), 2, Config(9000, 4));
  const SampleMatrix b = SampleReports(Prior::Exponential(), 2, Config(9000, 4));
  const SampleMatrix c = SampleReports(Prior::Exponential(), 2, Config(9000, 5));
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, c.values);
}

TEST(SampleReportsTest, PointMassIsOneRow) {
  const SampleMatrix m =
      SampleReports(Prior::PointMass({0.5, 1.5}), 2, Config(1000));
  EXPECT_EQ(m.rows, 1u);
  EXPECT_EQ(m.values, (std::vector<double>{0.5, 1.5}));
  EXPECT_THROW(SampleReports(Prior::PointMass({0.5}), 2, Config(10)),
               ArgumentError);
}

TEST(ExpectTest, MeanOfMaxOfThreeIsHarmonicNumber) {
  const Estimate e = Expect(
      [](std::span<const double> x) {
        return *std::max_element(x.begin(), x.end());
      },
      Prior::Exponential(), 3, Config(400000));
  const double h3 = 1.0 + 0.5 + 1.0 / 3.0;
  EXPECT_NEAR(e.mean, h3, 3 * e.std_error);
  EXPECT_EQ(e.samples, 400000u);
}

TEST(ExpectTest, ConstantHasZeroStandardError) {
  const Estimate e = Expect([](std::span<const double>) { return 2.5; },
                            Prior::Exponential(), 2, Config(10000));
  EXPECT_DOUBLE_EQ(e.mean, 2.5);
  EXPECT_EQ(e.std_error, 0.0);
}

TEST(ExpectTest, StandardErrorShrinksAsRootN) {
  auto f = [](std::span<const double> x) { return x[0]; };
  const Estimate small = Expect(f, Prior::Exponential(), 1, Config(40000));
  const Estimate large = Expect(f, Prior::Exponential(), 1, Config(640000));
  EXPECT_NEAR(small.std_error / large.std_error, 4.0, 0.4);
}

TEST(ExpectTest, WorkerCountDoesNotChangeResult) {
  auto f = [](std::span<const double> x) { return x[0] * x[1] + x[2]; };
  // Spans several chunks with a ragged last block.
  const std::uint64_t samples = 3 * kBlockSamples * kBlocksPerChunk + 1234;
  const Estimate one = Expect(f, Prior::Exponential(), 3, Config(samples, 9, 1));
  const Estimate eight =
      Expect(f, Prior::Exponential(), 3, Config(samples, 9, 8));
  EXPECT_EQ(one.mean, eight.mean);
  EXPECT_EQ(one.std_error, eight.std_error);
  EXPECT_EQ(one.samples, eight.samples);
}

TEST(ExpectTest, NonFiniteValueAborts) {
  auto f = [](std::span<const double> x) {
    return x[0] > 3.0 ? std::numeric_limits<double>::quiet_NaN() : x[0];
  };
  EXPECT_THROW(Expect(f, Prior::Exponential(), 1, Config(100000)),
               EstimationError);
  EXPECT_THROW(Expect(f, Prior::Exponential(), 1, Config(100000, 1, 4)),
               EstimationError);
}

TEST(ExpectTest, PointMassEvaluatesOnce) {
  int calls = 0;
  const Estimate e = Expect(
      [&](std::span<const double> x) {
        ++calls;
        return x[0] + x[1];
      },
      Prior::PointMass({1.0, 2.0}), 2, Config(1000000));
  EXPECT_EQ(calls, 1);
  EXPECT_EQ(e.mean, 3.0);
  EXPECT_EQ(e.std_error, 0.0);
}

TEST(ExpectTest, RejectsZeroSamples) {
  EXPECT_THROW(Expect([](std::span<const double>) { return 0.0; },
                      Prior::Exponential(), 1, Config(0)),
               ArgumentError);
}

}  // namespace
}  // namespace relay_truth
