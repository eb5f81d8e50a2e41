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

#include "relay_truth/selection.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "relay_truth/channel_model.h"
#include "relay_truth/errors.h"

namespace relay_truth {
namespace {

const std::vector<double> kSampleRates{1.0132, 0.6091, 0.3885, 1.3210};

std::vector<RelayChannel> ChannelsFromDb(const std::vector<double>& d_db,
                                         const std::vector<double>& e_db) {
  std::vector<RelayChannel> out;
  for (std::size_t i = 0; i < d_db.size(); ++i) {
    out.push_back(RelayChannel::FromSnr(static_cast<int>(i) + 1,
                                        DbToLinear(d_db[i]),
                                        DbToLinear(e_db[i])));
  }
  return out;
}

TEST(ReportVectorTest, FromRatesAssignsSequentialIds) {
  const ReportVector r = ReportVector::FromRates(kSampleRates);
  ASSERT_EQ(r.size(), 4);
  EXPECT_EQ(r.at(3).id, 4);
  EXPECT_DOUBLE_EQ(r.RateOf(2), 0.6091);
}

TEST(ReportVectorTest, RejectsInvalidEntries) {
  EXPECT_THROW(ReportVector::FromRates({}), ArgumentError);
  EXPECT_THROW(ReportVector::FromRates({1.0, -0.5}), ArgumentError);
  EXPECT_THROW(
      ReportVector::FromRates({1.0, std::numeric_limits<double>::infinity()}),
      ArgumentError);
  EXPECT_THROW(ReportVector::FromEntries({{1, 1.0, {}}, {1, 2.0, {}}}),
               ArgumentError);
  EXPECT_THROW(ReportVector::FromEntries({{0, 1.0, {}}}), ArgumentError);
  const RelayChannel c = RelayChannel::FromSnr(1, 7.0, 1.0);
  EXPECT_THROW(ReportVector::FromEntries({{1, 1.5, c}}), ArgumentError);
  EXPECT_NO_THROW(ReportVector::FromEntries({{1, 2.0, c}}));
}

TEST(ReportVectorTest, WithReportDropsChannelAndWithoutRemoves) {
  const ReportVector r = ReportVector::FromChannels(
      {RelayChannel::FromSnr(1, 7.0, 1.0), RelayChannel::FromSnr(2, 3.0, 1.0)});
  EXPECT_TRUE(r.has_channels());
  const ReportVector lied = r.WithReport(1, 0.25);
  EXPECT_FALSE(lied.has_channels());
  EXPECT_DOUBLE_EQ(lied.RateOf(1), 0.25);
  const ReportVector rest = r.Without(1);
  EXPECT_EQ(rest.size(), 1);
  EXPECT_EQ(rest.at(0).id, 2);
  EXPECT_THROW(rest.Without(2), ArgumentError);
}

TEST(SelectTopKTest, SampleRatesPickFourThenOne) {
  const SelectionOutcome out =
      SelectTopK(ReportVector::FromRates(kSampleRates), 2);
  EXPECT_EQ(out.selected, (std::vector<int>{4, 1}));
  EXPECT_EQ(out.ranking, (std::vector<int>{4, 1, 2, 3}));
  EXPECT_NEAR(out.selected_total, 2.3342, 1e-12);
  EXPECT_TRUE(out.Contains(1));
  EXPECT_FALSE(out.Contains(2));
}

TEST(SelectTopKTest, TiesGoToLowerId) {
  const ReportVector r = ReportVector::FromRates({0.5, 0.9, 0.9, 0.9});
  EXPECT_EQ(SelectTopK(r, 1).selected, (std::vector<int>{2}));
  EXPECT_EQ(SelectTopK(r, 2).selected, (std::vector<int>{2, 3}));
}

TEST(SelectTopKTest, RejectsBadK) {
  const ReportVector r = ReportVector::FromRates(kSampleRates);
  EXPECT_THROW(SelectTopK(r, 0), ArgumentError);
  EXPECT_THROW(SelectTopK(r, 5), ArgumentError);
}

TEST(SelectTopKTest, InvariantUnderInputOrder) {
  std::mt19937_64 gen(3);
  std::exponential_distribution<double> exp1(1.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<ReportEntry> entries;
    for (int id = 1; id <= 6; ++id) entries.push_back({id, exp1(gen), {}});
    const SelectionOutcome a = SelectTopK(ReportVector::FromEntries(entries), 3);
    std::shuffle(entries.begin(), entries.end(), gen);
    const SelectionOutcome b = SelectTopK(ReportVector::FromEntries(entries), 3);
    EXPECT_EQ(a.selected, b.selected);
    EXPECT_EQ(a.ranking, b.ranking);
  }
}

TEST(SelectTopKTest, SelectedSetHasMaximalTotal) {
  std::mt19937_64 gen(5);
  std::exponential_distribution<double> exp1(1.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> rates(5);
    for (double& x : rates) x = exp1(gen);
    const SelectionOutcome out = SelectTopK(ReportVector::FromRates(rates), 2);
    for (int a = 0; a < 5; ++a) {
      for (int b = a + 1; b < 5; ++b) {
        EXPECT_GE(out.selected_total, rates[a] + rates[b] - 1e-15);
      }
    }
  }
}

TEST(SnrRatioTest, Conventions) {
  EXPECT_DOUBLE_EQ(SnrRatio(RelayChannel::FromSnr(1, 6.0, 2.0)), 3.0);
  EXPECT_EQ(SnrRatio(RelayChannel::FromSnr(1, 1.0, 0.0)),
            std::numeric_limits<double>::infinity());
  EXPECT_EQ(SnrRatio(RelayChannel::FromSnr(1, 0.0, 0.0)), 1.0);
}

class SnrSamplesTest : public ::testing::Test {
 protected:
  const DirectLink direct = DirectLink::FromSnr(DbToLinear(9.64),
                                                DbToLinear(5.47));
  const std::vector<double> low1_d{6.1734, 7.9489, 9.7429,
                                   7.1886, 6.3783, 7.3411};
  const std::vector<double> low1_e{3.7700, 0.9927, 5.6543,
                                   4.3645, 0.6273, 6.1954};
  const std::vector<double> low2_d{8.8149, 5.6809, 9.3701,
                                   8.5822, 3.3896, 10.000};
  const std::vector<double> high1_d{16.173, 17.948, 19.742,
                                    17.188, 16.378, 17.341};
  const std::vector<double> high1_e{13.770, 10.992, 15.654,
                                    14.364, 10.627, 16.1954};
  const std::vector<double> high2_e{15.227, 12.164, 14.522,
                                    13.278, 12.746, 13.648};

  int OptimalK(const std::vector<double>& d, const std::vector<double>& e) {
    return OptimalKSelection(direct,
                             ReportVector::FromChannels(ChannelsFromDb(d, e)))
        .k;
  }
};

TEST_F(SnrSamplesTest, OptimalRelayCounts) {
  EXPECT_EQ(OptimalK(low1_d, low1_e), 2);
  EXPECT_EQ(OptimalK(low2_d, low1_e), 3);
  EXPECT_EQ(OptimalK(high1_d, high1_e), 1);
  EXPECT_EQ(OptimalK(high1_d, high2_e), 1);
}

TEST_F(SnrSamplesTest, SweepPeaksAtOptimalK) {
  const ReportVector r = ReportVector::FromChannels(ChannelsFromDb(low1_d, low1_e));
  const std::vector<SecrecySweepPoint> sweep = SecrecyVsKSweep(direct, r);
  ASSERT_EQ(sweep.size(), 6u);
  const auto best = std::max_element(
      sweep.begin(), sweep.end(),
      [](const auto& a, const auto& b) { return a.secrecy_rate < b.secrecy_rate; });
  EXPECT_EQ(best->k, 2);
  for (const SecrecySweepPoint& p : sweep) {
    EXPECT_DOUBLE_EQ(p.secrecy_rate, std::max(0.0, std::log2(p.psi)));
  }
}

TEST(OptimalKTest, RequiresChannels) {
  EXPECT_THROW(OptimalKSelection(DirectLink::FromSnr(1.0, 1.0),
                                 ReportVector::FromRates({1.0, 2.0})),
               ArgumentError);
}

TEST(OptimalKTest, PsiIsMediantSequence) {
  const DirectLink direct = DirectLink::FromSnr(1.0, 1.0);
  const ReportVector r = ReportVector::FromChannels(
      {RelayChannel::FromSnr(1, 2.0, 1.0), RelayChannel::FromSnr(2, 9.0, 1.0),
       RelayChannel::FromSnr(3, 1.0, 4.0)});
  const OptimalKResult best = OptimalKSelection(direct, r);
  // Ratio order: relay 2 (9), relay 1 (2), relay 3 (0.25).
  ASSERT_GE(best.psi.size(), 1u);
  EXPECT_DOUBLE_EQ(best.psi[0], 11.0 / 3.0);
  EXPECT_EQ(best.k, 1);
  EXPECT_EQ(best.outcome.selected, (std::vector<int>{2}));
}

// The greedy count maximizes the system secrecy rate over all K.
TEST(OptimalKTest, GreedyMatchesSweepArgmaxOnRandomInstances) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> db(-5.0, 20.0);
  std::uniform_int_distribution<int> count(1, 8);
  for (int t = 0; t < 1000; ++t) {
    const int n = count(gen);
    std::vector<RelayChannel> relays;
    for (int id = 1; id <= n; ++id) {
      relays.push_back(RelayChannel::FromSnr(id, DbToLinear(db(gen)),
                                             DbToLinear(db(gen))));
    }
    const DirectLink direct = DirectLink::FromSnr(DbToLinear(db(gen)),
                                                  DbToLinear(db(gen)));
    const ReportVector r = ReportVector::FromChannels(relays);
    const OptimalKResult best = OptimalKSelection(direct, r);
    const std::vector<SecrecySweepPoint> sweep = SecrecyVsKSweep(direct, r);
    double max_psi = 0.0, max_rate = 0.0;
    for (const auto& p : sweep) {
      max_psi = std::max(max_psi, p.psi);
      max_rate = std::max(max_rate, p.secrecy_rate);
    }
    EXPECT_NEAR(best.psi.back(), max_psi, 1e-12) << "instance " << t;
    EXPECT_NEAR(sweep[best.k - 1].secrecy_rate, max_rate, 1e-12);
  }
}

}  // namespace
}  // namespace relay_truth
