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

#ifndef RELAY_TRUTH_SIMD_RESPONSE_KERNEL_H_
#define RELAY_TRUTH_SIMD_RESPONSE_KERNEL_H_

#include <cstddef>
#include <string_view>

// Inner loop of every expected-payoff computation: given per-sample summaries
// of the other relays' draws, accumulate the selection indicator and the
// others' utility for one reported rate.
//
// All variants keep four interleaved accumulator lanes (sample s feeds lane
// s % 4) and reduce them as (l0 + l1) + (l2 + l3), so scalar and vector
// results are bit-identical.

namespace relay_truth::simd {

// Structure-of-arrays view over one block of per-sample summaries.
struct SummaryView {
  std::size_t size = 0;
  // K-th best other report; -inf when fewer than K others exist.
  const double* threshold = nullptr;
  // Column (position among the others, ascending id) of that relay.
  const double* threshold_col = nullptr;
  // Sum of the K - 1 best other reports.
  const double* top_km1 = nullptr;
  // Sum of the min(K, m) best other reports.
  const double* top_k = nullptr;
};

// Raw sums over a block. With sel the selection indicator of the querying
// relay, phi the others' selected total and ext = phi - top_k (zero when not
// selected):
struct ResponseSums {
  double sel = 0.0;
  double phi = 0.0;
  double phi2 = 0.0;
  double ext = 0.0;
  double ext2 = 0.0;
  double sel_phi = 0.0;

  ResponseSums& operator+=(const ResponseSums& o) {
    sel += o.sel;
    phi += o.phi;
    phi2 += o.phi2;
    ext += o.ext;
    ext2 += o.ext2;
    sel_phi += o.sel_phi;
    return *this;
  }
  bool operator==(const ResponseSums&) const = default;
};

// The querying relay is selected iff report > threshold, or report equals it
// and threshold_col >= tie_col (the other relay has the larger id).
using ResponseKernel = ResponseSums (*)(const SummaryView& view, double report,
                                        double tie_col);

ResponseSums AccumulateResponseScalar(const SummaryView& view, double report,
                                      double tie_col);
#if defined(RELAY_TRUTH_HAVE_AVX2)
ResponseSums AccumulateResponseAvx2(const SummaryView& view, double report,
                                    double tie_col);
#endif

enum class Isa { kScalar, kAvx2 };

std::string_view IsaName(Isa isa);
// True when the binary carries the variant and the CPU supports it.
bool IsaAvailable(Isa isa);
// Best available ISA, unless RELAY_TRUTH_SIMD=scalar is set.
Isa DetectIsa();
ResponseKernel KernelFor(Isa isa);

// Process-wide kernel choice, initialized from DetectIsa().
Isa ActiveIsa();
void SetActiveIsa(Isa isa);
ResponseKernel ActiveKernel();

}  // namespace relay_truth::simd

#endif  // RELAY_TRUTH_SIMD_RESPONSE_KERNEL_H_
