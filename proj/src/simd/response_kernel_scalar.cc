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

#include "relay_truth/simd/response_kernel.h"

namespace relay_truth::simd {

ResponseSums AccumulateResponseScalar(const SummaryView& view, double report,
                                      double tie_col) {
  double sel[4] = {0, 0, 0, 0};
  double phi[4] = {0, 0, 0, 0};
  double phi2[4] = {0, 0, 0, 0};
  double ext[4] = {0, 0, 0, 0};
  double ext2[4] = {0, 0, 0, 0};
  double sel_phi[4] = {0, 0, 0, 0};

  for (std::size_t s = 0; s < view.size; ++s) {
    const std::size_t lane = s & 3;
    const double thr = view.threshold[s];
    const bool selected =
        report > thr || (report == thr && view.threshold_col[s] >= tie_col);
    const double p = selected ? view.top_km1[s] : view.top_k[s];
    const double e = selected ? view.top_km1[s] - view.top_k[s] : 0.0;
    sel[lane] += selected ? 1.0 : 0.0;
    phi[lane] += p;
    phi2[lane] += p * p;
    ext[lane] += e;
    ext2[lane] += e * e;
    sel_phi[lane] += selected ? p : 0.0;
  }

  auto reduce = [](const double* l) { return (l[0] + l[1]) + (l[2] + l[3]); };
  ResponseSums out;
  out.sel = reduce(sel);
  out.phi = reduce(phi);
  out.phi2 = reduce(phi2);
  out.ext = reduce(ext);
  out.ext2 = reduce(ext2);
  out.sel_phi = reduce(sel_phi);
  return out;
}

}  // namespace relay_truth::simd
