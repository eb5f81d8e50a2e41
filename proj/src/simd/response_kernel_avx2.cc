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

#include <immintrin.h>

#include "relay_truth/simd/response_kernel.h"

namespace relay_truth::simd {
namespace {

struct Lanes {
  alignas(32) double v[4];
};

inline void Store(Lanes& lanes, __m256d x) { _mm256_store_pd(lanes.v, x); }

inline double Reduce(const Lanes& l) {
  return (l.v[0] + l.v[1]) + (l.v[2] + l.v[3]);
}

}  // namespace

ResponseSums AccumulateResponseAvx2(const SummaryView& view, double report,
                                    double tie_col) {
  const __m256d rep = _mm256_set1_pd(report);
  const __m256d tie = _mm256_set1_pd(tie_col);
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d acc_sel = _mm256_setzero_pd();
  __m256d acc_phi = _mm256_setzero_pd();
  __m256d acc_phi2 = _mm256_setzero_pd();
  __m256d acc_ext = _mm256_setzero_pd();
  __m256d acc_ext2 = _mm256_setzero_pd();
  __m256d acc_sel_phi = _mm256_setzero_pd();

  const std::size_t full = view.size & ~std::size_t{3};
  for (std::size_t s = 0; s < full; s += 4) {
    const __m256d thr = _mm256_loadu_pd(view.threshold + s);
    const __m256d col = _mm256_loadu_pd(view.threshold_col + s);
    const __m256d km1 = _mm256_loadu_pd(view.top_km1 + s);
    const __m256d k = _mm256_loadu_pd(view.top_k + s);

    const __m256d above = _mm256_cmp_pd(rep, thr, _CMP_GT_OQ);
    const __m256d equal = _mm256_cmp_pd(rep, thr, _CMP_EQ_OQ);
    const __m256d wins_tie = _mm256_cmp_pd(col, tie, _CMP_GE_OQ);
    const __m256d selected =
        _mm256_or_pd(above, _mm256_and_pd(equal, wins_tie));

    const __m256d p = _mm256_blendv_pd(k, km1, selected);
    const __m256d e = _mm256_and_pd(selected, _mm256_sub_pd(km1, k));

    acc_sel = _mm256_add_pd(acc_sel, _mm256_and_pd(selected, one));
    acc_phi = _mm256_add_pd(acc_phi, p);
    acc_phi2 = _mm256_add_pd(acc_phi2, _mm256_mul_pd(p, p));
    acc_ext = _mm256_add_pd(acc_ext, e);
    acc_ext2 = _mm256_add_pd(acc_ext2, _mm256_mul_pd(e, e));
    acc_sel_phi = _mm256_add_pd(acc_sel_phi, _mm256_and_pd(selected, p));
  }

  Lanes sel, phi, phi2, ext, ext2, sel_phi;
  Store(sel, acc_sel);
  Store(phi, acc_phi);
  Store(phi2, acc_phi2);
  Store(ext, acc_ext);
  Store(ext2, acc_ext2);
  Store(sel_phi, acc_sel_phi);

  // Tail samples continue in their own lanes, exactly as the scalar loop.
  for (std::size_t s = full; s < view.size; ++s) {
    const std::size_t lane = s & 3;
    const double thr = view.threshold[s];
    const bool chosen =
        report > thr || (report == thr && view.threshold_col[s] >= tie_col);
    const double p = chosen ? view.top_km1[s] : view.top_k[s];
    const double e = chosen ? view.top_km1[s] - view.top_k[s] : 0.0;
    sel.v[lane] += chosen ? 1.0 : 0.0;
    phi.v[lane] += p;
    phi2.v[lane] += p * p;
    ext.v[lane] += e;
    ext2.v[lane] += e * e;
    sel_phi.v[lane] += chosen ? p : 0.0;
  }

  ResponseSums out;
  out.sel = Reduce(sel);
  out.phi = Reduce(phi);
  out.phi2 = Reduce(phi2);
  out.ext = Reduce(ext);
  out.ext2 = Reduce(ext2);
  out.sel_phi = Reduce(sel_phi);
  return out;
}

}  // namespace relay_truth::simd
