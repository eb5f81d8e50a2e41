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

#include <atomic>
#include <cstdlib>
#include <string>

#include "relay_truth/errors.h"
#include "relay_truth/simd/response_kernel.h"

namespace relay_truth::simd {
namespace {

bool CpuHasAvx2() {
#if defined(RELAY_TRUTH_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

std::atomic<Isa>& ActiveSlot() {
  static std::atomic<Isa> slot{DetectIsa()};
  return slot;
}

}  // namespace

std::string_view IsaName(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

bool IsaAvailable(Isa isa) {
  return isa == Isa::kScalar || (isa == Isa::kAvx2 && CpuHasAvx2());
}

Isa DetectIsa() {
  if (const char* forced = std::getenv("RELAY_TRUTH_SIMD")) {
    if (std::string(forced) == "scalar") return Isa::kScalar;
  }
  return IsaAvailable(Isa::kAvx2) ? Isa::kAvx2 : Isa::kScalar;
}

ResponseKernel KernelFor(Isa isa) {
  if (!IsaAvailable(isa)) {
    throw ArgumentError("kernel variant '" + std::string(IsaName(isa)) +
                        "' is not available on this machine");
  }
#if defined(RELAY_TRUTH_HAVE_AVX2)
  if (isa == Isa::kAvx2) return &AccumulateResponseAvx2;
#endif
  return &AccumulateResponseScalar;
}

Isa ActiveIsa() { return ActiveSlot().load(); }

void SetActiveIsa(Isa isa) {
  KernelFor(isa);
  ActiveSlot().store(isa);
}

ResponseKernel ActiveKernel() { return KernelFor(ActiveIsa()); }

}  // namespace relay_truth::simd
