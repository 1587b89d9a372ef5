// include/robunits/exec.hpp
//
// Copyright 2026  The robunits Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <vector>

namespace robunits {

// Selects between the serial reference loop and the OpenMP kernel. Both
// produce bit-identical results; kSerial exists for testing and benchmarks.
enum class Exec { kSerial, kParallel };

// Calls fn(i) for i in [0, n). Each index must write only its own output
// slot. An exception from any index is rethrown after the loop; when several
// indices fail, the lowest index wins so the error is deterministic.
template <class F>
void parallel_for(std::size_t n, Exec exec, F&& fn) {
  const auto ni = static_cast<std::int64_t>(n);
  if (exec == Exec::kSerial) {
    for (std::int64_t i = 0; i < ni; ++i) fn(static_cast<std::size_t>(i));
    return;
  }
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < ni; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace robunits
