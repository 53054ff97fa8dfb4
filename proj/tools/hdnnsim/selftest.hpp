// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef HDNNSIM_SELFTEST_HPP
#define HDNNSIM_SELFTEST_HPP

#include <string>
#include <vector>

namespace hdnnsim {

struct InvariantResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

/// Fast invariant suite: decomposition round-trip, gradient check, water-fill
/// KKT and ADNN equivalence. `inject_failure` names one invariant whose
/// tolerance is replaced by a negative value so that it must fail; it exists
/// to test the failure path.
std::vector<InvariantResult> run_selftest(unsigned long long seed, const std::string& inject_failure = {});

/// Names accepted by run_selftest's `inject_failure`.
std::vector<std::string> selftest_invariants();

}  // namespace hdnnsim

#endif  // HDNNSIM_SELFTEST_HPP
