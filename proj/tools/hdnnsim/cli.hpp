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

#ifndef HDNNSIM_CLI_HPP
#define HDNNSIM_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace hdnnsim {

enum ExitCode : int {
  kExitOk = 0,
  kExitInvalidConfig = 1,
  kExitRuntime = 2,
  kExitSelftestFailed = 3,
};

/// Entry point behind the hdnnsim binary. args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hdnnsim

#endif  // HDNNSIM_CLI_HPP
