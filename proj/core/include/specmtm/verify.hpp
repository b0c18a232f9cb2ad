// Copyright 2026 The specmtm authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPECMTM_VERIFY_HPP
#define SPECMTM_VERIFY_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace specmtm::verify {

struct CheckResult {
  std::string name;
  double measured = 0.0;   // worst-case error observed
  double tolerance = 0.0;
  bool pass = false;
};

/// Full property suite: transform identities, Bernstein identities,
/// identity-at-init, adjoint pairing, gradient checks, mask contract.
/// Runs in double precision regardless of the configured compute precision.
std::vector<CheckResult> run_suite();

/// Prints one line per check; returns false if any check failed.
bool report(const std::vector<CheckResult>& results, std::ostream& out);

}  // namespace specmtm::verify

#endif  // SPECMTM_VERIFY_HPP
