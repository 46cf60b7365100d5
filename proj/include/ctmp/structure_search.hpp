// Copyright 2026 The ctmp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CTMP_STRUCTURE_SEARCH_HPP
#define CTMP_STRUCTURE_SEARCH_HPP

#include <string>
#include <vector>

#include "ctmp/shooting.hpp"

namespace ctmp {

// A structure worth trying before the activation loop, with an optional
// starting point for Newton (typically a neighbouring solution).
struct StructureHint {
  ArcStructure structure;
  ShootingGuess guess;
};

struct StructureSearchOptions {
  int max_rounds = 20;
  int scan_points = 400;
  double tolerance = 1e-7;
  int max_events = 8;
  ShootingOptions shooting;
  ValidationOptions validation;
  std::vector<StructureHint> hints;
  bool keep_log = false;
};

struct StructureResult {
  ArcStructure structure;
  SolvedTrajectory trajectory;
  ValidationReport report;
  int rounds = 0;
  std::vector<std::string> log;  // one line per round when keep_log is set
};

// Finds an arc structure whose solution passes validate_solution.
// Throws InfeasibleError when a violated row cannot be activated alongside
// the rows already active over the same window, and Error(kNoStructure) when
// the round cap or event cap is reached.
StructureResult detect_structure(const LtiOcProblem& problem, const Vector& x0,
                                 const StructureSearchOptions& options = {});

}  // namespace ctmp

#endif  // CTMP_STRUCTURE_SEARCH_HPP
