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

#ifndef CTMP_IO_HPP
#define CTMP_IO_HPP

#include <string>
#include <vector>

#include "ctmp/dt_mpqp.hpp"
#include "ctmp/explorer.hpp"
#include "ctmp/problem.hpp"

namespace ctmp {

// Problem files are line-oriented "key = value" text; '#' starts a comment.
// Matrices are written row-major in brackets with ';' between rows:
//
//   A = [0, -1; -1, 0]
//   B = [1; 0]
//   T = 2
//   theta_lo = [-2, -2]
//   theta_hi = [2, 2]
//   names = y1 y2
//
// Required keys: A, B, Q, R, P, Gx, Gu, b, T, theta_lo, theta_hi.
// Parse failures throw Error(kParse) naming the line.
LtiOcProblem parse_problem(const std::string& text);
LtiOcProblem load_problem(const std::string& path);
// Values printed with 17 significant digits.
std::string format_problem(const LtiOcProblem& problem);

std::string read_file(const std::string& path);
// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& contents);

// "CR01", "CR02", ...
std::string region_name(int index);

// ---------------------------------------------------------------------------
// Continuous-time results

std::string regions_json(const LtiOcProblem& problem,
                         const Exploration& exploration);
// Regions exactly as exported; throws Error(kParse) on malformed input.
std::vector<CriticalRegionCT> parse_regions_json(const std::string& text);

std::string regions_csv(const LtiOcProblem& problem,
                        const std::vector<CriticalRegionCT>& regions);
std::string fits_csv(const std::vector<CriticalRegionCT>& regions);
// Columns t, x*, u*, lambda*, mu_*, g_*, H.
std::string trajectory_csv(const LtiOcProblem& problem,
                           const SolvedTrajectory& traj, double dt);
std::string region_map_svg(const LtiOcProblem& problem,
                           const Exploration& exploration);

// ---------------------------------------------------------------------------
// Discrete-time results

// One row per region: bounds or inequalities, active rows, Ku/ku rows, kx rows.
std::string dt_regions_csv(const DtProblem& dt, const DtPartition& partition);
std::string dt_region_map_svg(const DtProblem& dt, const DtPartition& partition);
std::string comparison_csv(const ComparisonReport& report);
std::string cost_samples_csv(const ComparisonReport& report,
                             const std::vector<int>& N_list);
// Continuous trajectory on a fine grid next to the held discrete inputs.
std::string overlay_csv(const LtiOcProblem& problem,
                        const SolvedTrajectory& traj, const DtProblem& dt,
                        const DtPointSolution& sol, const Vector& theta);
std::string overlay_svg(const LtiOcProblem& problem,
                        const SolvedTrajectory& traj, const DtProblem& dt,
                        const DtPointSolution& sol, const Vector& theta);

}  // namespace ctmp

#endif  // CTMP_IO_HPP
