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

#ifndef CTMP_EXPLORER_HPP
#define CTMP_EXPLORER_HPP

#include <optional>
#include <string>
#include <vector>

#include "ctmp/geometry.hpp"
#include "ctmp/polyfit.hpp"
#include "ctmp/structure_search.hpp"

namespace ctmp {

// Most restrictive values over the horizon. g_bar(i) is the largest g_i while
// row i is inactive, mu_bar(i) the smallest mu_i while it is active. The
// row's own junction instants (where g_i = mu_i = 0 by construction) are not
// candidates. Rows never inactive get -inf in g_bar; never active, +inf in
// mu_bar.
struct BoundaryValues {
  Vector g_bar, g_bar_time;
  Vector mu_bar, mu_bar_time;
  double margin = 0.0;       // min(-g_bar, mu_bar); > 0 strictly inside
  double time_margin = 0.0;  // smallest gap between events, 0 and T
};

BoundaryValues boundary_values(const LtiOcProblem& problem,
                               const SolvedTrajectory& traj,
                               int samples_per_arc = 400);

// Detects the structure at every sample, keeps those matching `structure`,
// and fits each switching time. Empty for structures without events.
std::vector<FittedPolynomial> fit_switching_times(
    const LtiOcProblem& problem, const ArcStructure& structure,
    const std::vector<Vector>& samples, int degree,
    const StructureSearchOptions& options = {});

// Same fit from already solved samples.
std::vector<FittedPolynomial> fit_event_times(
    const std::vector<Vector>& points,
    const std::vector<std::vector<double>>& times, int degree);

// ---------------------------------------------------------------------------
// Grid classification

inline constexpr int kInfeasibleLabel = -1;
inline constexpr int kFailedLabel = -2;

struct GridClassification {
  std::vector<int> shape;             // points per axis
  std::vector<Vector> points;         // row-major, last axis fastest
  std::vector<int> label;             // index into structures, or <0
  std::vector<ArcStructure> structures;  // in order of first appearance
  std::vector<std::vector<double>> t_switch;
  std::vector<Vector> lambda0;
  std::vector<int> infeasible_row;    // row reported by Infeasible, else -1

  int size() const { return static_cast<int>(points.size()); }
  int index(const std::vector<int>& ijk) const;
  std::vector<int> coords(int index) const;
};

std::vector<Vector> grid_points(const ParameterBox& box,
                                const std::vector<int>& shape);

// OpenMP kernel; every point is detected independently.
GridClassification classify_grid(const LtiOcProblem& problem,
                                 const std::vector<int>& shape,
                                 const StructureSearchOptions& options = {});
// Single-threaded reference with identical output.
GridClassification classify_grid_serial(const LtiOcProblem& problem,
                                        const std::vector<int>& shape,
                                        const StructureSearchOptions& options = {});

// ---------------------------------------------------------------------------
// Regions

struct BoundaryFit {
  AffineInequality inequality;  // <= 0 on the first structure's side
  std::vector<Vector> points;   // bisected crossing points
  double max_residual = 0.0;    // largest perpendicular distance
};

struct CriticalRegionCT {
  ArcStructure structure;
  std::string label;
  // 1D: closed interval [lo, hi]. 2D: Theta box plus the inequalities below.
  double lo = 0.0, hi = 0.0;
  ParameterBox theta_box;
  std::vector<AffineInequality> inequalities;
  std::vector<int> neighbours;                  // region index per inequality
  std::vector<std::vector<Vector>> point_clouds;  // borders that were not affine
  std::vector<FittedPolynomial> t_switch_fit;
  std::vector<Vector> sample_points;            // member grid points
  std::vector<std::vector<double>> sample_times;  // exact times at those points
  Vector seed;

  bool contains(const Vector& x, double tol = 1e-6) const;
};

struct ExploreOptions {
  std::vector<int> grid;  // empty: 401 in 1D, 41 per axis in 2D
  int fit_degree = 3;
  double boundary_tol = 1e-6;
  bool parallel = true;
  StructureSearchOptions search;
};

struct Exploration {
  std::vector<CriticalRegionCT> regions;
  GridClassification grid;
  // 1D only: infeasible intervals of Theta.
  std::vector<std::pair<double, double>> infeasible_intervals;
  std::vector<Vector> infeasible_points;
};

Exploration explore_regions(const LtiOcProblem& problem,
                            const ExploreOptions& options = {});

// Class of x0: the detected structure, or nullopt when infeasible.
std::optional<ArcStructure> classify_point(const LtiOcProblem& problem,
                                           const Vector& x0,
                                           const StructureSearchOptions& options = {});

// Bisection on the class of the scalar parameter. `a` and `b` are the
// classes expected at the bracket ends (nullopt = infeasible).
// Throws Error(kSameStructure) if both ends share a class.
double refine_boundary_1d(const LtiOcProblem& problem,
                          const std::optional<ArcStructure>& a,
                          const std::optional<ArcStructure>& b, double x_lo,
                          double x_hi, double tol = 1e-6,
                          const StructureSearchOptions& options = {});

// Border between grid classes `label_a` and `label_b` of a 2D grid.
// Throws Error(kDegenerate) with fewer than 10 bracketing pairs and
// Error(kNonAffineBoundary) when the line fit residual exceeds 1e-3 diam.
BoundaryFit fit_region_boundaries_2d(const LtiOcProblem& problem,
                                     const GridClassification& grid,
                                     int label_a, int label_b,
                                     double tol = 1e-6,
                                     const StructureSearchOptions& options = {});

}  // namespace ctmp

#endif  // CTMP_EXPLORER_HPP
