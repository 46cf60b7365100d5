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

#ifndef CTMP_DT_MPQP_HPP
#define CTMP_DT_MPQP_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ctmp/explorer.hpp"
#include "ctmp/geometry.hpp"
#include "ctmp/problem.hpp"
#include "ctmp/qp.hpp"

namespace ctmp {

// Zero-order-hold discretization with N equal steps, condensed on
// U = (u_0, ..., u_{N-1}):
//
//   J = 1/2 U'HcU + theta'FcU + 1/2 theta'Yc theta,   Gc U <= wc + Sc theta.
//
// Running cost is summed by forward Euler, h * L(x_k, u_k), plus the terminal
// term. Constraints are imposed at nodes k = 0..N-1; stacked row k*c + i is
// row i of the continuous problem at node k.
struct DtProblem {
  int n = 0, m = 0, c = 0, N = 0;
  double h = 0.0;
  Matrix Ad, Bd;
  Matrix Hc, Fc, Yc;
  Matrix Gc, Sc;
  Vector wc;
  // x_k = Phi[k] theta + Gamma[k] U, k = 0..N.
  std::vector<Matrix> Phi, Gamma;
  ParameterBox theta_box;
  std::vector<std::string> row_names;

  int rows() const { return static_cast<int>(wc.size()); }
  int step_of(int stacked_row) const { return stacked_row / c; }
  int row_of(int stacked_row) const { return stacked_row % c; }
  std::string row_label(int stacked_row) const;  // "y_min@2"

  QpProblem qp(const Vector& theta) const;
  double cost(const Vector& theta, const Vector& U) const;
  std::vector<Vector> states(const Vector& theta, const Vector& U) const;
  Vector input(const Vector& U, int k) const { return U.segment(k * m, m); }
};

DtProblem discretize_zoh(const LtiOcProblem& problem, int N);

struct DtPointSolution {
  Vector U;
  ActiveSet active;  // strictly active stacked rows
  ActiveSet weak;    // in the final working set with zero multiplier
  Vector lambda;     // per stacked row
  double cost = 0.0;
  double kkt_residual = 0.0;
};

// Throws InfeasibleError with the stacked row that could not be enforced.
DtPointSolution solve_qp(const DtProblem& dt, const Vector& theta,
                         const QpOptions& options = {});

struct DtCriticalRegion {
  ActiveSet active;
  Matrix Ku;  // U = Ku theta + ku
  Vector ku;
  Matrix Kl;  // multipliers of the active rows
  Vector kl;
  std::vector<Matrix> Kx;  // x_k = Kx[k] theta + kx[k]
  std::vector<Vector> kx;
  // Normalized, redundant rows removed in 1D and 2D. The box is implied.
  std::vector<AffineInequality> inequalities;
  ParameterBox theta_box;
  double chebyshev_radius = 0.0;
  Vector chebyshev_center;
  double lo = 0.0, hi = 0.0;  // 1D
  Polygon polygon;            // 2D

  Vector control(const Vector& theta) const { return Ku * theta + ku; }
  bool contains(const Vector& theta, double tol = 1e-9) const;
};

// Region of a fixed active set. nullopt if the active rows violate LICQ or
// the region is empty in Theta.
std::optional<DtCriticalRegion> build_region(const DtProblem& dt,
                                             const ActiveSet& active);

enum class PartitionStrategy { kSweep1d, kGridSeeded, kCombinatorial };

PartitionStrategy parse_strategy(const std::string& name);
std::string to_string(PartitionStrategy strategy);

struct PartitionOptions {
  PartitionStrategy strategy = PartitionStrategy::kGridSeeded;
  // grid_seeded points per axis. Empty: 2001 in 1D; in 2D 801 for N <= 12,
  // else 1601.
  std::vector<int> grid;
  double sweep_tol = 1e-8;
  double min_radius = 1e-8;
  long candidate_cap = 50000;  // combinatorial
  bool complete_facets = true;   // grid_seeded, 1D and 2D
  bool parallel = true;
  QpOptions qp;
};

struct DtPartition {
  int N = 0;
  ParameterBox theta_box;
  std::vector<DtCriticalRegion> regions;
  long qp_solves = 0;
  long candidates = 0;  // combinatorial

  int size() const { return static_cast<int>(regions.size()); }
  // First listed region containing theta, or -1.
  int locate(const Vector& theta, double tol = 1e-9) const;
  // 1D: hull of the regions.
  std::pair<double, double> feasible_interval() const;
};

// Throws Error(kBudget) when combinatorial exceeds candidate_cap.
DtPartition enumerate_partition(const DtProblem& dt,
                                const PartitionOptions& options = {});

struct ComparisonRow {
  int N = 0;
  int regions = 0;
  std::pair<double, double> feasible{0.0, 0.0};  // 1D only
};

struct CostSample {
  Vector theta;
  double j_ct = 0.0;            // NaN where the CT problem is infeasible
  std::vector<double> j_dt;     // per N, NaN where infeasible
};

struct ComparisonReport {
  int ct_regions = 0;
  std::pair<double, double> ct_feasible{0.0, 0.0};  // 1D only
  std::vector<ComparisonRow> rows;
  std::vector<CostSample> samples;
};

ComparisonReport compare_ct_dt(const LtiOcProblem& problem,
                               const Exploration& ct,
                               const std::vector<int>& N_list,
                               const std::vector<Vector>& samples,
                               const PartitionOptions& options = {},
                               const StructureSearchOptions& search = {});

}  // namespace ctmp

#endif  // CTMP_DT_MPQP_HPP
