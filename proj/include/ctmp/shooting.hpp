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

#ifndef CTMP_SHOOTING_HPP
#define CTMP_SHOOTING_HPP

#include <limits>
#include <string>
#include <vector>

#include "ctmp/arc.hpp"

namespace ctmp {

struct SwitchEvent {
  enum class Kind { kEntry, kExit };
  Kind kind = Kind::kEntry;
  int row = 0;

  bool operator==(const SwitchEvent&) const = default;
};

// Ordered sequence of active sets over [0, T]. Consecutive sets differ by
// exactly one row; the difference is the switch event between them.
class ArcStructure {
 public:
  ArcStructure() : arcs_{ActiveSet{}} {}
  // Throws Error(kDegenerate) if consecutive sets do not differ by one row.
  explicit ArcStructure(std::vector<ActiveSet> arcs);

  const std::vector<ActiveSet>& arcs() const { return arcs_; }
  const std::vector<SwitchEvent>& events() const { return events_; }
  int num_arcs() const { return static_cast<int>(arcs_.size()); }
  int num_events() const { return static_cast<int>(events_.size()); }

  // Compact key such as "{1}>{}", stable across runs.
  std::string key() const;
  // Human-readable form such as "y_min -> unconstrained".
  std::string label(const LtiOcProblem& problem) const;
  static ArcStructure from_key(const std::string& key);

  bool operator==(const ArcStructure& other) const { return arcs_ == other.arcs_; }
  bool operator<(const ArcStructure& other) const { return arcs_ < other.arcs_; }

 private:
  std::vector<ActiveSet> arcs_;
  std::vector<SwitchEvent> events_;
};

// How the junction condition of an event is written.
enum class JunctionForm {
  // g_i = 0 at t_s under the control law of the side where row i is inactive.
  kInactiveConstraint,
  // mu_i = 0 at t_s on the side where row i is active.
  kMultiplier,
};

struct ShootingOptions {
  double tolerance = 1e-10;
  int max_iterations = 50;
  double collapse_tolerance = 1e-9;
  double fd_relative_step = 1e-6;
  int max_halvings = 20;
  JunctionForm junction = JunctionForm::kInactiveConstraint;
};

// Empty members fall back to lambda0 = P x0 and equally spaced times.
struct ShootingGuess {
  Vector lambda0;
  std::vector<double> times;
};

struct SolvedTrajectory {
  ArcStructure structure;
  std::vector<double> t_switch;
  Vector x0;
  Vector lambda0;
  double horizon = 0.0;
  std::vector<ArcDynamics> arcs;
  std::vector<Vector> arc_start;  // augmented z at the start of each arc
  double cost = 0.0;
  int iterations = 0;
  double residual_norm = 0.0;

  double arc_begin(int arc) const;
  double arc_end(int arc) const;
  // Arc containing t; switching instants belong to the later arc.
  int arc_of(double t) const;
  Vector z_at(double t, int arc) const;
  Vector z_at(double t) const { return z_at(t, arc_of(t)); }
  PointState state_at(const LtiOcProblem& problem, double t, int arc) const;
  PointState state_at(const LtiOcProblem& problem, double t) const {
    return state_at(problem, t, arc_of(t));
  }
  // count >= 2 points uniformly spaced on [0, T]; propagates by repeated
  // multiplication with a per-arc step exponential.
  std::vector<PointState> sample_uniform(const LtiOcProblem& problem,
                                         int count) const;
};

// Residual of the boundary value problem for a fixed structure:
// [lambda(T) - P x(T); one junction value per event].
// unknowns = (lambda0, t_1..t_Ns). Throws Error(kDegenerate) unless the times
// are strictly increasing inside (0, T).
Vector shoot_residuals(const LtiOcProblem& problem,
                       const ArcStructure& structure, const Vector& unknowns,
                       const Vector& x0,
                       JunctionForm junction = JunctionForm::kInactiveConstraint);

// Newton shooting with a central-difference Jacobian and backtracking.
// Errors: kNoConvergence, kTimesCollapsed, TimeEscapedError, kSingularKkt.
SolvedTrajectory solve_fixed_structure(const LtiOcProblem& problem,
                                       const Vector& x0,
                                       const ArcStructure& structure,
                                       const ShootingGuess& guess = {},
                                       const ShootingOptions& options = {});

// lambda0 that zeroes the transversality residual for the given switching
// times (the residual is affine in lambda0 once the times are fixed). Times
// need not lie in (0, T).
Vector consistent_costate(const LtiOcProblem& problem,
                          const ArcStructure& structure, const Vector& x0,
                          const std::vector<double>& times);

// Junction values at fixed times with lambda0 from consistent_costate.
Vector junction_residuals(const LtiOcProblem& problem,
                          const ArcStructure& structure, const Vector& x0,
                          const std::vector<double>& times,
                          JunctionForm junction = JunctionForm::kInactiveConstraint);

struct ValidationOptions {
  int samples_per_arc = 200;
  double tolerance = 1e-7;
};

struct ValidationReport {
  double mu_min = std::numeric_limits<double>::infinity();
  int mu_min_row = -1;
  double mu_min_time = 0.0;
  double g_max = -std::numeric_limits<double>::infinity();
  int g_max_row = -1;
  double g_max_time = 0.0;
  double hamiltonian_jump_max = 0.0;
  double control_jump_max = 0.0;
  double hamiltonian_drift_max = 0.0;
  double complementarity_max = 0.0;
  double stationarity_max = 0.0;
  bool pass = false;
};

// Samples every arc at Chebyshev-Lobatto points and checks multiplier signs on
// active rows and constraint signs on inactive rows.
ValidationReport validate_solution(const LtiOcProblem& problem,
                                   const SolvedTrajectory& traj,
                                   const ValidationOptions& options = {});

}  // namespace ctmp

#endif  // CTMP_SHOOTING_HPP
