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

#ifndef CTMP_ARC_HPP
#define CTMP_ARC_HPP

#include "ctmp/problem.hpp"

namespace ctmp {

// Condition number above which the KKT block of an active set is rejected.
inline constexpr double kKktConditionLimit = 1e12;

// Hamiltonian system of one arc, homogenized on z = (x, lambda, 1).
//
// Stationarity R u + B'lambda + Gu_A' mu_A = 0 together with the active rows
// Gx_A x + Gu_A u = b_A give u and mu_A as affine maps of z; substituting into
// xdot = A x + B u and lambdadot = -Q x - A'lambda - Gx_A' mu_A yields
// zdot = generator * z with a zero last row.
struct ArcDynamics {
  ActiveSet active;
  Matrix generator;  // (2n+1) x (2n+1)
  Matrix u_map;      // m x (2n+1)
  Matrix mu_map;     // c x (2n+1), zero rows for inactive constraints

  int state_dim() const { return static_cast<int>((generator.rows() - 1) / 2); }
  Vector control(const Vector& z) const { return u_map * z; }
  Vector multipliers(const Vector& z) const { return mu_map * z; }
};

// Throws Error(kSingularKkt) when [R, Gu_A'; Gu_A, 0] is rank deficient or has
// condition number above kKktConditionLimit.
ArcDynamics assemble_arc_system(const LtiOcProblem& problem,
                                const ActiveSet& active);

// Everything known about the solution at one instant.
struct PointState {
  double t = 0.0;
  Vector x, lambda, u, mu, g;
  double H = 0.0;
};

// z = (x, lambda, 1).
Vector augment(const Vector& x, const Vector& lambda);

double hamiltonian(const LtiOcProblem& problem, const Vector& x,
                   const Vector& lambda, const Vector& u, const Vector& mu);

// Fills u, mu, g and H from an augmented point z on the given arc.
PointState point_state(const LtiOcProblem& problem, const ArcDynamics& dyn,
                       double t, const Vector& z);

// z(t) = exp(generator (t - t_start)) (x, lambda, 1) with (x, lambda) given
// at t_start, packed as a 2n vector.
PointState evaluate_arc(const LtiOcProblem& problem, const ArcDynamics& dyn,
                        const Vector& xl_start, double t_start, double t);

}  // namespace ctmp

#endif  // CTMP_ARC_HPP
