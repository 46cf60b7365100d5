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

#ifndef CTMP_GEOMETRY_HPP
#define CTMP_GEOMETRY_HPP

#include <vector>

#include "ctmp/problem.hpp"

namespace ctmp {

// a . x + b <= 0
struct AffineInequality {
  Vector a;
  double b = 0.0;
  double value(const Vector& x) const { return a.dot(x) + b; }
};

// Scales to unit |a|. Returns false if a is numerically zero.
bool normalize(AffineInequality& h);

using Polygon = std::vector<Eigen::Vector2d>;  // counter-clockwise

Polygon box_polygon(const ParameterBox& box);
// Sutherland-Hodgman step against one half-plane.
Polygon clip(const Polygon& poly, const AffineInequality& h);
Polygon clip(Polygon poly, const std::vector<AffineInequality>& hs);
double area(const Polygon& poly);

struct ChebyshevBall {
  Vector center;
  double radius = 0.0;  // negative when the set is empty
};

// Largest ball inside box and all half-spaces, by proximal-point iterations
// on the ball LP.
ChebyshevBall chebyshev_ball(const std::vector<AffineInequality>& hs,
                             const ParameterBox& box);

}  // namespace ctmp

#endif  // CTMP_GEOMETRY_HPP
