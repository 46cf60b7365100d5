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

#include "ctmp/geometry.hpp"

#include <cmath>

#include "ctmp/error.hpp"
#include "ctmp/qp.hpp"

namespace ctmp {

bool normalize(AffineInequality& h) {
  const double s = h.a.norm();
  if (s < 1e-14) return false;
  h.a /= s;
  h.b /= s;
  return true;
}

Polygon box_polygon(const ParameterBox& box) {
  if (box.dim() != 2) throw Error(ErrorCode::kUnsupported, "box is not 2D");
  return {{box.lo(0), box.lo(1)},
          {box.hi(0), box.lo(1)},
          {box.hi(0), box.hi(1)},
          {box.lo(0), box.hi(1)}};
}

Polygon clip(const Polygon& poly, const AffineInequality& h) {
  Polygon out;
  const int n = static_cast<int>(poly.size());
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d& p = poly[i];
    const Eigen::Vector2d& q = poly[(i + 1) % n];
    const double vp = h.a.dot(Vector(p)) + h.b;
    const double vq = h.a.dot(Vector(q)) + h.b;
    if (vp <= 0.0) out.push_back(p);
    if ((vp < 0.0 && vq > 0.0) || (vp > 0.0 && vq < 0.0)) {
      out.push_back(p + (vp / (vp - vq)) * (q - p));
    }
  }
  return out;
}

Polygon clip(Polygon poly, const std::vector<AffineInequality>& hs) {
  for (const auto& h : hs) {
    if (poly.empty()) break;
    poly = clip(poly, h);
  }
  return poly;
}

double area(const Polygon& poly) {
  double s = 0.0;
  const int n = static_cast<int>(poly.size());
  for (int i = 0; i < n; ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % n];
    s += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * s;
}

ChebyshevBall chebyshev_ball(const std::vector<AffineInequality>& hs,
                             const ParameterBox& box) {
  const int n = box.dim();
  const int rows = static_cast<int>(hs.size()) + 2 * n;
  // y = (c, r); maximize r.
  QpProblem qp;
  qp.H = Matrix::Identity(n + 1, n + 1);
  qp.Ain = Matrix::Zero(rows, n + 1);
  qp.bin = Vector::Zero(rows);
  int k = 0;
  for (const auto& h : hs) {
    qp.Ain.row(k).head(n) = h.a.transpose();
    qp.Ain(k, n) = h.a.norm();
    qp.bin(k++) = -h.b;
  }
  for (int j = 0; j < n; ++j) {
    qp.Ain(k, j) = 1.0;
    qp.Ain(k, n) = 1.0;
    qp.bin(k++) = box.hi(j);
    qp.Ain(k, j) = -1.0;
    qp.Ain(k, n) = 1.0;
    qp.bin(k++) = -box.lo(j);
  }
  const double scale = std::max(box.diameter(), 1e-12);
  Vector y(n + 1);
  y << 0.5 * (box.lo + box.hi), 0.0;
  for (int it = 0; it < 500; ++it) {
    // min -r + 1/(2 rho) |y' - y|^2 with rho = scale
    qp.H = Matrix::Identity(n + 1, n + 1) / scale;
    qp.f = -y / scale;
    qp.f(n) -= 1.0;
    const Vector next = solve_qp(qp).x;
    const double step = (next - y).norm();
    y = next;
    if (step <= 1e-13 * scale) break;
  }
  return {y.head(n), y(n)};
}

}  // namespace ctmp
