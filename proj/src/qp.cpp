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

#include "ctmp/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ctmp/error.hpp"

namespace ctmp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Factorization state: L^{-1} N = Q [R; 0], J = L^{-T} Q, with N the working
// set normals.
class Workspace {
 public:
  Workspace(const Matrix& L, int n) : n_(n), R_(Matrix::Zero(n, n)) {
    J_ = L.triangularView<Eigen::Lower>()
             .solve(Matrix::Identity(n, n))
             .transpose();
  }

  int size() const { return q_; }

  // z: primal direction in the null space of the working set, r: dual
  // direction for the working multipliers.
  void directions(const Vector& np, Vector& d, Vector& z, Vector& r) const {
    d = J_.transpose() * np;
    z = J_.rightCols(n_ - q_) * d.tail(n_ - q_);
    r = R_.topLeftCorner(q_, q_).triangularView<Eigen::Upper>().solve(
        d.head(q_));
  }

  bool add(Vector d) {
    for (int j = n_ - 1; j > q_; --j) {
      const double h = std::hypot(d(j - 1), d(j));
      if (h == 0.0) continue;
      const double c = d(j - 1) / h, s = d(j) / h;
      d(j - 1) = h;
      d(j) = 0.0;
      rotate_columns(j - 1, c, s);
    }
    if (q_ < n_ && std::abs(d(q_)) <= 1e-13 * r_norm_) return false;
    R_.col(q_).head(q_ + 1) = d.head(q_ + 1);
    r_norm_ = std::max(r_norm_, std::abs(d(q_)));
    ++q_;
    return true;
  }

  void remove(int pos) {
    for (int j = pos; j < q_ - 1; ++j) R_.col(j) = R_.col(j + 1);
    R_.col(q_ - 1).setZero();
    --q_;
    for (int j = pos; j < q_; ++j) {
      const double h = std::hypot(R_(j, j), R_(j + 1, j));
      if (h == 0.0) continue;
      const double c = R_(j, j) / h, s = R_(j + 1, j) / h;
      for (int k = j; k < q_; ++k) {
        const double a = R_(j, k), b = R_(j + 1, k);
        R_(j, k) = c * a + s * b;
        R_(j + 1, k) = -s * a + c * b;
      }
      R_(j + 1, j) = 0.0;
      rotate_columns(j, c, s);
    }
  }

 private:
  void rotate_columns(int j, double c, double s) {
    for (int k = 0; k < n_; ++k) {
      const double a = J_(k, j), b = J_(k, j + 1);
      J_(k, j) = c * a + s * b;
      J_(k, j + 1) = -s * a + c * b;
    }
  }

  int n_;
  int q_ = 0;
  double r_norm_ = 1.0;
  Matrix J_;
  Matrix R_;
};

}  // namespace

double QpResult::kkt_residual(const QpProblem& qp) const {
  Vector grad = qp.H * x + qp.f;
  if (qp.Aeq.rows() > 0) grad += qp.Aeq.transpose() * lambda_eq;
  if (qp.Ain.rows() > 0) grad += qp.Ain.transpose() * lambda_in;
  double res = grad.lpNorm<Eigen::Infinity>();
  if (qp.Aeq.rows() > 0)
    res = std::max(res, (qp.Aeq * x - qp.beq).lpNorm<Eigen::Infinity>());
  if (qp.Ain.rows() > 0) {
    const Vector g = qp.Ain * x - qp.bin;
    for (int i = 0; i < g.size(); ++i) {
      res = std::max({res, g(i), -lambda_in(i), std::abs(lambda_in(i) * g(i))});
    }
  }
  return res;
}

QpResult solve_qp(const QpProblem& qp, const QpOptions& options) {
  const int n = static_cast<int>(qp.H.rows());
  const int me = static_cast<int>(qp.Aeq.rows());
  const int mi = static_cast<int>(qp.Ain.rows());
  if (qp.H.cols() != n || qp.f.size() != n || (me > 0 && qp.Aeq.cols() != n) ||
      (mi > 0 && qp.Ain.cols() != n) || qp.beq.size() != me ||
      qp.bin.size() != mi) {
    throw Error(ErrorCode::kInvalidProblem, "QP dimensions do not agree");
  }
  Eigen::LLT<Matrix> llt(qp.H);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularKkt, "QP Hessian is not positive definite");
  }
  const Matrix L = llt.matrixL();
  Workspace ws(L, n);

  QpResult res;
  res.x = -llt.solve(qp.f);
  Vector& x = res.x;

  // Working set entries: inequality rows as i >= 0, equality rows as -(i+1).
  std::vector<int> work;
  Vector u = Vector::Zero(n + 1);
  auto normal = [&](int k) -> Vector {
    return k < 0 ? Vector(-qp.Aeq.row(-k - 1).transpose())
                 : Vector(-qp.Ain.row(k).transpose());
  };
  auto slack = [&](int k) {
    return k < 0 ? qp.beq(-k - 1) - qp.Aeq.row(-k - 1).dot(x)
                 : qp.bin(k) - qp.Ain.row(k).dot(x);
  };

  Vector d, z, r;
  for (int i = 0; i < me; ++i) {
    const int k = -(i + 1);
    const Vector np = normal(k);
    ws.directions(np, d, z, r);
    const double zn = z.dot(np);
    const double s = slack(k);
    if (zn <= 1e-14 * np.squaredNorm()) {
      if (std::abs(s) > options.feas_tol * std::max(1.0, std::abs(qp.beq(i)))) {
        throw InfeasibleError(-1, "equality row " + std::to_string(i) +
                                      " is inconsistent");
      }
      continue;  // redundant
    }
    const double t = -s / zn;
    x += t * z;
    const int q = ws.size();
    u.head(q) -= t * r;
    u(q) = t;
    ws.add(d);
    work.push_back(k);
  }

  std::vector<char> in_work(mi, 0);
  const int max_iter = options.max_iter > 0 ? options.max_iter : 10 * (n + mi + me) + 10;
  int iter = 0;
  while (true) {
    int p = -1;
    double worst = 0.0;
    for (int i = 0; i < mi; ++i) {
      if (in_work[i]) continue;
      const double s = slack(i);
      if (s >= -options.feas_tol * std::max(1.0, std::abs(qp.bin(i)))) continue;
      const double scaled = s / std::max(qp.Ain.row(i).norm(), 1e-300);
      if (scaled < worst) {
        worst = scaled;
        p = i;
      }
    }
    if (p < 0) break;

    const Vector np = normal(p);
    double u_plus = 0.0;
    while (true) {
      if (++iter > max_iter) {
        throw Error(ErrorCode::kNoConvergence,
                    "QP active-set iteration limit reached");
      }
      ws.directions(np, d, z, r);
      const int q = ws.size();
      double t1 = kInf;
      int drop = -1;
      for (int j = 0; j < q; ++j) {
        if (work[j] < 0 || r(j) <= 0.0) continue;
        const double ratio = u(j) / r(j);
        if (ratio < t1) {
          t1 = ratio;
          drop = j;
        }
      }
      const double zn = z.dot(np);
      const double t2 =
          zn > 1e-14 * np.squaredNorm() ? -slack(p) / zn : kInf;
      const double t = std::min(t1, t2);
      if (t == kInf) {
        throw InfeasibleError(p, "constraint row " + std::to_string(p) +
                                     " cannot be satisfied");
      }
      if (t2 == kInf) {
        u.head(q) -= t * r;
        u_plus += t;
        in_work[work[drop]] = 0;
        ws.remove(drop);
        for (int j = drop; j < q - 1; ++j) u(j) = u(j + 1);
        work.erase(work.begin() + drop);
        continue;
      }
      x += t * z;
      u.head(q) -= t * r;
      u_plus += t;
      if (t2 <= t1) {
        if (ws.add(d)) {
          u(q) = u_plus;
          work.push_back(p);
          in_work[p] = 1;
        }
        break;
      }
      in_work[work[drop]] = 0;
      ws.remove(drop);
      for (int j = drop; j < q - 1; ++j) u(j) = u(j + 1);
      work.erase(work.begin() + drop);
    }
  }

  res.iterations = iter;
  res.lambda_eq = Vector::Zero(me);
  res.lambda_in = Vector::Zero(mi);
  for (std::size_t j = 0; j < work.size(); ++j) {
    const int k = work[j];
    if (k < 0) {
      res.lambda_eq(-k - 1) = u(j);
    } else {
      res.lambda_in(k) = std::max(u(j), 0.0);
    }
  }
  for (int i = 0; i < mi; ++i) {
    if (!in_work[i]) continue;
    (res.lambda_in(i) > options.active_tol ? res.active : res.weak).push_back(i);
  }
  std::sort(res.active.begin(), res.active.end());
  std::sort(res.weak.begin(), res.weak.end());
  res.objective = 0.5 * x.dot(qp.H * x) + qp.f.dot(x);
  return res;
}

}  // namespace ctmp
