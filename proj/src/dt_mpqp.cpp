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

#include "ctmp/dt_mpqp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>

#include "ctmp/error.hpp"
#include "ctmp/matrix_exp.hpp"

namespace ctmp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Matrix rows_of(const Matrix& M, const std::vector<int>& rows) {
  Matrix out(rows.size(), M.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(i) = M.row(rows[i]);
  return out;
}

Vector rows_of(const Vector& v, const std::vector<int>& rows) {
  Vector out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out(i) = v(rows[i]);
  return out;
}

bool full_row_rank(const Matrix& G) {
  if (G.rows() == 0) return true;
  if (G.rows() > G.cols()) return false;
  Eigen::JacobiSVD<Matrix> svd(G);
  const Vector& s = svd.singularValues();
  return s(s.size() - 1) > 1e-12 * s(0);
}

// Drops rows that do not touch the 2D polygon along an edge.
std::vector<AffineInequality> facets_2d(const std::vector<AffineInequality>& hs,
                                        const Polygon& poly, double tol) {
  std::vector<AffineInequality> out;
  for (const auto& h : hs) {
    int touching = 0;
    for (const auto& v : poly) {
      if (std::abs(h.value(Vector(v))) <= tol) ++touching;
    }
    if (touching >= 2) out.push_back(h);
  }
  return out;
}

}  // namespace

std::string DtProblem::row_label(int stacked_row) const {
  const int i = row_of(stacked_row);
  const std::string name =
      i < static_cast<int>(row_names.size()) && !row_names[i].empty()
          ? row_names[i]
          : "g" + std::to_string(i);
  return name + "@" + std::to_string(step_of(stacked_row));
}

QpProblem DtProblem::qp(const Vector& theta) const {
  QpProblem q;
  q.H = Hc;
  q.f = Fc.transpose() * theta;
  q.Ain = Gc;
  q.bin = wc + Sc * theta;
  return q;
}

double DtProblem::cost(const Vector& theta, const Vector& U) const {
  return 0.5 * U.dot(Hc * U) + theta.dot(Fc * U) + 0.5 * theta.dot(Yc * theta);
}

std::vector<Vector> DtProblem::states(const Vector& theta,
                                      const Vector& U) const {
  std::vector<Vector> xs;
  xs.reserve(N + 1);
  for (int k = 0; k <= N; ++k) xs.push_back(Phi[k] * theta + Gamma[k] * U);
  return xs;
}

DtProblem discretize_zoh(const LtiOcProblem& problem, int N) {
  problem.validate();
  if (N < 1) throw Error(ErrorCode::kInvalidProblem, "N must be at least 1");
  DtProblem dt;
  const int n = problem.n(), m = problem.m(), c = problem.c();
  dt.n = n;
  dt.m = m;
  dt.c = c;
  dt.N = N;
  dt.h = problem.T / N;
  dt.theta_box = problem.theta_box;
  dt.row_names = problem.row_names;

  Matrix aug = Matrix::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = problem.A;
  aug.topRightCorner(n, m) = problem.B;
  const Matrix E = matrix_exponential(aug, dt.h);
  dt.Ad = E.topLeftCorner(n, n);
  dt.Bd = E.topRightCorner(n, m);

  const int nu = N * m;
  dt.Phi.assign(N + 1, Matrix());
  dt.Gamma.assign(N + 1, Matrix());
  dt.Phi[0] = Matrix::Identity(n, n);
  dt.Gamma[0] = Matrix::Zero(n, nu);
  for (int k = 0; k < N; ++k) {
    dt.Phi[k + 1] = dt.Ad * dt.Phi[k];
    dt.Gamma[k + 1] = dt.Ad * dt.Gamma[k];
    dt.Gamma[k + 1].middleCols(k * m, m) += dt.Bd;
  }

  dt.Hc = Matrix::Zero(nu, nu);
  dt.Fc = Matrix::Zero(n, nu);
  dt.Yc = Matrix::Zero(n, n);
  for (int k = 0; k < N; ++k) {
    const Matrix QG = problem.Q * dt.Gamma[k];
    dt.Hc += dt.h * dt.Gamma[k].transpose() * QG;
    dt.Hc.block(k * m, k * m, m, m) += dt.h * problem.R;
    dt.Fc += dt.h * dt.Phi[k].transpose() * QG;
    dt.Yc += dt.h * dt.Phi[k].transpose() * problem.Q * dt.Phi[k];
  }
  const Matrix PG = problem.P * dt.Gamma[N];
  dt.Hc += dt.Gamma[N].transpose() * PG;
  dt.Fc += dt.Phi[N].transpose() * PG;
  dt.Yc += dt.Phi[N].transpose() * problem.P * dt.Phi[N];
  dt.Hc = 0.5 * (dt.Hc + dt.Hc.transpose()).eval();
  dt.Yc = 0.5 * (dt.Yc + dt.Yc.transpose()).eval();

  dt.Gc = Matrix::Zero(N * c, nu);
  dt.Sc = Matrix::Zero(N * c, n);
  dt.wc = Vector::Zero(N * c);
  for (int k = 0; k < N; ++k) {
    for (int i = 0; i < c; ++i) {
      const int r = k * c + i;
      dt.Gc.row(r) = problem.Gx.row(i) * dt.Gamma[k];
      dt.Gc.row(r).segment(k * m, m) += problem.Gu.row(i);
      dt.Sc.row(r) = -problem.Gx.row(i) * dt.Phi[k];
      dt.wc(r) = problem.b(i);
    }
  }
  return dt;
}

DtPointSolution solve_qp(const DtProblem& dt, const Vector& theta,
                         const QpOptions& options) {
  if (!theta.allFinite()) {
    throw Error(ErrorCode::kNonFinite, "parameter is not finite");
  }
  const QpProblem q = dt.qp(theta);
  const QpResult r = solve_qp(q, options);
  DtPointSolution s;
  s.U = r.x;
  s.active = ActiveSet(r.active);
  s.weak = ActiveSet(r.weak);
  s.lambda = r.lambda_in;
  s.cost = dt.cost(theta, r.x);
  s.kkt_residual = r.kkt_residual(q);
  return s;
}

bool DtCriticalRegion::contains(const Vector& theta, double tol) const {
  if (!theta_box.contains(theta, tol)) return false;
  for (const auto& h : inequalities) {
    if (h.value(theta) > tol) return false;
  }
  return true;
}

std::optional<DtCriticalRegion> build_region(const DtProblem& dt,
                                             const ActiveSet& active) {
  const std::vector<int>& A = active.indices();
  const Matrix GA = rows_of(dt.Gc, A);
  if (!full_row_rank(GA)) return std::nullopt;
  const int p = dt.n;

  Eigen::LLT<Matrix> H(dt.Hc);
  DtCriticalRegion reg;
  reg.active = active;
  reg.theta_box = dt.theta_box;
  if (A.empty()) {
    reg.Kl = Matrix::Zero(0, p);
    reg.kl = Vector::Zero(0);
    reg.Ku = -H.solve(dt.Fc.transpose());
    reg.ku = Vector::Zero(dt.Hc.rows());
  } else {
    const Matrix HiGt = H.solve(GA.transpose());
    const Matrix HiFt = H.solve(dt.Fc.transpose());
    const Matrix M = GA * HiGt;
    Eigen::LDLT<Matrix> Mf(M);
    reg.Kl = -Mf.solve(rows_of(dt.Sc, A) + GA * HiFt);
    reg.kl = -Mf.solve(rows_of(dt.wc, A));
    reg.Ku = -(HiFt + HiGt * reg.Kl);
    reg.ku = -HiGt * reg.kl;
  }
  for (int k = 0; k <= dt.N; ++k) {
    reg.Kx.push_back(dt.Phi[k] + dt.Gamma[k] * reg.Ku);
    reg.kx.push_back(dt.Gamma[k] * reg.ku);
  }

  std::vector<AffineInequality> hs;
  auto push = [&](AffineInequality h) {
    if (normalize(h)) {
      hs.push_back(std::move(h));
      return true;
    }
    return h.b <= 1e-10;  // 0 <= -b holds everywhere, or nowhere
  };
  for (int j = 0; j < active.size(); ++j) {
    if (!push({-reg.Kl.row(j).transpose(), -reg.kl(j)})) return std::nullopt;
  }
  for (int r = 0; r < dt.rows(); ++r) {
    if (active.contains(r)) continue;
    AffineInequality h{(dt.Gc.row(r) * reg.Ku - dt.Sc.row(r)).transpose(),
                       dt.Gc.row(r).dot(reg.ku) - dt.wc(r)};
    if (!push(std::move(h))) return std::nullopt;
  }

  const ParameterBox& box = dt.theta_box;
  if (p == 1) {
    double lo = box.lo(0), hi = box.hi(0);
    int ilo = -1, ihi = -1;
    for (int i = 0; i < static_cast<int>(hs.size()); ++i) {
      const double bound = -hs[i].b / hs[i].a(0);
      if (hs[i].a(0) > 0 && bound < hi) {
        hi = bound;
        ihi = i;
      } else if (hs[i].a(0) < 0 && bound > lo) {
        lo = bound;
        ilo = i;
      }
    }
    if (hi < lo) return std::nullopt;
    std::vector<AffineInequality> kept;
    if (ilo >= 0) kept.push_back(hs[ilo]);
    if (ihi >= 0) kept.push_back(hs[ihi]);
    reg.inequalities = std::move(kept);
    reg.lo = lo;
    reg.hi = hi;
    reg.chebyshev_radius = 0.5 * (hi - lo);
    reg.chebyshev_center = Vector::Constant(1, 0.5 * (lo + hi));
    return reg;
  }

  const ChebyshevBall ball = chebyshev_ball(hs, box);
  if (ball.radius <= 0.0) return std::nullopt;
  reg.chebyshev_radius = ball.radius;
  reg.chebyshev_center = ball.center;
  if (p == 2) {
    reg.polygon = clip(box_polygon(box), hs);
    reg.inequalities = facets_2d(hs, reg.polygon, 1e-9 * (1.0 + box.diameter()));
  } else {
    reg.inequalities = std::move(hs);
  }
  return reg;
}

PartitionStrategy parse_strategy(const std::string& name) {
  if (name == "sweep1d") return PartitionStrategy::kSweep1d;
  if (name == "grid_seeded") return PartitionStrategy::kGridSeeded;
  if (name == "combinatorial") return PartitionStrategy::kCombinatorial;
  throw Error(ErrorCode::kParse, "unknown strategy '" + name + "'");
}

std::string to_string(PartitionStrategy strategy) {
  switch (strategy) {
    case PartitionStrategy::kSweep1d:
      return "sweep1d";
    case PartitionStrategy::kGridSeeded:
      return "grid_seeded";
    case PartitionStrategy::kCombinatorial:
      return "combinatorial";
  }
  return "?";
}

int DtPartition::locate(const Vector& theta, double tol) const {
  for (int i = 0; i < size(); ++i) {
    if (regions[i].contains(theta, tol)) return i;
  }
  return -1;
}

std::pair<double, double> DtPartition::feasible_interval() const {
  if (regions.empty() || theta_box.dim() != 1) return {kNaN, kNaN};
  double lo = regions[0].lo, hi = regions[0].hi;
  for (const auto& r : regions) {
    lo = std::min(lo, r.lo);
    hi = std::max(hi, r.hi);
  }
  return {lo, hi};
}

namespace {

class PartitionBuilder {
 public:
  PartitionBuilder(const DtProblem& dt, const PartitionOptions& options)
      : dt_(dt), options_(options) {
    out_.N = dt.N;
    out_.theta_box = dt.theta_box;
  }

  std::optional<DtPointSolution> solve(const Vector& theta) {
    ++out_.qp_solves;
    try {
      return solve_qp(dt_, theta, options_.qp);
    } catch (const InfeasibleError&) {
      return std::nullopt;
    }
  }

  // Builds the region once per active set. Returns its index or -1.
  int offer(const ActiveSet& active) {
    if (!tried_.insert(active).second) return -1;
    auto reg = build_region(dt_, active);
    if (!reg || reg->chebyshev_radius <= options_.min_radius) return -1;
    out_.regions.push_back(std::move(*reg));
    return out_.size() - 1;
  }

  DtPartition& partition() { return out_; }

  void sweep1d();
  void grid_seeded();
  void combinatorial();
  void finish();

 private:
  void complete_facets(std::deque<int> queue);
  void dfs(std::vector<int>& active, int start);
  bool feasible_with(const std::vector<int>& active);

  const DtProblem& dt_;
  const PartitionOptions& options_;
  DtPartition out_;
  std::set<ActiveSet> tried_;
};

void PartitionBuilder::sweep1d() {
  if (dt_.n != 1) {
    throw Error(ErrorCode::kUnsupported, "sweep1d needs a scalar parameter");
  }
  const double lo = dt_.theta_box.lo(0), hi = dt_.theta_box.hi(0);
  const double tol = options_.sweep_tol;
  auto at = [](double t) { return Vector::Constant(1, t); };

  // First feasible parameter.
  double start = lo;
  if (!solve(at(lo))) {
    const int K = 2000;
    int first = -1;
    for (int i = 1; i <= K && first < 0; ++i) {
      if (solve(at(lo + (hi - lo) * i / K))) first = i;
    }
    if (first < 0) return;
    double a = lo + (hi - lo) * (first - 1) / K;
    double b = lo + (hi - lo) * first / K;
    while (b - a > tol) {
      const double mid = 0.5 * (a + b);
      (solve(at(mid)) ? b : a) = mid;
    }
    start = b;
  }

  double t = start;
  long guard = 0;
  while (t <= hi) {
    if (++guard > 1000000) {
      throw Error(ErrorCode::kNoConvergence, "sweep did not advance");
    }
    const auto s = solve(at(t));
    if (!s) break;  // the feasible set is an interval
    offer(s->active);
    double next = t + tol;
    for (const auto& r : out_.regions) {
      if (r.lo <= t + tol && r.hi >= t && r.hi + tol > next) next = r.hi + tol;
    }
    t = next;
  }
}

void PartitionBuilder::grid_seeded() {
  const int p = dt_.n;
  std::vector<int> shape = options_.grid;
  if (shape.empty()) {
    const int per_axis = p == 1 ? 2001 : (dt_.N <= 12 ? 801 : 1601);
    shape.assign(p, per_axis);
  }
  const std::vector<Vector> pts = grid_points(dt_.theta_box, shape);
  const int total = static_cast<int>(pts.size());
  const int chunk = 8192;
  for (int begin = 0; begin < total; begin += chunk) {
    const int end = std::min(total, begin + chunk);
    std::vector<std::optional<ActiveSet>> found(end - begin);
    long solves = 0;
#pragma omp parallel for schedule(dynamic, 64) reduction(+ : solves) \
    if (options_.parallel)
    for (int i = begin; i < end; ++i) {
      if (out_.locate(pts[i], 0.0) >= 0) continue;
      ++solves;
      try {
        found[i - begin] = solve_qp(dt_, pts[i], options_.qp).active;
      } catch (const InfeasibleError&) {
      }
    }
    out_.qp_solves += solves;
    for (const auto& a : found) {
      if (a) offer(*a);
    }
  }
  if (options_.complete_facets && p <= 2) {
    std::deque<int> all;
    for (int i = 0; i < out_.size(); ++i) all.push_back(i);
    complete_facets(std::move(all));
  }
}

// Probes just outside each region facet and adds any region found there.
void PartitionBuilder::complete_facets(std::deque<int> queue) {
  const ParameterBox& box = dt_.theta_box;
  const double delta = 1e-7 * std::max(box.diameter(), 1e-12);
  while (!queue.empty()) {
    const int idx = queue.front();
    queue.pop_front();
    std::vector<Vector> probes;
    const DtCriticalRegion& r = out_.regions[idx];
    if (dt_.n == 1) {
      probes.push_back(Vector::Constant(1, r.lo - delta));
      probes.push_back(Vector::Constant(1, r.hi + delta));
    } else {
      const int nv = static_cast<int>(r.polygon.size());
      for (int i = 0; i < nv; ++i) {
        const Eigen::Vector2d v = r.polygon[i], w = r.polygon[(i + 1) % nv];
        const Eigen::Vector2d e = w - v;
        if (e.norm() < 1e-12) continue;
        const Eigen::Vector2d out(e.y() / e.norm(), -e.x() / e.norm());
        for (double f : {0.5, 0.05, 0.95, 0.25, 0.75}) {
          probes.push_back(Vector(v + f * e + delta * out));
        }
      }
    }
    for (const Vector& q : probes) {
      if (!box.contains(q) || out_.locate(q, 0.0) >= 0) continue;
      const auto s = solve(q);
      if (!s) continue;
      const int added = offer(s->active);
      if (added >= 0) queue.push_back(added);
    }
  }
}

bool PartitionBuilder::feasible_with(const std::vector<int>& active) {
  // Some (U, theta) in Theta satisfies the active rows with equality and
  // the rest as inequalities.
  const int nu = static_cast<int>(dt_.Hc.rows()), p = dt_.n;
  const int rows = dt_.rows();
  QpProblem q;
  q.H = Matrix::Identity(nu + p, nu + p);
  q.f = Vector::Zero(nu + p);
  q.f.tail(p) = -0.5 * (dt_.theta_box.lo + dt_.theta_box.hi);
  Matrix G(rows, nu + p);
  G << dt_.Gc, -dt_.Sc;
  q.Aeq = rows_of(G, active);
  q.beq = rows_of(dt_.wc, active);
  std::vector<int> rest;
  for (int r = 0; r < rows; ++r) {
    if (!std::binary_search(active.begin(), active.end(), r)) rest.push_back(r);
  }
  q.Ain = Matrix::Zero(rest.size() + 2 * p, nu + p);
  q.bin = Vector::Zero(rest.size() + 2 * p);
  q.Ain.topRows(rest.size()) = rows_of(G, rest);
  q.bin.head(rest.size()) = rows_of(dt_.wc, rest);
  for (int j = 0; j < p; ++j) {
    const int k = static_cast<int>(rest.size()) + 2 * j;
    q.Ain(k, nu + j) = 1.0;
    q.bin(k) = dt_.theta_box.hi(j);
    q.Ain(k + 1, nu + j) = -1.0;
    q.bin(k + 1) = -dt_.theta_box.lo(j);
  }
  try {
    solve_qp(q, options_.qp);
    return true;
  } catch (const InfeasibleError&) {
    return false;
  }
}

void PartitionBuilder::dfs(std::vector<int>& active, int start) {
  for (int r = start; r < dt_.rows(); ++r) {
    if (++out_.candidates > options_.candidate_cap) {
      throw Error(ErrorCode::kBudget,
                  "combinatorial enumeration exceeded " +
                      std::to_string(options_.candidate_cap) + " candidates");
    }
    active.push_back(r);
    // Supersets of a rank-deficient or infeasible set are pruned with it.
    if (full_row_rank(rows_of(dt_.Gc, active)) && feasible_with(active)) {
      offer(ActiveSet(active));
      dfs(active, r + 1);
    }
    active.pop_back();
  }
}

void PartitionBuilder::combinatorial() {
  std::vector<int> active;
  ++out_.candidates;
  if (!feasible_with(active)) return;
  offer(ActiveSet());
  dfs(active, 0);
}

void PartitionBuilder::finish() {
  auto& regs = out_.regions;
  if (dt_.n == 1) {
    std::sort(regs.begin(), regs.end(),
              [](const auto& a, const auto& b) { return a.lo < b.lo; });
  } else {
    std::sort(regs.begin(), regs.end(),
              [](const auto& a, const auto& b) { return a.active < b.active; });
  }
}

}  // namespace

DtPartition enumerate_partition(const DtProblem& dt,
                                const PartitionOptions& options) {
  PartitionBuilder b(dt, options);
  switch (options.strategy) {
    case PartitionStrategy::kSweep1d:
      b.sweep1d();
      break;
    case PartitionStrategy::kGridSeeded:
      b.grid_seeded();
      break;
    case PartitionStrategy::kCombinatorial:
      b.combinatorial();
      break;
  }
  b.finish();
  return std::move(b.partition());
}

ComparisonReport compare_ct_dt(const LtiOcProblem& problem,
                               const Exploration& ct,
                               const std::vector<int>& N_list,
                               const std::vector<Vector>& samples,
                               const PartitionOptions& options,
                               const StructureSearchOptions& search) {
  ComparisonReport rep;
  rep.ct_regions = static_cast<int>(ct.regions.size());
  if (problem.theta_box.dim() == 1 && !ct.regions.empty()) {
    rep.ct_feasible = {ct.regions.front().lo, ct.regions.front().hi};
    for (const auto& r : ct.regions) {
      rep.ct_feasible.first = std::min(rep.ct_feasible.first, r.lo);
      rep.ct_feasible.second = std::max(rep.ct_feasible.second, r.hi);
    }
  }
  for (const Vector& th : samples) {
    CostSample s;
    s.theta = th;
    try {
      s.j_ct = detect_structure(problem, th, search).trajectory.cost;
    } catch (const InfeasibleError&) {
      s.j_ct = kNaN;
    }
    rep.samples.push_back(std::move(s));
  }
  for (int N : N_list) {
    const DtProblem dt = discretize_zoh(problem, N);
    const DtPartition part = enumerate_partition(dt, options);
    ComparisonRow row;
    row.N = N;
    row.regions = part.size();
    if (dt.n == 1) row.feasible = part.feasible_interval();
    rep.rows.push_back(row);
    for (auto& s : rep.samples) {
      try {
        s.j_dt.push_back(solve_qp(dt, s.theta, options.qp).cost);
      } catch (const InfeasibleError&) {
        s.j_dt.push_back(kNaN);
      }
    }
  }
  return rep;
}

}  // namespace ctmp
