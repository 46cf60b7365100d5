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

#include "ctmp/explorer.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <map>

#include "ctmp/error.hpp"
#include "ctmp/matrix_exp.hpp"

namespace ctmp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

// ---------------------------------------------------------------------------
// Boundary values

BoundaryValues boundary_values(const LtiOcProblem& problem,
                               const SolvedTrajectory& traj, int samples_per_arc) {
  const int c = problem.c();
  const int pts = std::max(samples_per_arc, 3);
  BoundaryValues bv;
  bv.g_bar = Vector::Constant(c, -kInf);
  bv.g_bar_time = Vector::Zero(c);
  bv.mu_bar = Vector::Constant(c, kInf);
  bv.mu_bar_time = Vector::Zero(c);
  const auto& events = traj.structure.events();
  const int arcs = static_cast<int>(traj.arcs.size());

  for (int k = 0; k < arcs; ++k) {
    const double a = traj.arc_begin(k), b = traj.arc_end(k);
    if (!(b > a)) continue;
    const ArcDynamics& dyn = traj.arcs[k];
    const int row_start = k > 0 ? events[k - 1].row : -1;
    const int row_end = k + 1 < arcs ? events[k].row : -1;
    const double dt = (b - a) / (pts - 1);
    const Matrix step = matrix_exponential(dyn.generator, dt);
    std::vector<double> ts(pts);
    std::vector<PointState> states;
    states.reserve(pts);
    Vector z = traj.arc_start[k];
    for (int j = 0; j < pts; ++j) {
      ts[j] = j + 1 == pts ? b : a + j * dt;
      if (j + 1 == pts) z = traj.z_at(b, k);
      else if (j > 0) z = step * z;
      states.push_back(point_state(problem, dyn, ts[j], z));
    }
    for (int row = 0; row < c; ++row) {
      const bool active = dyn.active.contains(row);
      // Quantity to maximise: g on inactive stretches, -mu on active ones.
      auto w_of = [&](const PointState& s) { return active ? -s.mu(row) : s.g(row); };
      auto w_at = [&](double t) {
        return w_of(point_state(problem, dyn, t, traj.z_at(t, k)));
      };
      double best = -kInf, best_t = a;
      auto offer = [&](double w, double t) {
        if (w > best) best = w, best_t = t;
      };
      if (row != row_start) offer(w_of(states.front()), a);
      if (row != row_end) offer(w_of(states.back()), b);
      for (int j = 1; j + 1 < pts; ++j) {
        const double w = w_of(states[j]);
        if (w >= w_of(states[j - 1]) && w >= w_of(states[j + 1])) {
          const auto [t_opt, neg] = boost::math::tools::brent_find_minima(
              [&](double t) { return -w_at(t); }, ts[j - 1], ts[j + 1], 40);
          offer(std::max(w, -neg), -neg > w ? t_opt : ts[j]);
        }
      }
      if (active) {
        if (-best < bv.mu_bar(row)) bv.mu_bar(row) = -best, bv.mu_bar_time(row) = best_t;
      } else if (best > bv.g_bar(row)) {
        bv.g_bar(row) = best;
        bv.g_bar_time(row) = best_t;
      }
    }
  }
  bv.margin = kInf;
  for (int row = 0; row < c; ++row) {
    if (std::isfinite(bv.g_bar(row))) bv.margin = std::min(bv.margin, -bv.g_bar(row));
    if (std::isfinite(bv.mu_bar(row))) bv.margin = std::min(bv.margin, bv.mu_bar(row));
  }
  double prev = 0.0;
  bv.time_margin = traj.horizon;
  for (double t : traj.t_switch) {
    bv.time_margin = std::min(bv.time_margin, t - prev);
    prev = t;
  }
  if (!traj.t_switch.empty()) {
    bv.time_margin = std::min(bv.time_margin, traj.horizon - prev);
  }
  return bv;
}

// ---------------------------------------------------------------------------
// Switching-time fits

std::vector<FittedPolynomial> fit_event_times(
    const std::vector<Vector>& points,
    const std::vector<std::vector<double>>& times, int degree) {
  std::vector<FittedPolynomial> fits;
  if (points.empty() || times.front().empty()) return fits;
  const size_t events = times.front().size();
  for (size_t s = 0; s < events; ++s) {
    std::vector<double> ys;
    ys.reserve(points.size());
    for (const auto& t : times) ys.push_back(t[s]);
    fits.push_back(fit_polynomial(points, ys, degree));
  }
  return fits;
}

namespace {

// A sample on the closure of the region can come back with the first or last
// arc collapsed. It is kept with that event pinned to 0 or T, provided the
// structure's junction condition holds there.
std::optional<std::vector<double>> collapsed_event_times(
    const LtiOcProblem& problem, const ArcStructure& structure,
    const StructureResult& r, const Vector& x0, double tol) {
  const auto& arcs = structure.arcs();
  if (arcs.size() < 2) return std::nullopt;
  std::vector<double> times;
  if (ArcStructure({arcs.begin(), arcs.end() - 1}) == r.structure) {
    times = r.trajectory.t_switch;
    times.push_back(problem.T);
  } else if (ArcStructure({arcs.begin() + 1, arcs.end()}) == r.structure) {
    times = {0.0};
    times.insert(times.end(), r.trajectory.t_switch.begin(), r.trajectory.t_switch.end());
  } else {
    return std::nullopt;
  }
  try {
    if (junction_residuals(problem, structure, x0, times).lpNorm<Eigen::Infinity>() <= tol)
      return times;
  } catch (const Error&) {
  }
  return std::nullopt;
}

}  // namespace

std::vector<FittedPolynomial> fit_switching_times(
    const LtiOcProblem& problem, const ArcStructure& structure,
    const std::vector<Vector>& samples, int degree,
    const StructureSearchOptions& options) {
  if (structure.num_events() == 0) return {};
  StructureSearchOptions opt = options;
  opt.hints.insert(opt.hints.begin(), {structure, {}});
  std::vector<Vector> kept;
  std::vector<std::vector<double>> times;
  for (const auto& x0 : samples) {
    try {
      const StructureResult r = detect_structure(problem, x0, opt);
      if (r.structure == structure) {
        kept.push_back(x0);
        times.push_back(r.trajectory.t_switch);
      } else if (auto t = collapsed_event_times(problem, structure, r, x0, opt.tolerance)) {
        kept.push_back(x0);
        times.push_back(*t);
      }
    } catch (const Error&) {
    }
  }
  const int needed = monomial_count(problem.n(), degree);
  if (static_cast<int>(kept.size()) < needed) {
    throw Error(ErrorCode::kTooFewSamples,
                std::to_string(kept.size()) + " retained samples for " +
                    std::to_string(needed) + " coefficients");
  }
  return fit_event_times(kept, times, degree);
}

// ---------------------------------------------------------------------------
// Grid classification

int GridClassification::index(const std::vector<int>& ijk) const {
  int idx = 0;
  for (size_t d = 0; d < shape.size(); ++d) idx = idx * shape[d] + ijk[d];
  return idx;
}

std::vector<int> GridClassification::coords(int index) const {
  std::vector<int> out(shape.size());
  for (int d = static_cast<int>(shape.size()) - 1; d >= 0; --d) {
    out[d] = index % shape[d];
    index /= shape[d];
  }
  return out;
}

std::vector<Vector> grid_points(const ParameterBox& box, const std::vector<int>& shape) {
  const int dim = box.dim();
  if (static_cast<int>(shape.size()) != dim) {
    throw Error(ErrorCode::kInvalidProblem, "grid shape does not match Theta");
  }
  int total = 1;
  for (int s : shape) {
    if (s < 2) throw Error(ErrorCode::kInvalidProblem, "grid needs >= 2 points per axis");
    total *= s;
  }
  std::vector<Vector> pts(total, Vector(dim));
  for (int idx = 0; idx < total; ++idx) {
    int rest = idx;
    for (int d = dim - 1; d >= 0; --d) {
      const int i = rest % shape[d];
      rest /= shape[d];
      pts[idx](d) = box.lo(d) + (box.hi(d) - box.lo(d)) * i / (shape[d] - 1);
    }
  }
  return pts;
}

namespace {

struct PointOutcome {
  std::string key;  // empty: not feasible
  int label = kFailedLabel;
  std::optional<ArcStructure> structure;
  std::vector<double> t_switch;
  Vector lambda0;
  int infeasible_row = -1;
};

PointOutcome classify_one(const LtiOcProblem& problem, const Vector& x0,
                          const StructureSearchOptions& options) {
  PointOutcome out;
  try {
    StructureResult r = detect_structure(problem, x0, options);
    out.key = r.structure.key();
    out.structure = r.structure;
    out.t_switch = r.trajectory.t_switch;
    out.lambda0 = r.trajectory.lambda0;
  } catch (const InfeasibleError& e) {
    out.label = kInfeasibleLabel;
    out.infeasible_row = e.row();
  } catch (const Error&) {
    out.label = kFailedLabel;
  }
  return out;
}

GridClassification assemble(std::vector<int> shape, std::vector<Vector> points,
                            std::vector<PointOutcome>& outcomes) {
  GridClassification g;
  g.shape = std::move(shape);
  g.points = std::move(points);
  const int total = g.size();
  g.label.resize(total);
  g.t_switch.resize(total);
  g.lambda0.resize(total);
  g.infeasible_row.resize(total);
  std::map<std::string, int> ids;
  for (int i = 0; i < total; ++i) {
    auto& o = outcomes[i];
    if (o.structure) {
      auto [it, fresh] = ids.try_emplace(o.key, static_cast<int>(g.structures.size()));
      if (fresh) g.structures.push_back(*o.structure);
      g.label[i] = it->second;
    } else {
      g.label[i] = o.label;
    }
    g.t_switch[i] = std::move(o.t_switch);
    g.lambda0[i] = std::move(o.lambda0);
    g.infeasible_row[i] = o.infeasible_row;
  }
  return g;
}

}  // namespace

GridClassification classify_grid(const LtiOcProblem& problem,
                                 const std::vector<int>& shape,
                                 const StructureSearchOptions& options) {
  auto points = grid_points(problem.theta_box, shape);
  const int total = static_cast<int>(points.size());
  std::vector<PointOutcome> outcomes(total);
#pragma omp parallel for schedule(dynamic, 4)
  for (int i = 0; i < total; ++i) outcomes[i] = classify_one(problem, points[i], options);
  return assemble(shape, std::move(points), outcomes);
}

GridClassification classify_grid_serial(const LtiOcProblem& problem,
                                        const std::vector<int>& shape,
                                        const StructureSearchOptions& options) {
  auto points = grid_points(problem.theta_box, shape);
  const int total = static_cast<int>(points.size());
  std::vector<PointOutcome> outcomes(total);
  for (int i = 0; i < total; ++i) outcomes[i] = classify_one(problem, points[i], options);
  return assemble(shape, std::move(points), outcomes);
}

// ---------------------------------------------------------------------------
// Boundaries

std::optional<ArcStructure> classify_point(const LtiOcProblem& problem,
                                           const Vector& x0,
                                           const StructureSearchOptions& options) {
  try {
    return detect_structure(problem, x0, options).structure;
  } catch (const InfeasibleError&) {
    return std::nullopt;
  }
}

namespace {

// Classifies points between two known classes, warm-starting each class's
// hint from the latest solution seen on that side.
class SideProbe {
 public:
  SideProbe(const LtiOcProblem& problem, const StructureSearchOptions& base,
            std::optional<ArcStructure> a, std::optional<ArcStructure> b)
      : problem_(problem), base_(base), a_(std::move(a)), b_(std::move(b)) {}

  void seed(bool side_a, ShootingGuess guess) { (side_a ? ga_ : gb_) = std::move(guess); }

  bool is_a(const Vector& x) {
    StructureSearchOptions opt = base_;
    if (a_) opt.hints.insert(opt.hints.begin(), {*a_, ga_});
    if (b_) opt.hints.insert(opt.hints.begin() + (a_ ? 1 : 0), {*b_, gb_});
    try {
      const StructureResult r = detect_structure(problem_, x, opt);
      const bool hit_a = a_ && r.structure == *a_;
      if (hit_a) ga_ = {r.trajectory.lambda0, r.trajectory.t_switch};
      else if (b_ && r.structure == *b_) gb_ = {r.trajectory.lambda0, r.trajectory.t_switch};
      return hit_a;
    } catch (const InfeasibleError&) {
      return !a_;
    }
  }

 private:
  const LtiOcProblem& problem_;
  const StructureSearchOptions& base_;
  std::optional<ArcStructure> a_, b_;
  ShootingGuess ga_, gb_;
};

}  // namespace

double refine_boundary_1d(const LtiOcProblem& problem,
                          const std::optional<ArcStructure>& a,
                          const std::optional<ArcStructure>& b, double x_lo,
                          double x_hi, double tol,
                          const StructureSearchOptions& options) {
  if (a == b) {
    throw Error(ErrorCode::kSameStructure, "bracket ends share a class");
  }
  SideProbe probe(problem, options, a, b);
  while (std::abs(x_hi - x_lo) > tol) {
    const double mid = 0.5 * (x_lo + x_hi);
    if (probe.is_a(Vector::Constant(1, mid))) x_lo = mid;
    else x_hi = mid;
  }
  return 0.5 * (x_lo + x_hi);
}

BoundaryFit fit_region_boundaries_2d(const LtiOcProblem& problem,
                                     const GridClassification& grid, int label_a,
                                     int label_b, double tol,
                                     const StructureSearchOptions& options) {
  if (grid.shape.size() != 2) {
    throw Error(ErrorCode::kUnsupported, "border fitting needs a 2D grid");
  }
  auto cls_of = [&](int label) -> std::optional<ArcStructure> {
    if (label >= 0) return grid.structures[label];
    return std::nullopt;
  };
  const auto ca = cls_of(label_a), cb = cls_of(label_b);
  // Bracketing pairs: grid neighbours, a first.
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < grid.size(); ++i) {
    if (grid.label[i] != label_a) continue;
    const auto ij = grid.coords(i);
    for (int d = 0; d < 2; ++d) {
      for (int step : {-1, 1}) {
        auto nb = ij;
        nb[d] += step;
        if (nb[d] < 0 || nb[d] >= grid.shape[d]) continue;
        const int j = grid.index(nb);
        if (grid.label[j] == label_b) pairs.emplace_back(i, j);
      }
    }
  }
  if (pairs.size() < 10) {
    throw Error(ErrorCode::kDegenerate,
                "only " + std::to_string(pairs.size()) + " bracketing pairs");
  }
  BoundaryFit fit;
  fit.points.resize(pairs.size());
  const int np = static_cast<int>(pairs.size());
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < np; ++k) {
    const auto [ia, ib] = pairs[k];
    Vector pa = grid.points[ia], pb = grid.points[ib];
    SideProbe probe(problem, options, ca, cb);
    if (ca) probe.seed(true, {grid.lambda0[ia], grid.t_switch[ia]});
    if (cb) probe.seed(false, {grid.lambda0[ib], grid.t_switch[ib]});
    while ((pb - pa).norm() > tol) {
      const Vector mid = 0.5 * (pa + pb);
      if (probe.is_a(mid)) pa = mid;
      else pb = mid;
    }
    fit.points[k] = 0.5 * (pa + pb);
  }
  // Total least squares line through the crossings.
  Vector centroid = Vector::Zero(2);
  for (const auto& p : fit.points) centroid += p;
  centroid /= np;
  Matrix D(np, 2);
  for (int k = 0; k < np; ++k) D.row(k) = (fit.points[k] - centroid).transpose();
  Eigen::JacobiSVD<Matrix> svd(D, Eigen::ComputeThinV);
  Vector normal = svd.matrixV().col(1);
  fit.max_residual = (D * normal).cwiseAbs().maxCoeff();
  normal /= normal.cwiseAbs().maxCoeff();
  fit.inequality = {normal, -normal.dot(centroid)};
  if (fit.inequality.value(grid.points[pairs.front().first]) > 0.0) {
    fit.inequality.a = -fit.inequality.a;
    fit.inequality.b = -fit.inequality.b;
  }
  if (fit.max_residual > 1e-3 * problem.theta_box.diameter()) {
    throw Error(ErrorCode::kNonAffineBoundary,
                "border residual " + std::to_string(fit.max_residual));
  }
  return fit;
}

// ---------------------------------------------------------------------------
// Regions

bool CriticalRegionCT::contains(const Vector& x, double tol) const {
  if (x.size() == 1 && inequalities.empty()) {
    return x(0) >= lo - tol && x(0) <= hi + tol;
  }
  if (!theta_box.contains(x, tol)) return false;
  for (const auto& ineq : inequalities) {
    if (ineq.value(x) > tol * ineq.a.norm()) return false;
  }
  return true;
}

namespace {

// Connected components of equal label; components of negative labels get
// component ids too. Returned ids follow the lexicographic first point.
std::vector<int> components(const GridClassification& grid, int& count) {
  std::vector<int> comp(grid.size(), -1);
  count = 0;
  std::vector<int> stack;
  for (int seed = 0; seed < grid.size(); ++seed) {
    if (comp[seed] >= 0) continue;
    comp[seed] = count;
    stack.push_back(seed);
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      const auto ij = grid.coords(i);
      for (size_t d = 0; d < ij.size(); ++d) {
        for (int step : {-1, 1}) {
          auto nb = ij;
          nb[d] += step;
          if (nb[d] < 0 || nb[d] >= grid.shape[d]) continue;
          const int j = grid.index(nb);
          if (comp[j] < 0 && grid.label[j] == grid.label[seed]) {
            comp[j] = count;
            stack.push_back(j);
          }
        }
      }
    }
    ++count;
  }
  return comp;
}

}  // namespace

Exploration explore_regions(const LtiOcProblem& problem, const ExploreOptions& options) {
  const int dim = problem.theta_box.dim();
  if (dim != 1 && dim != 2) {
    throw Error(ErrorCode::kUnsupported, "region exploration supports 1 or 2 parameters");
  }
  std::vector<int> shape = options.grid;
  if (shape.empty()) shape.assign(dim, dim == 1 ? 401 : 41);
  if (shape.size() == 1 && dim == 2) shape.push_back(shape.front());

  Exploration ex;
  ex.grid = options.parallel ? classify_grid(problem, shape, options.search)
                             : classify_grid_serial(problem, shape, options.search);
  const GridClassification& g = ex.grid;
  int ncomp = 0;
  const std::vector<int> comp = components(g, ncomp);

  // Region per feasible component, in seed order.
  std::vector<int> region_of_comp(ncomp, -1);
  for (int i = 0; i < g.size(); ++i) {
    if (g.label[i] < 0) {
      if (g.label[i] == kInfeasibleLabel) ex.infeasible_points.push_back(g.points[i]);
      continue;
    }
    int& r = region_of_comp[comp[i]];
    if (r < 0) {
      r = static_cast<int>(ex.regions.size());
      CriticalRegionCT region;
      region.structure = g.structures[g.label[i]];
      region.label = region.structure.label(problem);
      region.seed = g.points[i];
      region.theta_box = problem.theta_box;
      ex.regions.push_back(std::move(region));
    }
    ex.regions[r].sample_points.push_back(g.points[i]);
    ex.regions[r].sample_times.push_back(g.t_switch[i]);
  }

  auto class_of = [&](int i) -> std::optional<ArcStructure> {
    if (g.label[i] >= 0) return g.structures[g.label[i]];
    return std::nullopt;
  };

  if (dim == 1) {
    // Border between grid points i and i + 1.
    const int total = g.size();
    std::vector<double> border(total, 0.0);
    for (int i = 0; i + 1 < total; ++i) {
      if (g.label[i] == g.label[i + 1]) continue;
      if (g.label[i] == kFailedLabel || g.label[i + 1] == kFailedLabel) {
        border[i] = 0.5 * (g.points[i](0) + g.points[i + 1](0));
        continue;
      }
      border[i] = refine_boundary_1d(problem, class_of(i), class_of(i + 1), g.points[i](0),
                                     g.points[i + 1](0), options.boundary_tol,
                                     options.search);
    }
    const double lo = problem.theta_box.lo(0), hi = problem.theta_box.hi(0);
    int start = 0;
    for (int i = 0; i < total; ++i) {
      if (i + 1 < total && comp[i + 1] == comp[i]) continue;
      const double a = start == 0 ? lo : border[start - 1];
      const double b = i + 1 == total ? hi : border[i];
      if (g.label[i] >= 0) {
        auto& region = ex.regions[region_of_comp[comp[i]]];
        region.lo = a;
        region.hi = b;
        region.theta_box = {Vector::Constant(1, a), Vector::Constant(1, b)};
      } else if (g.label[i] == kInfeasibleLabel) {
        ex.infeasible_intervals.emplace_back(a, b);
      }
      start = i + 1;
    }
  } else {
    // Adjacent class pairs, each fitted once.
    std::map<std::pair<int, int>, bool> adjacent;
    for (int i = 0; i < g.size(); ++i) {
      if (g.label[i] < 0) continue;
      const auto ij = g.coords(i);
      for (int d = 0; d < 2; ++d) {
        auto nb = ij;
        if (++nb[d] >= g.shape[d]) continue;
        const int j = g.index(nb);
        if (g.label[j] != g.label[i] && g.label[j] != kFailedLabel) {
          adjacent[{std::min(comp[i], comp[j]), std::max(comp[i], comp[j])}] = true;
        }
      }
    }
    for (const auto& [key, unused] : adjacent) {
      const auto [ca, cb] = key;
      const int ra = region_of_comp[ca], rb = region_of_comp[cb];
      int ia = -1, ib = -1;
      for (int i = 0; i < g.size() && (ia < 0 || ib < 0); ++i) {
        if (comp[i] == ca && ia < 0) ia = i;
        if (comp[i] == cb && ib < 0) ib = i;
      }
      const int la = g.label[ia], lb = g.label[ib];
      if (la < 0 && lb < 0) continue;
      // Fit from the feasible side.
      const bool a_first = la >= 0;
      const int first = a_first ? ra : rb, second = a_first ? rb : ra;
      try {
        const BoundaryFit fit = fit_region_boundaries_2d(
            problem, g, a_first ? la : lb, a_first ? lb : la, options.boundary_tol,
            options.search);
        ex.regions[first].inequalities.push_back(fit.inequality);
        ex.regions[first].neighbours.push_back(second);
        if (second >= 0) {
          ex.regions[second].inequalities.push_back({-fit.inequality.a, -fit.inequality.b});
          ex.regions[second].neighbours.push_back(first);
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNonAffineBoundary && e.code() != ErrorCode::kDegenerate) {
          throw;
        }
        std::vector<Vector> cloud;
        for (int i = 0; i < g.size(); ++i) {
          if (comp[i] == ca || comp[i] == cb) cloud.push_back(g.points[i]);
        }
        ex.regions[first].point_clouds.push_back(cloud);
        if (second >= 0) ex.regions[second].point_clouds.push_back(std::move(cloud));
      }
    }
  }

  for (auto& region : ex.regions) {
    if (region.structure.num_events() == 0) continue;
    try {
      region.t_switch_fit =
          fit_event_times(region.sample_points, region.sample_times, options.fit_degree);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kTooFewSamples) throw;
    }
  }
  return ex;
}

}  // namespace ctmp
