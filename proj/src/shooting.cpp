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

#include "ctmp/shooting.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ctmp/error.hpp"
#include "ctmp/matrix_exp.hpp"

namespace ctmp {

// ---------------------------------------------------------------------------
// ArcStructure

ArcStructure::ArcStructure(std::vector<ActiveSet> arcs) : arcs_(std::move(arcs)) {
  if (arcs_.empty()) {
    throw Error(ErrorCode::kDegenerate, "arc structure needs at least one arc");
  }
  for (size_t k = 0; k + 1 < arcs_.size(); ++k) {
    const auto& a = arcs_[k];
    const auto& b = arcs_[k + 1];
    if (b.size() == a.size() + 1) {
      for (int row : b.indices()) {
        if (!a.contains(row) && a.with(row) == b) {
          events_.push_back({SwitchEvent::Kind::kEntry, row});
          break;
        }
      }
    } else if (a.size() == b.size() + 1) {
      for (int row : a.indices()) {
        if (!b.contains(row) && b.with(row) == a) {
          events_.push_back({SwitchEvent::Kind::kExit, row});
          break;
        }
      }
    }
    if (events_.size() != k + 1) {
      throw Error(ErrorCode::kDegenerate,
                  "arcs " + a.to_string() + " and " + b.to_string() +
                      " do not differ by exactly one row");
    }
  }
}

std::string ArcStructure::key() const {
  std::string out;
  for (size_t k = 0; k < arcs_.size(); ++k) {
    if (k) out += '>';
    out += arcs_[k].to_string();
  }
  return out;
}

std::string ArcStructure::label(const LtiOcProblem& problem) const {
  std::string out;
  for (size_t k = 0; k < arcs_.size(); ++k) {
    if (k) out += " -> ";
    if (arcs_[k].empty()) {
      out += "unconstrained";
      continue;
    }
    for (size_t j = 0; j < arcs_[k].indices().size(); ++j) {
      if (j) out += '+';
      out += problem.row_name(arcs_[k].indices()[j]);
    }
  }
  if (arcs_.size() == 1) out += " (full horizon)";
  return out;
}

ArcStructure ArcStructure::from_key(const std::string& key) {
  std::vector<ActiveSet> arcs;
  std::istringstream is(key);
  std::string part;
  while (std::getline(is, part, '>')) {
    if (part.size() < 2 || part.front() != '{' || part.back() != '}') {
      throw Error(ErrorCode::kParse, "bad structure key '" + key + "'");
    }
    std::vector<int> rows;
    std::istringstream rs(part.substr(1, part.size() - 2));
    std::string tok;
    while (std::getline(rs, tok, ',')) {
      if (!tok.empty()) rows.push_back(std::stoi(tok));
    }
    arcs.emplace_back(std::move(rows));
  }
  return ArcStructure(std::move(arcs));
}

// ---------------------------------------------------------------------------
// SolvedTrajectory

double SolvedTrajectory::arc_begin(int arc) const {
  return arc == 0 ? 0.0 : t_switch[arc - 1];
}

double SolvedTrajectory::arc_end(int arc) const {
  return arc + 1 < static_cast<int>(arcs.size()) ? t_switch[arc] : horizon;
}

int SolvedTrajectory::arc_of(double t) const {
  int arc = 0;
  while (arc < static_cast<int>(t_switch.size()) && t >= t_switch[arc]) ++arc;
  return arc;
}

Vector SolvedTrajectory::z_at(double t, int arc) const {
  const double dt = t - arc_begin(arc);
  if (dt == 0.0) return arc_start[arc];
  return matrix_exponential(arcs[arc].generator, dt) * arc_start[arc];
}

PointState SolvedTrajectory::state_at(const LtiOcProblem& problem, double t,
                                      int arc) const {
  return point_state(problem, arcs[arc], t, z_at(t, arc));
}

std::vector<PointState> SolvedTrajectory::sample_uniform(
    const LtiOcProblem& problem, int count) const {
  count = std::max(count, 2);
  std::vector<PointState> out;
  out.reserve(count);
  const double step = horizon / (count - 1);
  int j = 0;
  for (int arc = 0; arc < static_cast<int>(arcs.size()); ++arc) {
    const bool last = arc + 1 == static_cast<int>(arcs.size());
    const double end = arc_end(arc);
    Matrix E;
    Vector z;
    bool first = true;
    for (; j < count; ++j) {
      const double t = j + 1 == count ? horizon : j * step;
      if (!last && t >= end) break;
      if (first) {
        z = z_at(t, arc);
        E = matrix_exponential(arcs[arc].generator, step);
        first = false;
      } else if (j + 1 == count) {
        z = z_at(t, arc);
      } else {
        z = E * z;
      }
      out.push_back(point_state(problem, arcs[arc], t, z));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shooting

namespace {

std::vector<ArcDynamics> assemble_all(const LtiOcProblem& problem,
                                      const ArcStructure& structure) {
  std::vector<ArcDynamics> arcs;
  arcs.reserve(structure.num_arcs());
  for (const auto& set : structure.arcs()) {
    arcs.push_back(assemble_arc_system(problem, set));
  }
  return arcs;
}

struct ForwardPass {
  std::vector<Vector> starts;
  Vector z_end;
};

// Times may be unordered or outside [0, T]; arcs with negative duration are
// propagated backwards.
ForwardPass propagate(const std::vector<ArcDynamics>& arcs, const Vector& z0,
                      const std::vector<double>& times, double horizon) {
  ForwardPass pass;
  pass.starts.reserve(arcs.size());
  pass.starts.push_back(z0);
  Vector z = z0;
  double t_prev = 0.0;
  for (size_t k = 0; k < arcs.size(); ++k) {
    const double t_next = k < times.size() ? times[k] : horizon;
    if (t_next != t_prev) z = matrix_exponential(arcs[k].generator, t_next - t_prev) * z;
    if (k < times.size()) pass.starts.push_back(z);
    t_prev = t_next;
  }
  pass.z_end = z;
  return pass;
}

double junction_value(const LtiOcProblem& problem, const ArcStructure& structure,
                      const std::vector<ArcDynamics>& arcs, int event,
                      const Vector& z, JunctionForm junction) {
  const int n = problem.n();
  const SwitchEvent& ev = structure.events()[event];
  const bool entry = ev.kind == SwitchEvent::Kind::kEntry;
  if (junction == JunctionForm::kInactiveConstraint) {
    const ArcDynamics& side = arcs[entry ? event : event + 1];
    return problem.constraint_value(ev.row, z.head(n), side.control(z));
  }
  const ArcDynamics& side = arcs[entry ? event + 1 : event];
  return side.mu_map.row(ev.row).dot(z);
}

Vector residual_from_pass(const LtiOcProblem& problem,
                          const ArcStructure& structure,
                          const std::vector<ArcDynamics>& arcs,
                          const ForwardPass& pass, JunctionForm junction) {
  const int n = problem.n();
  const int ns = structure.num_events();
  Vector r(n + ns);
  r.head(n) = pass.z_end.segment(n, n) - problem.P * pass.z_end.head(n);
  for (int s = 0; s < ns; ++s) {
    r(n + s) = junction_value(problem, structure, arcs, s, pass.starts[s + 1], junction);
  }
  return r;
}

Vector residual_unchecked(const LtiOcProblem& problem,
                          const ArcStructure& structure,
                          const std::vector<ArcDynamics>& arcs,
                          const Vector& unknowns, const Vector& x0,
                          JunctionForm junction) {
  const int n = problem.n();
  const std::vector<double> times(unknowns.data() + n,
                                  unknowns.data() + unknowns.size());
  const ForwardPass pass =
      propagate(arcs, augment(x0, unknowns.head(n)), times, problem.T);
  return residual_from_pass(problem, structure, arcs, pass, junction);
}

void check_times(const std::vector<double>& times, double horizon) {
  for (size_t s = 0; s < times.size(); ++s) {
    const bool inside = times[s] > 0.0 && times[s] < horizon;
    const bool ordered = s == 0 || times[s] > times[s - 1];
    if (!inside || !ordered || !std::isfinite(times[s])) {
      throw Error(ErrorCode::kDegenerate,
                  "switching times must increase strictly inside (0, T)");
    }
  }
}

double cost_of(const LtiOcProblem& problem, const SolvedTrajectory& traj) {
  using boost::math::quadrature::gauss_kronrod;
  const int n = problem.n();
  double total = 0.0;
  for (int arc = 0; arc < static_cast<int>(traj.arcs.size()); ++arc) {
    const double a = traj.arc_begin(arc), b = traj.arc_end(arc);
    if (b <= a) continue;
    const ArcDynamics& dyn = traj.arcs[arc];
    const Vector& z0 = traj.arc_start[arc];
    auto integrand = [&](double t) {
      const Vector z = t == a ? z0 : Vector(matrix_exponential(dyn.generator, t - a) * z0);
      return problem.running_cost(z.head(n), dyn.control(z));
    };
    // One panel usually suffices; the relative criterion alone never settles
    // on near-zero integrals, so accept on an absolute error first.
    double error = 0.0;
    double value = gauss_kronrod<double, 15>::integrate(integrand, a, b, 0, 0.0, &error);
    if (error > 1e-12 * std::max(1.0, std::abs(value))) {
      value = gauss_kronrod<double, 15>::integrate(integrand, a, b, 12, 1e-12, &error);
    }
    total += value;
  }
  const Vector xT = traj.z_at(traj.horizon).head(n);
  return total + 0.5 * xT.dot(problem.P * xT);
}

}  // namespace

Vector shoot_residuals(const LtiOcProblem& problem,
                       const ArcStructure& structure, const Vector& unknowns,
                       const Vector& x0, JunctionForm junction) {
  const int n = problem.n();
  if (unknowns.size() != n + structure.num_events() || x0.size() != n) {
    throw Error(ErrorCode::kInvalidProblem, "shoot_residuals: dimension mismatch");
  }
  const std::vector<double> times(unknowns.data() + n,
                                  unknowns.data() + unknowns.size());
  check_times(times, problem.T);
  const auto arcs = assemble_all(problem, structure);
  return residual_unchecked(problem, structure, arcs, unknowns, x0, junction);
}

Vector consistent_costate(const LtiOcProblem& problem,
                          const ArcStructure& structure, const Vector& x0,
                          const std::vector<double>& times) {
  const int n = problem.n();
  const auto arcs = assemble_all(problem, structure);
  auto terminal = [&](const Vector& lambda0) -> Vector {
    const ForwardPass pass = propagate(arcs, augment(x0, lambda0), times, problem.T);
    return pass.z_end.segment(n, n) - problem.P * pass.z_end.head(n);
  };
  // Affine in lambda0: r(l) = r(0) + J l, J assembled column by column.
  const Vector r0 = terminal(Vector::Zero(n));
  Matrix J(n, n);
  for (int j = 0; j < n; ++j) J.col(j) = terminal(Vector::Unit(n, j)) - r0;
  Vector lambda0 = J.fullPivLu().solve(-r0);
  // One refinement step against cancellation in the differences.
  lambda0 += J.fullPivLu().solve(-terminal(lambda0));
  return lambda0;
}

Vector junction_residuals(const LtiOcProblem& problem,
                          const ArcStructure& structure, const Vector& x0,
                          const std::vector<double>& times,
                          JunctionForm junction) {
  const auto arcs = assemble_all(problem, structure);
  const Vector lambda0 = consistent_costate(problem, structure, x0, times);
  const ForwardPass pass = propagate(arcs, augment(x0, lambda0), times, problem.T);
  return residual_from_pass(problem, structure, arcs, pass, junction)
      .tail(structure.num_events());
}

SolvedTrajectory solve_fixed_structure(const LtiOcProblem& problem,
                                       const Vector& x0,
                                       const ArcStructure& structure,
                                       const ShootingGuess& guess,
                                       const ShootingOptions& options) {
  const int n = problem.n();
  const int ns = structure.num_events();
  const double horizon = problem.T;
  const auto arcs = assemble_all(problem, structure);

  Vector xi(n + ns);
  xi.head(n) = guess.lambda0.size() == n ? guess.lambda0 : Vector(problem.P * x0);
  if (static_cast<int>(guess.times.size()) == ns) {
    for (int s = 0; s < ns; ++s) xi(n + s) = guess.times[s];
  } else {
    for (int s = 0; s < ns; ++s) xi(n + s) = horizon * (s + 1) / (ns + 1);
  }

  auto F = [&](const Vector& v) {
    return residual_unchecked(problem, structure, arcs, v, x0, options.junction);
  };
  auto escaped = [&](const Vector& v) {
    for (int s = 0; s < ns; ++s) {
      const double t = v(n + s);
      if (!std::isfinite(t) || t < -horizon * (1 + 1e-9) || t > 2.0 * horizon * (1 + 1e-9)) {
        return s;
      }
    }
    return -1;
  };

  Vector r = F(xi);
  int iter = 0;
  int slow = 0;  // consecutive iterations with little progress
  for (; iter < options.max_iterations; ++iter) {
    if (r.lpNorm<Eigen::Infinity>() <= options.tolerance) break;
    Matrix J(n + ns, n + ns);
    for (int j = 0; j < n + ns; ++j) {
      const double h = options.fd_relative_step * std::max(1.0, std::abs(xi(j)));
      Vector xp = xi, xm = xi;
      xp(j) += h;
      xm(j) -= h;
      J.col(j) = (F(xp) - F(xm)) / (2.0 * h);
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(J);
    if (qr.rank() < n + ns) {
      throw Error(ErrorCode::kNoConvergence, "singular shooting Jacobian");
    }
    const Vector dx = qr.solve(-r);
    const double r_norm = r.norm();
    // Keep times inside [-T, 2T]; a time pinned at that box and still pushed
    // outwards has escaped.
    double step = 1.0;
    for (int s = 0; s < ns; ++s) {
      const double t = xi(n + s), d = dx(n + s);
      const double room = d > 0 ? 2.0 * horizon - t : -horizon - t;
      if (d == 0.0 || std::abs(d) <= std::abs(room)) continue;
      if (std::abs(room) < 1e-12 * horizon) {
        throw TimeEscapedError(s, t, "switching time pinned outside the horizon");
      }
      step = std::min(step, room / d);
    }
    bool accepted = false;
    for (int h = 0; h <= options.max_halvings; ++h, step *= 0.5) {
      const Vector trial = xi + step * dx;
      Vector r_trial;
      try {
        r_trial = F(trial);
      } catch (const Error&) {
        continue;
      }
      if (r_trial.allFinite() && r_trial.norm() <= (1.0 - 1e-4 * step) * r_norm) {
        slow = r_trial.norm() > 0.9 * r_norm ? slow + 1 : 0;
        xi = trial;
        r = r_trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw Error(ErrorCode::kNoConvergence, "line search stalled at |r| = " +
                                                 std::to_string(r_norm));
    }
    if (slow >= 5) {
      throw Error(ErrorCode::kNoConvergence,
                  "stalled near a residual minimum |r| = " + std::to_string(r.norm()));
    }
    if (int s = escaped(xi); s >= 0) {
      throw TimeEscapedError(s, xi(n + s), "switching time left the horizon");
    }
  }
  if (!(r.lpNorm<Eigen::Infinity>() <= options.tolerance)) {
    throw Error(ErrorCode::kNoConvergence,
                "no convergence after " + std::to_string(iter) + " iterations");
  }

  std::vector<double> times(xi.data() + n, xi.data() + n + ns);
  for (int s = 0; s < ns; ++s) {
    if (times[s] <= 0.0 || times[s] >= horizon) {
      throw TimeEscapedError(s, times[s], "switching time outside (0, T)");
    }
  }
  for (int s = 0; s + 1 < ns; ++s) {
    if (times[s + 1] - times[s] < options.collapse_tolerance) {
      throw Error(ErrorCode::kTimesCollapsed,
                  "switching times " + std::to_string(s) + " and " +
                      std::to_string(s + 1) + " collapsed");
    }
  }

  SolvedTrajectory traj;
  traj.structure = structure;
  traj.t_switch = times;
  traj.x0 = x0;
  traj.lambda0 = xi.head(n);
  traj.horizon = horizon;
  traj.arcs = arcs;
  traj.arc_start = propagate(arcs, augment(x0, traj.lambda0), times, horizon).starts;
  traj.iterations = iter;
  traj.residual_norm = r.lpNorm<Eigen::Infinity>();
  traj.cost = cost_of(problem, traj);
  return traj;
}

// ---------------------------------------------------------------------------
// Validation

ValidationReport validate_solution(const LtiOcProblem& problem,
                                   const SolvedTrajectory& traj,
                                   const ValidationOptions& options) {
  ValidationReport rep;
  const int c = problem.c();
  const int points = std::max(options.samples_per_arc, 1) + 2;
  for (int arc = 0; arc < static_cast<int>(traj.arcs.size()); ++arc) {
    const ArcDynamics& dyn = traj.arcs[arc];
    const double a = traj.arc_begin(arc), b = traj.arc_end(arc);
    const double h_start = traj.state_at(problem, a, arc).H;
    for (int j = 0; j < points; ++j) {
      const double t =
          0.5 * (a + b) - 0.5 * (b - a) * std::cos(std::numbers::pi * j / (points - 1));
      const PointState s = traj.state_at(problem, t, arc);
      for (int row = 0; row < c; ++row) {
        if (dyn.active.contains(row)) {
          if (s.mu(row) < rep.mu_min) {
            rep.mu_min = s.mu(row);
            rep.mu_min_row = row;
            rep.mu_min_time = t;
          }
        } else if (s.g(row) > rep.g_max) {
          rep.g_max = s.g(row);
          rep.g_max_row = row;
          rep.g_max_time = t;
        }
        rep.complementarity_max =
            std::max(rep.complementarity_max, std::abs(s.mu(row) * s.g(row)));
      }
      const Vector grad_u = problem.R * s.u + problem.B.transpose() * s.lambda +
                            problem.Gu.transpose() * s.mu;
      rep.stationarity_max =
          std::max(rep.stationarity_max, grad_u.lpNorm<Eigen::Infinity>());
      rep.hamiltonian_drift_max =
          std::max(rep.hamiltonian_drift_max, std::abs(s.H - h_start));
    }
  }
  for (int s = 0; s < static_cast<int>(traj.t_switch.size()); ++s) {
    const double t = traj.t_switch[s];
    const PointState left = traj.state_at(problem, t, s);
    const PointState right = traj.state_at(problem, t, s + 1);
    rep.hamiltonian_jump_max = std::max(rep.hamiltonian_jump_max, std::abs(left.H - right.H));
    rep.control_jump_max = std::max(rep.control_jump_max,
                                    (left.u - right.u).lpNorm<Eigen::Infinity>());
  }
  rep.pass = rep.mu_min >= -options.tolerance && rep.g_max <= options.tolerance;
  return rep;
}

}  // namespace ctmp
