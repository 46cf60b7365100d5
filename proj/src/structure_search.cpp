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

#include "ctmp/structure_search.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "ctmp/error.hpp"

namespace ctmp {
namespace {

// Activation window of one row; t0 == 0 or t1 == T make the arc initial or
// terminal.
struct Window {
  int row;
  double t0;
  double t1;
};

struct Plan {
  ArcStructure structure;
  std::vector<double> times;
  std::vector<std::pair<int, bool>> edges;  // event -> (window, is entry)
};

void normalize(std::vector<Window>& windows, double horizon) {
  for (auto& w : windows) {
    w.t0 = std::max(w.t0, 0.0);
    w.t1 = std::min(w.t1, horizon);
  }
  std::erase_if(windows, [](const Window& w) { return !(w.t1 > w.t0); });
  std::sort(windows.begin(), windows.end(), [](const Window& a, const Window& b) {
    return a.row != b.row ? a.row < b.row : a.t0 < b.t0;
  });
  std::vector<Window> merged;
  for (const auto& w : windows) {
    if (!merged.empty() && merged.back().row == w.row && w.t0 <= merged.back().t1) {
      merged.back().t1 = std::max(merged.back().t1, w.t1);
    } else {
      merged.push_back(w);
    }
  }
  windows = std::move(merged);
}

Plan build_plan(std::vector<Window>& windows, double horizon) {
  normalize(windows, horizon);
  struct Edge {
    double t;
    int window;
    bool entry;
  };
  std::vector<Edge> edges;
  std::vector<int> initial;
  for (int k = 0; k < static_cast<int>(windows.size()); ++k) {
    const auto& w = windows[k];
    if (w.t0 > 0.0) edges.push_back({w.t0, k, true});
    else initial.push_back(w.row);
    if (w.t1 < horizon) edges.push_back({w.t1, k, false});
  }
  std::stable_sort(edges.begin(), edges.end(),
                   [](const Edge& a, const Edge& b) { return a.t < b.t; });
  Plan plan;
  std::vector<ActiveSet> arcs{ActiveSet(initial)};
  for (const auto& e : edges) {
    const int row = windows[e.window].row;
    arcs.push_back(e.entry ? arcs.back().with(row) : arcs.back().without(row));
    // Coincident guesses would start Newton on a collapsed point.
    double t = e.t;
    if (!plan.times.empty() && t <= plan.times.back()) t = plan.times.back() + 1e-6;
    plan.times.push_back(t);
    plan.edges.push_back({e.window, e.entry});
  }
  plan.structure = ArcStructure(std::move(arcs));
  return plan;
}

struct Violation {
  int row = -1;
  double integral = 0.0;
  std::vector<std::pair<double, double>> runs;
};

// Bisection on g_row between a satisfied and a violated time.
double refine_crossing(const LtiOcProblem& problem, const SolvedTrajectory& traj,
                       int row, double t_ok, double t_bad, double tol) {
  for (int k = 0; k < 40 && std::abs(t_bad - t_ok) > 1e-12; ++k) {
    const double mid = 0.5 * (t_ok + t_bad);
    if (traj.state_at(problem, mid).g(row) > tol) t_bad = mid;
    else t_ok = mid;
  }
  return 0.5 * (t_ok + t_bad);
}

std::vector<Violation> scan_violations(const LtiOcProblem& problem,
                                       const SolvedTrajectory& traj,
                                       int points, double tol) {
  const auto samples = traj.sample_uniform(problem, points);
  const double step = traj.horizon / (points - 1);
  std::vector<Violation> out;
  for (int row = 0; row < problem.c(); ++row) {
    Violation v;
    v.row = row;
    int run_start = -1;
    auto bad = [&](int j) {
      const int arc = traj.arc_of(samples[j].t);
      return !traj.arcs[arc].active.contains(row) && samples[j].g(row) > tol;
    };
    for (int j = 0; j <= points; ++j) {
      const bool b = j < points && bad(j);
      if (b) v.integral += std::max(samples[j].g(row), 0.0) * step;
      if (b && run_start < 0) run_start = j;
      if (!b && run_start >= 0) {
        const double t0 = run_start == 0 ? 0.0
                                         : refine_crossing(problem, traj, row,
                                                           samples[run_start - 1].t,
                                                           samples[run_start].t, tol);
        const double t1 = j == points ? traj.horizon
                                      : refine_crossing(problem, traj, row,
                                                        samples[j].t, samples[j - 1].t, tol);
        v.runs.emplace_back(t0, t1);
        run_start = -1;
      }
    }
    if (!v.runs.empty()) out.push_back(std::move(v));
  }
  return out;
}

bool kkt_ok(const LtiOcProblem& problem, const ActiveSet& set) {
  try {
    assemble_arc_system(problem, set);
    return true;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kSingularKkt) return false;
    throw;
  }
}

void add_window(const LtiOcProblem& problem, std::vector<Window>& windows,
                const Window& fresh) {
  std::vector<int> rows{fresh.row};
  for (const auto& w : windows) {
    if (w.row != fresh.row && w.t0 < fresh.t1 && fresh.t0 < w.t1) rows.push_back(w.row);
  }
  if (rows.size() > 1 && !kkt_ok(problem, ActiveSet(rows))) {
    throw InfeasibleError(fresh.row, "row " + problem.row_name(fresh.row) +
                                         " cannot be enforced together with " +
                                         ActiveSet(rows).without(fresh.row).to_string());
  }
  windows.push_back(fresh);
}

std::string describe(const std::vector<Window>& windows) {
  std::ostringstream os;
  os << '[';
  for (size_t k = 0; k < windows.size(); ++k) {
    if (k) os << ", ";
    os << windows[k].row << "@(" << windows[k].t0 << ',' << windows[k].t1 << ')';
  }
  os << ']';
  return os.str();
}

}  // namespace

StructureResult detect_structure(const LtiOcProblem& problem, const Vector& x0,
                                 const StructureSearchOptions& options) {
  if (x0.size() != problem.n()) {
    throw Error(ErrorCode::kInvalidProblem, "x0 has wrong dimension");
  }
  const double horizon = problem.T;
  StructureResult result;
  auto note = [&](const std::string& line) {
    if (options.keep_log) result.log.push_back(line);
  };
  auto finish = [&](SolvedTrajectory traj, ValidationReport rep, int rounds) {
    result.structure = traj.structure;
    result.trajectory = std::move(traj);
    result.report = rep;
    result.rounds = rounds;
    return result;
  };

  for (const auto& hint : options.hints) {
    try {
      SolvedTrajectory traj =
          solve_fixed_structure(problem, x0, hint.structure, hint.guess, options.shooting);
      const ValidationReport rep = validate_solution(problem, traj, options.validation);
      if (rep.pass) {
        note("hint " + hint.structure.key() + " validated");
        return finish(std::move(traj), rep, 0);
      }
    } catch (const Error&) {
    }
  }

  std::vector<Window> windows;
  Vector lambda_guess = problem.P * x0;

  auto try_solve = [&](std::vector<Window>& ws, Plan& plan) -> SolvedTrajectory {
    plan = build_plan(ws, horizon);
    if (plan.structure.num_events() > options.max_events) {
      throw Error(ErrorCode::kNoStructure, "event cap exceeded");
    }
    return solve_fixed_structure(problem, x0, plan.structure,
                                 {lambda_guess, plan.times}, options.shooting);
  };

  for (int round = 1; round <= options.max_rounds; ++round) {
    Plan plan;
    SolvedTrajectory traj;
    try {
      traj = try_solve(windows, plan);
    } catch (const TimeEscapedError& e) {
      const auto [w, entry] = plan.edges[e.event()];
      note("round " + std::to_string(round) + ": " + plan.structure.key() +
           " event " + std::to_string(e.event()) + " escaped to " +
           std::to_string(e.time()));
      if (e.time() <= 0.0) {
        if (entry) windows[w].t0 = 0.0;
        else windows.erase(windows.begin() + w);
      } else {
        if (entry) windows.erase(windows.begin() + w);
        else windows[w].t1 = horizon;
      }
      continue;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kNoStructure) throw;
      note("round " + std::to_string(round) + ": " + plan.structure.key() + " " +
           e.what());
      if (e.code() == ErrorCode::kTimesCollapsed && !windows.empty()) {
        auto shortest = std::min_element(
            windows.begin(), windows.end(), [](const Window& a, const Window& b) {
              return a.t1 - a.t0 < b.t1 - b.t0;
            });
        windows.erase(shortest);
        continue;
      }
      // Neighbouring structures: stretch a window to an end, or drop it.
      bool moved = false;
      for (size_t k = 0; k < windows.size() && !moved; ++k) {
        for (int variant = 0; variant < 3 && !moved; ++variant) {
          std::vector<Window> cand = windows;
          if (variant == 0) cand[k].t0 = 0.0;
          else if (variant == 1) cand[k].t1 = horizon;
          else cand.erase(cand.begin() + k);
          Plan cplan;
          try {
            SolvedTrajectory ctraj = try_solve(cand, cplan);
            const ValidationReport rep =
                validate_solution(problem, ctraj, options.validation);
            if (rep.pass) return finish(std::move(ctraj), rep, round);
            windows = cand;
            moved = true;
          } catch (const Error& ce) {
            if (ce.code() == ErrorCode::kNoStructure) throw;
          }
        }
      }
      if (!moved) {
        throw Error(ErrorCode::kNoStructure,
                    "no neighbouring structure converges from " + describe(windows));
      }
      continue;
    }

    for (size_t s = 0; s < plan.edges.size(); ++s) {
      const auto [w, entry] = plan.edges[s];
      (entry ? windows[w].t0 : windows[w].t1) = traj.t_switch[s];
    }
    lambda_guess = traj.lambda0;
    const ValidationReport rep = validate_solution(problem, traj, options.validation);
    note("round " + std::to_string(round) + ": " + traj.structure.key() +
         " mu_min=" + std::to_string(rep.mu_min) + " g_max=" + std::to_string(rep.g_max));
    if (rep.pass) return finish(std::move(traj), rep, round);

    if (rep.mu_min < -options.tolerance) {
      // Drop the window of that row nearest to the offending instant.
      int best = -1;
      double best_d = 0.0;
      for (int k = 0; k < static_cast<int>(windows.size()); ++k) {
        if (windows[k].row != rep.mu_min_row) continue;
        const double d = std::max({windows[k].t0 - rep.mu_min_time,
                                   rep.mu_min_time - windows[k].t1, 0.0});
        if (best < 0 || d < best_d) best = k, best_d = d;
      }
      if (best >= 0) {
        windows.erase(windows.begin() + best);
        continue;
      }
    }

    auto violations = scan_violations(problem, traj, options.scan_points, options.tolerance);
    if (violations.empty()) {
      // Violation narrower than the scan spacing: open a small window there.
      const double half = horizon / options.scan_points;
      add_window(problem, windows,
                 {rep.g_max_row, rep.g_max_time - half, rep.g_max_time + half});
      continue;
    }
    const auto worst = std::max_element(
        violations.begin(), violations.end(),
        [](const Violation& a, const Violation& b) { return a.integral < b.integral; });
    for (const auto& [t0, t1] : worst->runs) {
      add_window(problem, windows,
                 {worst->row, t0 <= 0.0 ? 0.0 : t0, t1 >= horizon ? horizon : t1});
    }
  }
  throw Error(ErrorCode::kNoStructure,
              "round cap reached with windows " + describe(windows));
}

}  // namespace ctmp
