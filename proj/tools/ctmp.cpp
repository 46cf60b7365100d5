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

// Command-line front end: solve, explore, dt, compare.

#include <omp.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ctmp/dt_mpqp.hpp"
#include "ctmp/error.hpp"
#include "ctmp/explorer.hpp"
#include "ctmp/io.hpp"
#include "ctmp/structure_search.hpp"

namespace {

using namespace ctmp;

enum ExitCode { kOk = 0, kUsage = 1, kParseFailure = 2, kInfeasible = 3, kNoConvergence = 4, kBudget = 5 };

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kParse:
    case ErrorCode::kInvalidProblem:
      return kParseFailure;
    case ErrorCode::kInfeasible:
      return kInfeasible;
    case ErrorCode::kBudget:
      return kBudget;
    default:
      return kNoConvergence;
  }
}

Vector parse_point(const std::string& text, int dim) {
  std::vector<double> v;
  std::string s = text;
  for (char& c : s)
    if (c == ',') c = ' ';
  std::istringstream in(s);
  double x;
  while (in >> x) v.push_back(x);
  if (!in.eof() || static_cast<int>(v.size()) != dim) {
    throw Error(ErrorCode::kParse, "--x0 needs " + std::to_string(dim) + " comma-separated values");
  }
  return Eigen::Map<Vector>(v.data(), dim);
}

std::string join(const std::vector<double>& v) {
  std::string out;
  char buf[32];
  for (double x : v) {
    std::snprintf(buf, sizeof buf, "%s%.10g", out.empty() ? "" : ", ", x);
    out += buf;
  }
  return out;
}

std::string path_in(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

struct Common {
  std::string problem_file;
  std::string out = "out";
  int threads = 0;
  double tol = 1e-7;
};

StructureSearchOptions search_options(const Common& c) {
  StructureSearchOptions s;
  s.tolerance = c.tol;
  s.validation.tolerance = c.tol;
  return s;
}

int cmd_solve(const Common& c, const std::string& x0_text, double dt) {
  const LtiOcProblem problem = load_problem(c.problem_file);
  const Vector x0 = parse_point(x0_text, problem.n());
  const StructureResult r = detect_structure(problem, x0, search_options(c));
  const SolvedTrajectory& traj = r.trajectory;
  if (dt <= 0.0) dt = problem.T / 500.0;
  write_file_atomic(path_in(c.out, "trajectory.csv"), trajectory_csv(problem, traj, dt));
  std::ostringstream s;
  s << "structure: " << r.structure.label(problem) << "\n";
  s << "key: " << r.structure.key() << "\n";
  s << "switches: " << traj.t_switch.size() << "\n";
  s << "t_switch: [" << join(traj.t_switch) << "]\n";
  char buf[128];
  std::snprintf(buf, sizeof buf, "cost: %.12g\n", traj.cost);
  s << buf;
  std::snprintf(buf, sizeof buf, "stationarity: %.3g\ncomplementarity: %.3g\nhamiltonian_jump: %.3g\n",
                r.report.stationarity_max, r.report.complementarity_max,
                r.report.hamiltonian_jump_max);
  s << buf;
  write_file_atomic(path_in(c.out, "summary.txt"), s.str());
  std::cout << s.str();
  return kOk;
}

int cmd_explore(const Common& c, int grid, int fit_degree) {
  const LtiOcProblem problem = load_problem(c.problem_file);
  ExploreOptions o;
  if (grid > 0) o.grid.assign(problem.theta_box.dim(), grid);
  o.fit_degree = fit_degree;
  o.search = search_options(c);
  const Exploration ex = explore_regions(problem, o);
  if (ex.regions.empty()) {
    std::cerr << "parameter box is entirely infeasible\n";
    return kInfeasible;
  }
  write_file_atomic(path_in(c.out, "regions.json"), regions_json(problem, ex));
  const std::string table = regions_csv(problem, ex.regions);
  write_file_atomic(path_in(c.out, "regions.csv"), table);
  write_file_atomic(path_in(c.out, "fits.csv"), fits_csv(ex.regions));
  write_file_atomic(path_in(c.out, "regions.svg"), region_map_svg(problem, ex));
  std::cout << ex.regions.size() << " regions\n" << table;
  for (const auto& [a, b] : ex.infeasible_intervals) {
    std::printf("infeasible: [%.6f, %.6f]\n", a, b);
  }
  return kOk;
}

long g_candidate_cap = PartitionOptions{}.candidate_cap;

PartitionOptions partition_options(const LtiOcProblem& problem, const std::string& strategy,
                                   int grid) {
  PartitionOptions o;
  o.candidate_cap = g_candidate_cap;
  o.strategy = !strategy.empty() ? parse_strategy(strategy)
               : problem.n() == 1 ? PartitionStrategy::kSweep1d
                                  : PartitionStrategy::kGridSeeded;
  if (grid > 0) o.grid.assign(problem.n(), grid);
  return o;
}

int cmd_dt(const Common& c, int N, const std::string& strategy, int grid) {
  const LtiOcProblem problem = load_problem(c.problem_file);
  const DtProblem dt = discretize_zoh(problem, N);
  const DtPartition part = enumerate_partition(dt, partition_options(problem, strategy, grid));
  const std::string tag = "_N" + std::to_string(N);
  write_file_atomic(path_in(c.out, "dt_regions" + tag + ".csv"), dt_regions_csv(dt, part));
  write_file_atomic(path_in(c.out, "dt_regions" + tag + ".svg"), dt_region_map_svg(dt, part));
  std::printf("N = %d, h = %.6g: %d regions (%ld QP solves)\n", N, dt.h, part.size(),
              part.qp_solves);
  if (problem.n() == 1) {
    const auto [lo, hi] = part.feasible_interval();
    std::printf("feasible: [%.6f, %.6f]\n", lo, hi);
  }
  return part.size() > 0 ? kOk : kInfeasible;
}

int cmd_compare(const Common& c, const std::vector<int>& N_list, const std::string& strategy,
                int grid, int ct_grid, const std::string& x0_text) {
  const LtiOcProblem problem = load_problem(c.problem_file);
  ExploreOptions eo;
  if (ct_grid > 0) eo.grid.assign(problem.theta_box.dim(), ct_grid);
  eo.search = search_options(c);
  const Exploration ct = explore_regions(problem, eo);

  // Cost samples on a coarse uniform grid.
  std::vector<Vector> samples = grid_points(
      problem.theta_box, std::vector<int>(problem.n(), problem.n() == 1 ? 21 : 7));
  const ComparisonReport rep = compare_ct_dt(problem, ct, N_list, samples,
                                             partition_options(problem, strategy, grid),
                                             search_options(c));
  write_file_atomic(path_in(c.out, "comparison.csv"), comparison_csv(rep));
  write_file_atomic(path_in(c.out, "costs.csv"), cost_samples_csv(rep, N_list));
  std::cout << comparison_csv(rep);

  if (!x0_text.empty()) {
    const Vector x0 = parse_point(x0_text, problem.n());
    const StructureResult r = detect_structure(problem, x0, search_options(c));
    for (int N : N_list) {
      const DtProblem dt = discretize_zoh(problem, N);
      const DtPointSolution sol = solve_qp(dt, x0);
      const std::string tag = "_N" + std::to_string(N);
      write_file_atomic(path_in(c.out, "overlay" + tag + ".csv"),
                        overlay_csv(problem, r.trajectory, dt, sol, x0));
      write_file_atomic(path_in(c.out, "overlay" + tag + ".svg"),
                        overlay_svg(problem, r.trajectory, dt, sol, x0));
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explicit solutions of constrained linear-quadratic optimal control problems"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--out", common.out, "Output directory")->capture_default_str();
  app.add_option("--threads", common.threads, "OpenMP threads (0: runtime default)");
  app.add_option("--tol", common.tol, "Structure validation tolerance")->capture_default_str();

  std::string x0;
  double dt = 0.0;
  int grid = 0, fit_degree = 3, N = 5, ct_grid = 0;
  std::string strategy;
  std::vector<int> N_list;

  auto* solve = app.add_subcommand("solve", "Solve one initial state");
  solve->add_option("problem", common.problem_file)->required();
  solve->add_option("--x0", x0, "Initial state, comma separated")->required();
  solve->add_option("--dt", dt, "Output sampling step (default T/500)");

  auto* explore = app.add_subcommand("explore", "Continuous-time critical regions");
  explore->add_option("problem", common.problem_file)->required();
  explore->add_option("--grid", grid, "Grid points per axis (default 401 in 1D, 41 in 2D)");
  explore->add_option("--fit-degree", fit_degree, "Switching-time polynomial degree")
      ->capture_default_str();

  auto* dtc = app.add_subcommand("dt", "Discrete-time mpQP partition");
  dtc->add_option("problem", common.problem_file)->required();
  dtc->add_option("--N", N, "Number of steps")->capture_default_str();
  dtc->add_option("--strategy", strategy, "sweep1d, grid_seeded or combinatorial");
  dtc->add_option("--grid", grid, "grid_seeded points per axis");
  dtc->add_option("--max-candidates", g_candidate_cap, "combinatorial candidate cap")
      ->capture_default_str();

  auto* cmp = app.add_subcommand("compare", "Continuous versus discrete time");
  cmp->add_option("problem", common.problem_file)->required();
  cmp->add_option("--N-list", N_list, "Step counts")->delimiter(',')->required();
  cmp->add_option("--strategy", strategy, "sweep1d, grid_seeded or combinatorial");
  cmp->add_option("--grid", grid, "grid_seeded points per axis");
  cmp->add_option("--ct-grid", ct_grid, "Continuous-time grid points per axis");
  cmp->add_option("--x0", x0, "Initial state for trajectory overlays");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kParseFailure;
  }
  if (common.threads > 0) omp_set_num_threads(common.threads);

  try {
    if (*solve) return cmd_solve(common, x0, dt);
    if (*explore) return cmd_explore(common, grid, fit_degree);
    if (*dtc) return cmd_dt(common, N, strategy, grid);
    if (*cmp) return cmd_compare(common, N_list, strategy, grid, ct_grid, x0);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNoConvergence;
  }
  return kUsage;
}
