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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ctmp/error.hpp"
#include "test_problems.hpp"

namespace ctmp {
namespace {

using testing::coupled_two_state;
using testing::exit_time;
using testing::kInfeasibleEdge;
using testing::kLowerTwoArcEdge;
using testing::kYmax;
using testing::kYmin;
using testing::scalar_output_bounds;
using testing::vec;

const ArcStructure kLowerThenFree({ActiveSet{kYmin}, ActiveSet{}});

std::vector<Vector> uniform_1d(double lo, double hi, int count) {
  std::vector<Vector> out;
  for (int k = 0; k < count; ++k) out.push_back(vec({lo + (hi - lo) * k / (count - 1)}));
  return out;
}

// Scales `got` onto the normalisation of `ref` (largest |a| coefficient) and
// checks each coefficient within `rel`.
void expect_border(const AffineInequality& got, std::vector<double> ref, double rel) {
  const int k = std::abs(ref[0]) >= std::abs(ref[1]) ? 0 : 1;
  const double scale = ref[k] / got.a(k);
  ASSERT_GT(scale, 0.0) << "orientation flipped";
  const double coeffs[3] = {got.a(0) * scale, got.a(1) * scale, got.b * scale};
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(coeffs[i], ref[i], rel * std::abs(ref[i])) << "coefficient " << i;
  }
}

TEST(BoundaryValues, UnconstrainedUpperOutput) {
  const auto p = scalar_output_bounds();
  const auto tr = detect_structure(p, vec({0.3})).trajectory;
  const BoundaryValues bv = boundary_values(p, tr);
  EXPECT_NEAR(bv.g_bar(kYmax), -0.4, 1e-12);
  EXPECT_EQ(bv.g_bar_time(kYmax), 0.0);
  EXPECT_TRUE(std::isinf(bv.mu_bar(kYmax)));
  EXPECT_GT(bv.margin, 0.0);
}

TEST(BoundaryValues, BorderPointIsZero) {
  const auto p = scalar_output_bounds();
  const auto tr = solve_fixed_structure(p, vec({0.5}), ArcStructure());
  EXPECT_NEAR(boundary_values(p, tr).g_bar(kYmax), 0.0, 1e-12);
}

TEST(BoundaryValues, TwoArcMultiplierMatchesClosedForm) {
  const auto p = scalar_output_bounds();
  for (double x0 : {-0.85, -0.8, -0.6}) {
    const auto tr = solve_fixed_structure(p, vec({x0}), kLowerThenFree);
    const BoundaryValues bv = boundary_values(p, tr);
    // mu(t) = exp(ts - t) - 1 on the constrained arc, smallest at t = 0
    // once the exit instant itself is excluded.
    const double ts = exit_time(x0);
    EXPECT_NEAR(bv.mu_bar(kYmin), std::exp(ts) - 1.0, 1e-9);
    EXPECT_EQ(bv.mu_bar_time(kYmin), 0.0);
    // After the exit g = exp(ts - t) - 1, largest away from ts at t = T.
    EXPECT_NEAR(bv.g_bar(kYmin), std::exp(ts - 2.0) - 1.0, 1e-9);
    EXPECT_NEAR(bv.time_margin, std::min(ts, 2.0 - ts), 1e-9);
  }
}

TEST(BoundaryValues, InteriorMaximumIsRefined) {
  // Two-state problem: interior maxima exist on unconstrained arcs.
  const auto p = coupled_two_state();
  const auto tr = detect_structure(p, vec({0.5, -0.3})).trajectory;
  const BoundaryValues bv = boundary_values(p, tr, 400);
  double dense = -INFINITY;
  for (const auto& s : tr.sample_uniform(p, 20001)) dense = std::max(dense, s.g(0));
  EXPECT_GE(bv.g_bar(0), dense - 1e-12);
  EXPECT_NEAR(bv.g_bar(0), dense, 1e-6);
}

TEST(FitSwitchingTimes, ScalarCubicReferenceCoefficients) {
  const auto p = scalar_output_bounds();
  const auto fits = fit_switching_times(p, kLowerThenFree,
                                        uniform_1d(kLowerTwoArcEdge, -0.5, 20), 3);
  ASSERT_EQ(fits.size(), 1u);
  const Vector& c = fits[0].coeffs;  // 1, x, x^2, x^3
  const double ref[4] = {-6.71, -30.03, -46.14, -25.63};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(c(i), ref[i], 0.1 * std::abs(ref[i])) << i;
  EXPECT_NEAR(fits[0].r2, 0.9990, 5e-4);
}

TEST(FitSwitchingTimes, ScalarFortySamples) {
  const auto p = scalar_output_bounds();
  const auto fits = fit_switching_times(p, kLowerThenFree,
                                        uniform_1d(kLowerTwoArcEdge, -0.5, 40), 3);
  EXPECT_GE(fits[0].r2, 0.999);
  EXPECT_EQ(fits[0].samples, 40);
}

TEST(FitSwitchingTimes, OtherStructuresDiscarded) {
  const auto p = scalar_output_bounds();
  // Half of these samples lie in the unconstrained region.
  const auto fits = fit_switching_times(p, kLowerThenFree, uniform_1d(-0.9, 0.0, 41), 2);
  EXPECT_LT(fits[0].samples, 41);
  EXPECT_GT(fits[0].samples, 10);
  EXPECT_THROW(fit_switching_times(p, kLowerThenFree, uniform_1d(0.0, 0.4, 10), 3), Error);
}

TEST(FitSwitchingTimes, NoEventsNoFits) {
  const auto p = scalar_output_bounds();
  EXPECT_TRUE(fit_switching_times(p, ArcStructure(), uniform_1d(-0.4, 0.4, 5), 3).empty());
}

TEST(FitSwitchingTimes, TwoStateSurface) {
  const auto p = coupled_two_state();
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> ud(-2.0, 2.0);
  std::vector<Vector> samples;
  while (samples.size() < 200) {
    const Vector x = vec({ud(rng), ud(rng)});
    const double d = x(1) - x(0);
    if (d > 0.36 && d < 0.60) samples.push_back(x);
  }
  const auto fits = fit_switching_times(p, ArcStructure({ActiveSet{0}, ActiveSet{}}),
                                        samples, 3);
  ASSERT_EQ(fits.size(), 1u);
  EXPECT_GE(fits[0].r2, 0.99);
  EXPECT_EQ(fits[0].coeffs.size(), 10);
}

TEST(RefineBoundary, Brackets) {
  const auto p = scalar_output_bounds();
  const std::optional<ArcStructure> free = ArcStructure();
  const std::optional<ArcStructure> upper = ArcStructure({ActiveSet{kYmax}, ActiveSet{}});
  const std::optional<ArcStructure> lower_full = ArcStructure({ActiveSet{kYmin}});
  EXPECT_NEAR(refine_boundary_1d(p, free, upper, 0.3, 0.7), 0.5, 1e-6);
  EXPECT_NEAR(refine_boundary_1d(p, lower_full, kLowerThenFree, -1.0, -0.6),
              kLowerTwoArcEdge, 1e-6);
  EXPECT_NEAR(refine_boundary_1d(p, std::nullopt, lower_full, -1.4, -1.1), kInfeasibleEdge,
              1e-6);
  try {
    refine_boundary_1d(p, free, free, -0.1, 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSameStructure);
  }
}

TEST(ClassifyGrid, ParallelMatchesSerial) {
  const auto p = scalar_output_bounds();
  const auto a = classify_grid(p, {101});
  const auto b = classify_grid_serial(p, {101});
  EXPECT_EQ(a.label, b.label);
  EXPECT_EQ(a.structures, b.structures);
  EXPECT_EQ(a.t_switch, b.t_switch);
}

TEST(ExploreRegions, ScalarPartition) {
  const auto p = scalar_output_bounds();
  const Exploration ex = explore_regions(p);
  ASSERT_EQ(ex.regions.size(), 5u);
  const double edges[6] = {kInfeasibleEdge, kLowerTwoArcEdge, -0.5, 0.5, -kLowerTwoArcEdge,
                           2.0};
  const char* keys[5] = {"{1}", "{1}>{}", "{}", "{0}>{}", "{0}"};
  for (int r = 0; r < 5; ++r) {
    EXPECT_NEAR(ex.regions[r].lo, edges[r], 1e-5) << r;
    EXPECT_NEAR(ex.regions[r].hi, edges[r + 1], 1e-5) << r;
    EXPECT_EQ(ex.regions[r].structure.key(), keys[r]);
  }
  ASSERT_EQ(ex.infeasible_intervals.size(), 1u);
  EXPECT_EQ(ex.infeasible_intervals[0].first, -2.0);
  EXPECT_NEAR(ex.infeasible_intervals[0].second, kInfeasibleEdge, 1e-5);
  // Two-arc regions carry a cubic time fit.
  EXPECT_EQ(ex.regions[1].t_switch_fit.size(), 1u);
  EXPECT_TRUE(ex.regions[2].t_switch_fit.empty());
}

TEST(ExploreRegions, ShrunkBoxHasOneRegion) {
  auto p = scalar_output_bounds();
  p.theta_box = {vec({-0.4}), vec({0.4})};
  const Exploration ex = explore_regions(p);
  ASSERT_EQ(ex.regions.size(), 1u);
  EXPECT_EQ(ex.regions[0].structure.key(), "{}");
}

TEST(ExploreRegions, ScalarCountStableUnderResolution) {
  const auto p = scalar_output_bounds();
  for (int n : {101, 401, 1601}) {
    ExploreOptions opt;
    opt.grid = {n};
    EXPECT_EQ(explore_regions(p, opt).regions.size(), 5u) << n;
  }
}

class TwoStateExploration : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    problem_ = new LtiOcProblem(coupled_two_state());
    ex_ = new Exploration(explore_regions(*problem_));
  }
  static void TearDownTestSuite() {
    delete ex_;
    delete problem_;
  }
  static const AffineInequality& border(int a, int b) {
    const auto& r = ex_->regions[a];
    for (size_t k = 0; k < r.neighbours.size(); ++k) {
      if (r.neighbours[k] == b) return r.inequalities[k];
    }
    throw std::runtime_error("no such border");
  }
  static LtiOcProblem* problem_;
  static Exploration* ex_;
};
LtiOcProblem* TwoStateExploration::problem_ = nullptr;
Exploration* TwoStateExploration::ex_ = nullptr;

TEST_F(TwoStateExploration, FiveClasses) {
  ASSERT_EQ(ex_->regions.size(), 5u);
  const char* keys[5] = {"{}", "{0}>{}", "{0}", "{1}>{}", "{1}"};
  for (int r = 0; r < 5; ++r) EXPECT_EQ(ex_->regions[r].structure.key(), keys[r]);
  EXPECT_TRUE(ex_->infeasible_points.empty());
}

TEST_F(TwoStateExploration, BordersMatchReference) {
  expect_border(border(0, 1), {-3.36, 3.36, -1.2}, 0.05);
  expect_border(border(0, 3), {3.36, -3.36, -2.0}, 0.05);
  expect_border(border(1, 2), {-1.00, 1.0, -0.61}, 0.05);
  expect_border(border(3, 4), {1.00, -1.0, -1.01}, 0.05);
  const auto& b = border(3, 4);
  EXPECT_NEAR(-b.a(0) / b.a(1), 1.0, 1e-2);
}

TEST_F(TwoStateExploration, CoverageOfGrid) {
  const auto& g = ex_->grid;
  for (int i = 0; i < g.size(); ++i) {
    if (g.label[i] < 0) continue;
    int hits = 0;
    for (const auto& r : ex_->regions) hits += r.contains(g.points[i], 1e-6);
    EXPECT_EQ(hits, 1) << g.points[i].transpose();
  }
}

TEST_F(TwoStateExploration, RandomPointsMatchStructure) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> ud(-2.0, 2.0);
  for (const auto& region : ex_->regions) {
    int tested = 0, tries = 0;
    while (tested < 100 && tries++ < 200000) {
      const Vector x = vec({ud(rng), ud(rng)});
      bool inside = true;
      // Stay 1e-3 clear of fitted borders.
      for (const auto& q : region.inequalities) inside &= q.value(x) < -1e-3 * q.a.norm();
      if (!inside) continue;
      ++tested;
      EXPECT_EQ(detect_structure(*problem_, x).structure, region.structure)
          << x.transpose();
    }
    EXPECT_EQ(tested, 100);
  }
}

TEST_F(TwoStateExploration, SurfaceFitQuality) {
  EXPECT_GE(ex_->regions[1].t_switch_fit.at(0).r2, 0.99);
  EXPECT_GE(ex_->regions[3].t_switch_fit.at(0).r2, 0.99);
}

TEST(ExploreRegions, TwoStateCountStableUnderResolution) {
  const auto p = coupled_two_state();
  for (int n : {21, 101}) {
    ExploreOptions opt;
    opt.grid = {n, n};
    EXPECT_EQ(explore_regions(p, opt).regions.size(), 5u) << n;
  }
}

}  // namespace
}  // namespace ctmp
