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

// Continuous-time solutions against a fine direct transcription.

#include <gtest/gtest.h>

#include <random>

#include "ctmp/error.hpp"
#include "ctmp/structure_search.hpp"
#include "dense_oracle.hpp"
#include "test_problems.hpp"

namespace ctmp {
namespace {

using testing::coupled_two_state;
using testing::dense_oracle;
using testing::Placement;
using testing::scalar_output_bounds;
using testing::vec;

constexpr int kOracleSteps = 2000;

std::vector<Vector> feasible_samples(const LtiOcProblem& p, int count,
                                     unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  std::vector<Vector> out;
  while (static_cast<int>(out.size()) < count) {
    Vector x(p.n());
    for (int j = 0; j < p.n(); ++j) {
      x(j) = p.theta_box.lo(j) + ud(rng) * (p.theta_box.hi(j) - p.theta_box.lo(j));
    }
    try {
      detect_structure(p, x);
      out.push_back(x);
    } catch (const InfeasibleError&) {
    }
  }
  return out;
}

class OracleCost : public ::testing::TestWithParam<int> {
 protected:
  LtiOcProblem problem() const {
    return GetParam() == 1 ? scalar_output_bounds() : coupled_two_state();
  }
};

TEST_P(OracleCost, RelativeAgreementAtRandomPoints) {
  const LtiOcProblem p = problem();
  for (const Vector& x0 : feasible_samples(p, 10, 100 + GetParam())) {
    const double j_ct = detect_structure(p, x0).trajectory.cost;
    const auto o = dense_oracle(p, x0, kOracleSteps);
    ASSERT_TRUE(o.converged);
    EXPECT_LE(std::abs(j_ct - o.cost), 1e-3 * std::abs(j_ct)) << x0.transpose();
  }
}

// A held input satisfying the constraints at both interval ends is feasible
// for the continuous problem when A = 0, so its cost bounds J from above.
TEST_P(OracleCost, NoHeldInputPolicyBeatsTheSolution) {
  const LtiOcProblem p = problem();
  for (const Vector& x0 : feasible_samples(p, 5, 200 + GetParam())) {
    const double j_ct = detect_structure(p, x0).trajectory.cost;
    const auto o = dense_oracle(p, x0, kOracleSteps, Placement::kBothEnds);
    ASSERT_TRUE(o.converged);
    EXPECT_LE(j_ct, o.cost + 1e-6) << x0.transpose();
  }
}

INSTANTIATE_TEST_SUITE_P(Examples, OracleCost, ::testing::Values(1, 2));

// Zero crossing of the row's multiplier density, by a line through the last
// positive samples.
double multiplier_zero_crossing(const testing::OracleSolution& o, int row) {
  const int N = static_cast<int>(o.mu.size()) - 1;
  double peak = 0.0;
  for (const Vector& m : o.mu) peak = std::max(peak, m(row));
  int last = -1;
  for (int k = 0; k <= N; ++k)
    if (o.mu[k](row) > 1e-6 * peak) last = k;
  // Fit on points 5..25 steps before the end of the active arc.
  Eigen::MatrixXd A(21, 2);
  Vector y(21);
  for (int j = 0; j < 21; ++j) {
    const int k = last - 5 - j;
    A(j, 0) = 1.0;
    A(j, 1) = k * o.h;
    y(j) = o.mu[k](row);
  }
  const Vector c = A.colPivHouseholderQr().solve(y);
  return -c(0) / c(1);
}

TEST(OracleSwitch, TwoStateExitTime) {
  const LtiOcProblem p = coupled_two_state();
  const Vector x0 = vec({0.0, 0.5});
  const StructureResult r = detect_structure(p, x0);
  ASSERT_EQ(r.structure.key(), "{0}>{}");
  const auto o = dense_oracle(p, x0, kOracleSteps);
  ASSERT_TRUE(o.converged);
  EXPECT_NEAR(r.trajectory.t_switch[0], multiplier_zero_crossing(o, 0), 1e-3);
}

TEST(OracleSwitch, ScalarExitTime) {
  const LtiOcProblem p = scalar_output_bounds();
  const Vector x0 = vec({-0.8});
  const auto o = dense_oracle(p, x0, kOracleSteps);
  ASSERT_TRUE(o.converged);
  EXPECT_NEAR(multiplier_zero_crossing(o, testing::kYmin), std::log(2.5), 1e-3);
}

}  // namespace
}  // namespace ctmp
