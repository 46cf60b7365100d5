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

// Sup-norm agreement of the cubic switching-time fit with the exact time.
// The required bound is tighter than the best uniform cubic approximation of
// the exact time on this interval, so this test is expected to fail.
#include <gtest/gtest.h>

#include <cmath>

#include "ctmp/explorer.hpp"
#include "test_problems.hpp"

namespace ctmp {
namespace {

TEST(SwitchingTimeFit, CubicWithinTwoHundredthsOfExact) {
  const auto p = testing::scalar_output_bounds();
  const double lo = testing::kLowerTwoArcEdge, hi = -0.5;
  std::vector<Vector> samples;
  for (int k = 0; k < 20; ++k) samples.push_back(testing::vec({lo + (hi - lo) * k / 19}));
  const auto fits = fit_switching_times(
      p, ArcStructure({ActiveSet{testing::kYmin}, ActiveSet{}}), samples, 3);
  double worst = 0.0;
  for (int k = 0; k <= 2000; ++k) {
    const double x = lo + (hi - lo) * k / 2000;
    worst = std::max(worst, std::abs(fits[0](testing::vec({x})) - testing::exit_time(x)));
  }
  RecordProperty("max_abs_error", std::to_string(worst));
  EXPECT_LE(worst, 0.02);
}

}  // namespace
}  // namespace ctmp
