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

#ifndef CTMP_POLYFIT_HPP
#define CTMP_POLYFIT_HPP

#include <string>
#include <vector>

#include "ctmp/problem.hpp"

namespace ctmp {

// Exponent tuples of all monomials of total degree <= degree, in graded
// lexicographic order: 1, x1, x2, x1^2, x1 x2, x2^2, x1^3, ...
std::vector<std::vector<int>> monomial_exponents(int vars, int degree);
int monomial_count(int vars, int degree);

struct FittedPolynomial {
  int vars = 0;
  int degree = 0;
  Vector coeffs;
  double r2 = 0.0;
  ParameterBox domain;  // bounding box of the samples
  int samples = 0;

  double operator()(const Vector& x) const;
  // "-1.10 - 4.49*x1 + ..." with the given variable names.
  std::string to_string(const std::vector<std::string>& names = {},
                        int precision = 4) const;
};

// Least-squares fit; r2 against the mean predictor on the given samples.
// Throws Error(kTooFewSamples) when there are fewer samples than monomials.
FittedPolynomial fit_polynomial(const std::vector<Vector>& xs,
                                const std::vector<double>& ys, int degree);

}  // namespace ctmp

#endif  // CTMP_POLYFIT_HPP
