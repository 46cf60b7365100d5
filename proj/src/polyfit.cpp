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

#include "ctmp/polyfit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

#include "ctmp/error.hpp"

namespace ctmp {

std::vector<std::vector<int>> monomial_exponents(int vars, int degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> e(vars, 0);
  // Within one total degree, larger leading exponents come first.
  std::function<void(int, int)> place = [&](int var, int left) {
    if (var == vars - 1) {
      e[var] = left;
      out.push_back(e);
      return;
    }
    for (int k = left; k >= 0; --k) {
      e[var] = k;
      place(var + 1, left - k);
    }
  };
  for (int d = 0; d <= degree; ++d) place(0, d);
  return out;
}

int monomial_count(int vars, int degree) {
  // C(vars + degree, degree)
  double c = 1.0;
  for (int k = 1; k <= degree; ++k) c = c * (vars + k) / k;
  return static_cast<int>(std::lround(c));
}

namespace {

Vector monomials(const Vector& x, const std::vector<std::vector<int>>& exps) {
  Vector row(static_cast<int>(exps.size()));
  for (size_t k = 0; k < exps.size(); ++k) {
    double v = 1.0;
    for (int i = 0; i < x.size(); ++i) v *= std::pow(x(i), exps[k][i]);
    row(static_cast<int>(k)) = v;
  }
  return row;
}

}  // namespace

double FittedPolynomial::operator()(const Vector& x) const {
  return monomials(x, monomial_exponents(vars, degree)).dot(coeffs);
}

std::string FittedPolynomial::to_string(const std::vector<std::string>& names,
                                        int precision) const {
  const auto exps = monomial_exponents(vars, degree);
  std::string out;
  char buf[64];
  for (size_t k = 0; k < exps.size(); ++k) {
    const double c = coeffs(static_cast<int>(k));
    std::snprintf(buf, sizeof buf, "%.*g", precision, std::abs(c));
    if (out.empty()) out = c < 0 ? "-" : "";
    else out += c < 0 ? " - " : " + ";
    out += buf;
    for (int i = 0; i < vars; ++i) {
      if (exps[k][i] == 0) continue;
      out += '*';
      out += i < static_cast<int>(names.size()) ? names[i] : "x" + std::to_string(i + 1);
      if (exps[k][i] > 1) out += '^' + std::to_string(exps[k][i]);
    }
  }
  return out;
}

FittedPolynomial fit_polynomial(const std::vector<Vector>& xs,
                                const std::vector<double>& ys, int degree) {
  if (xs.size() != ys.size() || xs.empty() || degree < 0) {
    throw Error(ErrorCode::kTooFewSamples, "no samples to fit");
  }
  const int vars = static_cast<int>(xs.front().size());
  const auto exps = monomial_exponents(vars, degree);
  const int terms = static_cast<int>(exps.size());
  const int count = static_cast<int>(xs.size());
  if (count < terms) {
    throw Error(ErrorCode::kTooFewSamples,
                std::to_string(count) + " samples for " + std::to_string(terms) +
                    " coefficients");
  }
  Matrix V(count, terms);
  Vector y(count);
  FittedPolynomial fit;
  fit.vars = vars;
  fit.degree = degree;
  fit.samples = count;
  fit.domain = {xs.front(), xs.front()};
  for (int k = 0; k < count; ++k) {
    V.row(k) = monomials(xs[k], exps).transpose();
    y(k) = ys[k];
    fit.domain.lo = fit.domain.lo.cwiseMin(xs[k]);
    fit.domain.hi = fit.domain.hi.cwiseMax(xs[k]);
  }
  fit.coeffs = V.colPivHouseholderQr().solve(y);
  const double ss_res = (V * fit.coeffs - y).squaredNorm();
  const double ss_tot = (y.array() - y.mean()).square().sum();
  if (ss_tot > 0.0) fit.r2 = std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
  else fit.r2 = ss_res <= 1e-24 ? 1.0 : 0.0;
  return fit;
}

}  // namespace ctmp
