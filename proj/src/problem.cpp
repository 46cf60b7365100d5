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

#include "ctmp/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ctmp/error.hpp"

namespace ctmp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidProblem: return "InvalidProblem";
    case ErrorCode::kParse: return "Parse";
    case ErrorCode::kSingularKkt: return "SingularKkt";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kDegenerate: return "Degenerate";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kTimesCollapsed: return "TimesCollapsed";
    case ErrorCode::kTimeEscaped: return "TimeEscaped";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kNoStructure: return "NoStructure";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kSameStructure: return "SameStructure";
    case ErrorCode::kNonAffineBoundary: return "NonAffineBoundary";
    case ErrorCode::kBudget: return "Budget";
    case ErrorCode::kUnsupported: return "Unsupported";
  }
  return "Unknown";
}

bool ParameterBox::contains(const Vector& theta, double tol) const {
  if (theta.size() != lo.size()) return false;
  for (int i = 0; i < theta.size(); ++i) {
    if (theta(i) < lo(i) - tol || theta(i) > hi(i) + tol) return false;
  }
  return true;
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kInvalidProblem, what);
}

bool symmetric(const Matrix& M) {
  return (M - M.transpose()).cwiseAbs().maxCoeff() <=
         1e-12 * std::max(1.0, M.cwiseAbs().maxCoeff());
}

double min_eigenvalue(const Matrix& M) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

void LtiOcProblem::validate() const {
  const int nx = n(), nu = m(), nc = c();
  require(nx > 0 && A.cols() == nx, "A must be square and non-empty");
  require(nu > 0 && B.rows() == nx, "B must be n x m");
  require(Q.rows() == nx && Q.cols() == nx, "Q must be n x n");
  require(R.rows() == nu && R.cols() == nu, "R must be m x m");
  require(P.rows() == nx && P.cols() == nx, "P must be n x n");
  require(Gx.rows() == nc && Gx.cols() == nx, "Gx must be c x n");
  require(Gu.rows() == nc && Gu.cols() == nu, "Gu must be c x m");
  for (const Matrix* M : {&A, &B, &Q, &R, &P, &Gx, &Gu}) {
    require(M->allFinite(), "matrices must be finite");
  }
  require(b.allFinite(), "b must be finite");
  require(symmetric(Q) && min_eigenvalue(Q) >= -1e-12, "Q must be symmetric PSD");
  require(symmetric(P) && min_eigenvalue(P) >= -1e-12, "P must be symmetric PSD");
  require(symmetric(R) && min_eigenvalue(R) > 1e-12, "R must be symmetric PD");
  require(std::isfinite(T) && T > 0.0, "T must be positive");
  require(theta_box.lo.size() == nx && theta_box.hi.size() == nx,
          "theta_box must have n intervals");
  for (int i = 0; i < nx; ++i) {
    require(theta_box.lo(i) < theta_box.hi(i), "theta_box needs lo < hi");
  }
  for (int i = 0; i < nc; ++i) {
    require(Gx.row(i).cwiseAbs().maxCoeff() > 0.0 ||
                Gu.row(i).cwiseAbs().maxCoeff() > 0.0,
            "constraint row " + std::to_string(i) + " is zero");
  }
  require(row_names.empty() || static_cast<int>(row_names.size()) == nc,
          "row_names must have one entry per constraint");
}

std::string LtiOcProblem::row_name(int row) const {
  if (row >= 0 && row < static_cast<int>(row_names.size())) return row_names[row];
  return "g" + std::to_string(row);
}

Vector LtiOcProblem::constraint_values(const Vector& x, const Vector& u) const {
  return Gx * x + Gu * u - b;
}

double LtiOcProblem::constraint_value(int row, const Vector& x,
                                      const Vector& u) const {
  return Gx.row(row).dot(x) + Gu.row(row).dot(u) - b(row);
}

double LtiOcProblem::running_cost(const Vector& x, const Vector& u) const {
  return 0.5 * (x.dot(Q * x) + u.dot(R * u));
}

ActiveSet::ActiveSet(std::vector<int> indices) : indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
}

bool ActiveSet::contains(int row) const {
  return std::binary_search(indices_.begin(), indices_.end(), row);
}

int ActiveSet::position(int row) const {
  auto it = std::lower_bound(indices_.begin(), indices_.end(), row);
  if (it == indices_.end() || *it != row) return -1;
  return static_cast<int>(it - indices_.begin());
}

ActiveSet ActiveSet::with(int row) const {
  auto v = indices_;
  v.push_back(row);
  return ActiveSet(std::move(v));
}

ActiveSet ActiveSet::without(int row) const {
  auto v = indices_;
  v.erase(std::remove(v.begin(), v.end(), row), v.end());
  return ActiveSet(std::move(v));
}

std::string ActiveSet::to_string() const {
  std::ostringstream os;
  os << '{';
  for (size_t i = 0; i < indices_.size(); ++i) {
    if (i) os << ',';
    os << indices_[i];
  }
  os << '}';
  return os.str();
}

}  // namespace ctmp
