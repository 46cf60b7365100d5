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

#include "ctmp/matrix_exp.hpp"

#include <array>
#include <cmath>

#include "ctmp/error.hpp"

namespace ctmp {
namespace {

// Backward-error bounds for the [m/m] Pade approximants in double precision.
constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e0;
constexpr double kTheta13 = 5.371920351148152e0;

constexpr std::array<double, 4> kB3 = {120.0, 60.0, 12.0, 1.0};
constexpr std::array<double, 6> kB5 = {30240.0, 15120.0, 3360.0,
                                       420.0,   30.0,    1.0};
constexpr std::array<double, 8> kB7 = {17297280.0, 8648640.0, 1995840.0,
                                       277200.0,   25200.0,   1512.0,
                                       56.0,       1.0};
constexpr std::array<double, 10> kB9 = {
    17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
    2162160.0,     110880.0,     3960.0,       90.0,        1.0};
constexpr std::array<double, 14> kB13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0,  129060195264000.0,   10559470521600.0,
    670442572800.0,      33522128640.0,       1323241920.0,
    40840800.0,          960960.0,            16380.0,
    182.0,               1.0};

template <size_t K>
Matrix pade_low(const Matrix& A, const std::array<double, K>& b) {
  const Eigen::Index n = A.rows();
  const Matrix I = Matrix::Identity(n, n);
  const Matrix A2 = A * A;
  Matrix U_inner = b[1] * I;
  Matrix V = b[0] * I;
  Matrix power = I;
  for (size_t k = 1; 2 * k < K; ++k) {
    power = power * A2;
    V += b[2 * k] * power;
    U_inner += b[2 * k + 1] * power;
  }
  const Matrix U = A * U_inner;
  return (V - U).partialPivLu().solve(V + U);
}

Matrix pade13(const Matrix& A) {
  const auto& b = kB13;
  const Eigen::Index n = A.rows();
  const Matrix I = Matrix::Identity(n, n);
  const Matrix A2 = A * A;
  const Matrix A4 = A2 * A2;
  const Matrix A6 = A4 * A2;
  const Matrix U = A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) +
                        b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I);
  const Matrix V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 +
                   b[4] * A4 + b[2] * A2 + b[0] * I;
  return (V - U).partialPivLu().solve(V + U);
}

}  // namespace

Matrix matrix_exponential(const Matrix& M, double dt) {
  if (M.rows() != M.cols()) {
    throw Error(ErrorCode::kInvalidProblem, "matrix_exponential needs a square matrix");
  }
  if (!std::isfinite(dt) || !M.allFinite()) {
    throw Error(ErrorCode::kNonFinite, "matrix_exponential input is not finite");
  }
  const Eigen::Index n = M.rows();
  if (n == 0) return Matrix(0, 0);
  const Matrix A = M * dt;
  const double norm = A.cwiseAbs().colwise().sum().maxCoeff();
  if (norm == 0.0) return Matrix::Identity(n, n);

  Matrix E;
  if (norm <= kTheta3) {
    E = pade_low(A, kB3);
  } else if (norm <= kTheta5) {
    E = pade_low(A, kB5);
  } else if (norm <= kTheta7) {
    E = pade_low(A, kB7);
  } else if (norm <= kTheta9) {
    E = pade_low(A, kB9);
  } else {
    int s = std::max(0, static_cast<int>(std::ceil(std::log2(norm / kTheta13))));
    if (s > 1000) {
      throw Error(ErrorCode::kNonFinite, "matrix_exponential argument too large");
    }
    E = pade13(A / std::ldexp(1.0, s));
    for (int i = 0; i < s; ++i) E = E * E;
  }
  if (!E.allFinite()) {
    throw Error(ErrorCode::kNonFinite, "matrix_exponential overflowed");
  }
  return E;
}

}  // namespace ctmp
