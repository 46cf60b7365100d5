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

#ifndef CTMP_MATRIX_EXP_HPP
#define CTMP_MATRIX_EXP_HPP

#include "ctmp/problem.hpp"

namespace ctmp {

// exp(M * dt) by scaling and squaring with a diagonal Pade approximant of
// degree 3..13 chosen from the 1-norm of M * dt.
//
// Throws Error(kNonFinite) when M or dt is not finite or the result overflows.
Matrix matrix_exponential(const Matrix& M, double dt);

}  // namespace ctmp

#endif  // CTMP_MATRIX_EXP_HPP
