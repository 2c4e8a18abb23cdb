// Copyright 2026-present the docret project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <span>

namespace docret {

/// Execution policy for the data-parallel kernels. Both policies produce
/// bit-identical results; kParallel only changes who computes what.
enum class Exec { kSerial, kParallel };

/// Caps the OpenMP worker count used by kParallel kernels (0 = runtime default).
void set_max_threads(int threads);
int max_threads();

namespace kernels {

/// Sequential dot product, accumulated in index order.
float dot(const float* a, const float* b, std::size_t dim);

/// Sum over query rows of the best dot product against any document row.
/// Document rows are processed in transposed panels of 8 so the inner loop
/// vectorises across documents while every individual dot product is still
/// accumulated in index order; the result rounds exactly like the naive
/// double loop.
float maxsim(const float* query, std::size_t m, const float* doc, std::size_t n, std::size_t dim);

/// out[r] = dot(matrix row r, query) for every row.
void dot_rows(const float* matrix, std::size_t rows, std::size_t dim, const float* query, float* out,
              Exec exec);

}  // namespace kernels

/// Straightforward loops kept as the baseline for the optimised kernels.
namespace reference {

float maxsim(const float* query, std::size_t m, const float* doc, std::size_t n, std::size_t dim);

void dot_rows(const float* matrix, std::size_t rows, std::size_t dim, const float* query, float* out);

}  // namespace reference

}  // namespace docret
