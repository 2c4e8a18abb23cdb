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

#include <limits>

#include "docret/kernels.hpp"

namespace docret::reference {

float maxsim(const float* query, std::size_t m, const float* doc, std::size_t n, std::size_t dim) {
  float total = 0.0f;
  for (std::size_t i = 0; i < m; ++i) {
    float best = -std::numeric_limits<float>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      float s = 0.0f;
      for (std::size_t t = 0; t < dim; ++t) s += query[i * dim + t] * doc[j * dim + t];
      if (s > best) best = s;
    }
    total += best;
  }
  return total;
}

void dot_rows(const float* matrix, std::size_t rows, std::size_t dim, const float* query, float* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    float s = 0.0f;
    for (std::size_t t = 0; t < dim; ++t) s += matrix[r * dim + t] * query[t];
    out[r] = s;
  }
}

}  // namespace docret::reference
