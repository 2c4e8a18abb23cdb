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

#include "docret/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <array>
#include <limits>
#include <vector>

namespace docret {

namespace {
int g_max_threads = 0;
}

void set_max_threads(int threads) {
  g_max_threads = threads;
  if (threads > 0) omp_set_num_threads(threads);
}

int max_threads() { return g_max_threads > 0 ? g_max_threads : omp_get_max_threads(); }

namespace kernels {

float dot(const float* a, const float* b, std::size_t dim) {
  float s = 0.0f;
  for (std::size_t t = 0; t < dim; ++t) s += a[t] * b[t];
  return s;
}

float maxsim(const float* query, std::size_t m, const float* doc, std::size_t n, std::size_t dim) {
  constexpr std::size_t kDocTile = 8;
  constexpr std::size_t kQueryTile = 4;

  thread_local std::vector<float> panel;
  thread_local std::vector<float> zeros;
  thread_local std::vector<float> best;
  panel.assign(dim * kDocTile, 0.0f);
  if (zeros.size() < dim) zeros.assign(dim, 0.0f);
  best.assign(m, -std::numeric_limits<float>::infinity());

  for (std::size_t j0 = 0; j0 < n; j0 += kDocTile) {
    const std::size_t nb = std::min(kDocTile, n - j0);
    for (std::size_t b = 0; b < kDocTile; ++b) {
      if (b < nb) {
        const float* row = doc + (j0 + b) * dim;
        for (std::size_t t = 0; t < dim; ++t) panel[t * kDocTile + b] = row[t];
      } else {
        for (std::size_t t = 0; t < dim; ++t) panel[t * kDocTile + b] = 0.0f;
      }
    }
    for (std::size_t i0 = 0; i0 < m; i0 += kQueryTile) {
      const std::size_t qa = std::min(kQueryTile, m - i0);
      std::array<const float*, kQueryTile> rows{};
      for (std::size_t a = 0; a < kQueryTile; ++a) rows[a] = a < qa ? query + (i0 + a) * dim : zeros.data();

      float acc[kQueryTile][kDocTile] = {};
      const float* p = panel.data();
      for (std::size_t t = 0; t < dim; ++t) {
        for (std::size_t a = 0; a < kQueryTile; ++a) {
          const float qv = rows[a][t];
          for (std::size_t b = 0; b < kDocTile; ++b) acc[a][b] += qv * p[t * kDocTile + b];
        }
      }
      for (std::size_t a = 0; a < qa; ++a) {
        for (std::size_t b = 0; b < nb; ++b) {
          if (acc[a][b] > best[i0 + a]) best[i0 + a] = acc[a][b];
        }
      }
    }
  }
  float total = 0.0f;
  for (std::size_t i = 0; i < m; ++i) total += best[i];
  return total;
}

void dot_rows(const float* matrix, std::size_t rows, std::size_t dim, const float* query, float* out,
              Exec exec) {
  const auto n = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static) if (exec == Exec::kParallel)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    out[r] = dot(matrix + static_cast<std::size_t>(r) * dim, query, dim);
  }
}

}  // namespace kernels
}  // namespace docret
