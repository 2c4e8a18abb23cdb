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

// Reference loops against the serial and parallel kernels.

#include <benchmark/benchmark.h>

#include <map>
#include <string>
#include <vector>

#include "docret/bm25.hpp"
#include "docret/kernels.hpp"
#include "docret/late_interaction.hpp"
#include "docret/muvera.hpp"
#include "docret/rng.hpp"

using namespace docret;

namespace {

constexpr std::size_t kDim = 128;

std::vector<float> gaussian(GaussianSource& g, std::size_t n) {
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(g.next());
  return v;
}

/// `pages` pages of `tokens` vectors each.
std::shared_ptr<const EmbeddingChannel> multi_channel(std::size_t pages, std::size_t tokens) {
  GaussianSource g(5);
  std::map<std::uint32_t, std::vector<std::vector<float>>> payloads;
  for (std::uint32_t p = 0; p < pages; ++p)
    for (std::size_t t = 0; t < tokens; ++t) payloads[p].push_back(gaussian(g, kDim));
  return make_channel(ChannelId::kMultivectorImage, pages, payloads, false);
}

const EmbeddingChannel& scan_channel() {
  static const auto channel = multi_channel(512, 256);
  return *channel;
}

const std::vector<float>& scan_query() {
  static const auto q = [] {
    GaussianSource g(6);
    return gaussian(g, 32 * kDim);
  }();
  return q;
}

void BM_MaxSimScan_Reference(benchmark::State& state) {
  const auto& ch = scan_channel();
  const auto& q = scan_query();
  std::vector<float> scores(ch.slots());
  for (auto _ : state) {
    for (std::uint32_t p = 0; p < ch.slots(); ++p) {
      const auto d = ch.vectors(p);
      scores[p] = reference::maxsim(q.data(), 32, d.data.data(), d.count, kDim);
    }
    benchmark::DoNotOptimize(scores.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ch.slots()));
}

void BM_MaxSimScan(benchmark::State& state) {
  const auto exec = state.range(0) == 0 ? Exec::kSerial : Exec::kParallel;
  const auto& ch = scan_channel();
  const auto view = make_view(scan_query(), kDim);
  for (auto _ : state) benchmark::DoNotOptimize(maxsim_scan(ch, view, exec));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ch.slots()));
}

struct DenseData {
  std::vector<float> matrix;
  std::vector<float> query;
  std::size_t rows = 100000;
};

const DenseData& dense_data() {
  static const DenseData d = [] {
    GaussianSource g(7);
    DenseData out;
    out.matrix = gaussian(g, out.rows * kDim);
    out.query = gaussian(g, kDim);
    return out;
  }();
  return d;
}

void BM_DotRows_Reference(benchmark::State& state) {
  const auto& d = dense_data();
  std::vector<float> out(d.rows);
  for (auto _ : state) {
    reference::dot_rows(d.matrix.data(), d.rows, kDim, d.query.data(), out.data());
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d.rows));
}

void BM_DotRows(benchmark::State& state) {
  const auto exec = state.range(0) == 0 ? Exec::kSerial : Exec::kParallel;
  const auto& d = dense_data();
  std::vector<float> out(d.rows);
  for (auto _ : state) {
    kernels::dot_rows(d.matrix.data(), d.rows, kDim, d.query.data(), out.data(), exec);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d.rows));
}

void BM_FdeIndexBuild(benchmark::State& state) {
  const auto exec = state.range(0) == 0 ? Exec::kSerial : Exec::kParallel;
  static const auto channel = multi_channel(256, 128);
  for (auto _ : state) benchmark::DoNotOptimize(FdeIndex::build(*channel, FdeParams{}, exec));
  state.SetItemsProcessed(state.iterations() * 256);
}

void BM_Bm25Build(benchmark::State& state) {
  const auto exec = state.range(0) == 0 ? Exec::kSerial : Exec::kParallel;
  static const auto texts = [] {
    GaussianSource g(8);
    std::vector<std::string> out(5000);
    for (auto& t : out)
      for (int w = 0; w < 200; ++w) t += "w" + std::to_string(static_cast<int>(g.uniform() * 3000)) + " ";
    return out;
  }();
  for (auto _ : state) benchmark::DoNotOptimize(InvertedIndex::build(texts, exec));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(texts.size()));
}

}  // namespace

BENCHMARK(BM_MaxSimScan_Reference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MaxSimScan)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DotRows_Reference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DotRows)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FdeIndexBuild)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Bm25Build)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
