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

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <set>

#include "docret/dense_index.hpp"
#include "docret/rng.hpp"
#include "expect_error.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "temp_store.hpp"

using namespace docret;

namespace {

Corpus dense_corpus(const std::vector<float>& rows, std::size_t dim, bool normalize) {
  const std::size_t n = rows.size() / dim;
  std::map<std::uint32_t, std::vector<std::vector<float>>> payloads;
  for (std::size_t i = 0; i < n; ++i)
    payloads[static_cast<std::uint32_t>(i)] = {std::vector<float>(rows.begin() + i * dim, rows.begin() + (i + 1) * dim)};
  return Corpus::from_records(fixtures::numbered_pages(n)).with_channel(make_channel(ChannelId::kDenseText, n, payloads, normalize));
}

std::vector<std::uint32_t> naive_top(const std::vector<float>& rows, std::size_t dim, const std::vector<float>& q,
                                     std::size_t k) {
  const std::size_t n = rows.size() / dim;
  std::vector<float> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = oracle::dot(&rows[i * dim], q.data(), dim);
  const auto order = oracle::ranking(s);
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < std::min(k, n); ++i) out.push_back(static_cast<std::uint32_t>(order[i]));
  return out;
}

std::vector<std::uint32_t> ordinals(const std::vector<ScoredDoc>& docs) {
  std::vector<std::uint32_t> out;
  for (const auto& d : docs) out.push_back(d.ordinal);
  return out;
}

struct GaussianSet {
  std::vector<float> rows;
  std::vector<std::vector<float>> queries;
};

GaussianSet gaussian_set(std::size_t n, std::size_t dim, std::size_t n_queries, std::uint64_t seed) {
  GaussianSource g(seed);
  GaussianSet s{fixtures::unit_rows(g, n, dim), {}};
  for (std::size_t q = 0; q < n_queries; ++q) s.queries.push_back(fixtures::unit_rows(g, 1, dim));
  return s;
}

double overlap_recall(const GraphIndex& graph, const DenseIndex& exact, const GaussianSet& s, std::size_t ef,
                      std::size_t k) {
  std::size_t found = 0;
  for (const auto& q : s.queries) {
    const auto truth = ordinals(exact.search(q, k));
    const auto got = ordinals(graph.search(q, SearchParams{ef, k}));
    const std::set<std::uint32_t> t(truth.begin(), truth.end());
    for (auto o : got) found += t.count(o);
  }
  return static_cast<double>(found) / static_cast<double>(k * s.queries.size());
}

}  // namespace

TEST(DenseExact, BuildsOverChannel) {
  const std::vector<float> rows{1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0};
  const auto corpus = dense_corpus(rows, 4, true);
  const auto index = build_exact(corpus, ChannelId::kDenseText);
  EXPECT_EQ(index.size(), 3u);
  EXPECT_EQ(index.dim(), 4u);
  EXPECT_EQ(index.memory_bytes(), 3u * 4u * 4u);
  EXPECT_DOCRET_ERROR(build_exact(corpus, ChannelId::kDenseImage), ErrorCode::kChannelNotFound);
}

TEST(DenseExact, StoredVectorRanksFirstWithScoreOne) {
  GaussianSource g(4);
  const auto rows = fixtures::unit_rows(g, 20, 8);
  const auto corpus = dense_corpus(rows, 8, true);
  const auto index = build_exact(corpus, ChannelId::kDenseText, Metric::kCosine);
  const std::vector<float> q(rows.begin() + 7 * 8, rows.begin() + 8 * 8);
  const auto list = exact_search(index, corpus, q, 3);
  EXPECT_EQ(list.hits[0].page_id, "p0007");
  EXPECT_NEAR(list.hits[0].score, 1.0, 1e-6);
  EXPECT_EQ(exact_search(index, corpus, q, 100).size(), 20u);
}

TEST(DenseExact, MatchesNaiveScan) {
  GaussianSource g(5);
  const std::size_t n = 100, d = 16;
  const auto rows = fixtures::gaussian(g, n * d);
  const auto corpus = dense_corpus(rows, d, false);
  const auto index = build_exact(corpus, ChannelId::kDenseText, Metric::kDot);
  for (int t = 0; t < 50; ++t) {
    const auto q = fixtures::gaussian(g, d);
    const auto got = index.search(q, n);
    EXPECT_EQ(ordinals(got), naive_top(rows, d, q, n));
    for (const auto& s : got) EXPECT_EQ(static_cast<float>(s.score), oracle::dot(&rows[s.ordinal * d], q.data(), d));
  }
}

TEST(DenseExact, DimMismatchAndTies) {
  const std::vector<float> rows{1, 0, 1, 0, 0, 1};
  const auto corpus = dense_corpus(rows, 2, false);
  const auto index = build_exact(corpus, ChannelId::kDenseText, Metric::kDot);
  EXPECT_DOCRET_ERROR(index.search(std::vector<float>{1, 0, 0}, 1), ErrorCode::kDimMismatch);
  const auto list = exact_search(index, corpus, std::vector<float>{1, 0}, 3);
  EXPECT_EQ(list.page_ids(), (std::vector<std::string>{"p0000", "p0001", "p0002"}));
}

TEST(DenseExact, SerialAndParallelAgree) {
  GaussianSource g(6);
  const auto rows = fixtures::gaussian(g, 500 * 24);
  const auto corpus = dense_corpus(rows, 24, false);
  const auto index = build_exact(corpus, ChannelId::kDenseText, Metric::kDot);
  const auto q = fixtures::gaussian(g, 24);
  EXPECT_EQ(index.search(q, 50, Exec::kSerial), index.search(q, 50, Exec::kParallel));
}

TEST(DenseExact, SaveLoadRoundTrip) {
  fixtures::TempDir dir;
  GaussianSource g(7);
  const auto rows = fixtures::gaussian(g, 30 * 6);
  const auto corpus = dense_corpus(rows, 6, false);
  const auto index = build_exact(corpus, ChannelId::kDenseText, Metric::kDot);
  index.save(dir / "dense.bin");
  const auto back = DenseIndex::load(dir / "dense.bin");
  EXPECT_EQ(back.ordinals(), index.ordinals());
  EXPECT_TRUE(std::equal(back.rows().begin(), back.rows().end(), index.rows().begin(), index.rows().end()));
  fixtures::write_text(dir / "junk.bin", "not an index");
  EXPECT_DOCRET_ERROR(DenseIndex::load(dir / "junk.bin"), ErrorCode::kIncompatibleStore);
}

TEST(SearchParams, EfMustCoverK) {
  EXPECT_DOCRET_ERROR((SearchParams{5, 10}.validate()), ErrorCode::kInvalidParams);
  EXPECT_DOCRET_ERROR((SearchParams{5, 0}.validate()), ErrorCode::kInvalidParams);
  EXPECT_NO_THROW((SearchParams{160, 20}.validate()));
  EXPECT_DOCRET_ERROR((GraphIndexParams{1, 128, 42}.validate()), ErrorCode::kInvalidParams);
}

TEST(Graph, NeighbourCountsBoundedPerLayer) {
  const auto s = gaussian_set(100, 16, 0, 8);
  const auto corpus = dense_corpus(s.rows, 16, true);
  const GraphIndexParams params{4, 32, 42};
  const auto graph = build_graph(corpus, ChannelId::kDenseText, Metric::kCosine, params);
  EXPECT_EQ(graph.size(), 100u);
  for (std::size_t node = 0; node < graph.size(); ++node) {
    for (int level = 0; level <= graph.level_of(node); ++level) {
      const auto nb = graph.neighbors(node, level);
      EXPECT_LE(nb.size(), params.max_links(level));
      if (level > 0) EXPECT_LE(nb.size(), params.M);
      const std::set<std::uint32_t> uniq(nb.begin(), nb.end());
      EXPECT_EQ(uniq.size(), nb.size());
      EXPECT_EQ(uniq.count(static_cast<std::uint32_t>(node)), 0u);
    }
  }
  EXPECT_DOCRET_ERROR(build_graph(corpus, ChannelId::kDenseImage, Metric::kCosine, params), ErrorCode::kChannelNotFound);
}

TEST(Graph, SingleVectorCorpus) {
  const auto corpus = dense_corpus({0.6f, 0.8f}, 2, true);
  const auto graph = build_graph(corpus, ChannelId::kDenseText, Metric::kCosine, GraphIndexParams{});
  const auto list = graph_search(graph, corpus, std::vector<float>{1, 0}, SearchParams{1, 1});
  ASSERT_EQ(list.size(), 1u);
  EXPECT_EQ(list.hits[0].page_id, "p0000");
}

TEST(Graph, FullEfEqualsExact) {
  const auto s = gaussian_set(300, 12, 30, 9);
  const auto corpus = dense_corpus(s.rows, 12, true);
  const auto graph = build_graph(corpus, ChannelId::kDenseText, Metric::kCosine, GraphIndexParams{});
  const auto& exact = graph.vectors();
  for (const auto& q : s.queries) {
    const auto a = graph.search(q, SearchParams{300, 10});
    const auto b = exact.search(q, 10);
    EXPECT_EQ(ordinals(a), ordinals(b));
  }
}

TEST(Graph, DeterministicForSeed) {
  const auto s = gaussian_set(400, 8, 10, 10);
  const auto corpus = dense_corpus(s.rows, 8, true);
  const auto a = build_graph(corpus, ChannelId::kDenseText, Metric::kCosine, GraphIndexParams{8, 64, 5});
  const auto b = build_graph(corpus, ChannelId::kDenseText, Metric::kCosine, GraphIndexParams{8, 64, 5});
  EXPECT_EQ(a.max_level(), b.max_level());
  for (std::size_t node = 0; node < a.size(); ++node) {
    ASSERT_EQ(a.level_of(node), b.level_of(node));
    for (int l = 0; l <= a.level_of(node); ++l) {
      const auto x = a.neighbors(node, l);
      const auto y = b.neighbors(node, l);
      EXPECT_TRUE(std::equal(x.begin(), x.end(), y.begin(), y.end()));
    }
  }
  for (const auto& q : s.queries) EXPECT_EQ(a.search(q, SearchParams{16, 5}), b.search(q, SearchParams{16, 5}));
}

TEST(Graph, SaveLoadRoundTrip) {
  fixtures::TempDir dir;
  const auto s = gaussian_set(200, 8, 10, 11);
  const auto corpus = dense_corpus(s.rows, 8, true);
  const auto graph = build_graph(corpus, ChannelId::kDenseText, Metric::kCosine, GraphIndexParams{});
  graph.save(dir / "graph.bin");
  const auto back = GraphIndex::load(dir / "graph.bin", std::make_shared<DenseIndex>(graph.vectors()));
  for (const auto& q : s.queries) EXPECT_EQ(back.search(q, SearchParams{20, 5}), graph.search(q, SearchParams{20, 5}));
}

TEST(Graph, RecallAtDefaultEfOnTenThousandVectors) {
  const auto s = gaussian_set(10000, 64, 200, 12);
  auto exact = std::make_shared<DenseIndex>(s.rows, 64, [] {
    std::vector<std::uint32_t> o(10000);
    for (std::uint32_t i = 0; i < o.size(); ++i) o[i] = i;
    return o;
  }(), Metric::kCosine);
  const auto graph = GraphIndex::build(exact, GraphIndexParams{});
  const double recall = overlap_recall(graph, *exact, s, 160, 10);
  RecordProperty("recall_at_10", std::to_string(recall));
  std::printf("recall@10 at ef=160: %.4f\n", recall);
  EXPECT_GE(recall, 0.95);
}

TEST(Graph, LargerEfNeverLosesTrueNeighbours) {
  const auto s = gaussian_set(3000, 32, 100, 13);
  std::vector<std::uint32_t> ords(3000);
  for (std::uint32_t i = 0; i < ords.size(); ++i) ords[i] = i;
  auto exact = std::make_shared<DenseIndex>(s.rows, 32, ords, Metric::kCosine);
  const auto graph = GraphIndex::build(exact, GraphIndexParams{8, 32, 42});
  double prev = 0.0;
  for (std::size_t ef : {10, 20, 40, 80, 160, 320}) {
    const double r = overlap_recall(graph, *exact, s, ef, 10);
    EXPECT_GE(r, prev) << "ef=" << ef;
    prev = r;
  }
}

TEST(Metric, NamesRoundTrip) {
  EXPECT_EQ(parse_metric("dot"), Metric::kDot);
  EXPECT_EQ(parse_metric(to_string(Metric::kCosine)), Metric::kCosine);
  EXPECT_DOCRET_ERROR(parse_metric("l2"), ErrorCode::kInvalidParams);
}
