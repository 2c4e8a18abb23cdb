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

#include <filesystem>

#include "docret/pipeline.hpp"
#include "expect_error.hpp"
#include "temp_store.hpp"

using namespace docret;

namespace {

const std::filesystem::path kToy = DOCRET_TOY_DIR;

struct Toy {
  Corpus corpus;
  QuerySet queries;
};

Toy load_toy() {
  auto corpus = ingest_corpus(kToy / "pages.jsonl");
  corpus = attach_embeddings(corpus, kToy / "emb_dense_text.jsonl", ChannelId::kDenseText);
  corpus = attach_embeddings(corpus, kToy / "emb_multivector_image.jsonl", ChannelId::kMultivectorImage);
  auto queries = ingest_queries(kToy / "queries.jsonl");
  queries = attach_query_embeddings(queries, kToy / "qemb_dense_text.jsonl", ChannelId::kDenseText);
  queries = attach_query_embeddings(queries, kToy / "qemb_multivector_image.jsonl", ChannelId::kMultivectorImage);
  queries.bind(corpus);
  return {corpus, queries};
}

RetrieverSpec spec_of(RetrieverKind kind) {
  RetrieverSpec s;
  s.kind = kind;
  return s;
}

}  // namespace

TEST(Engine, EveryRetrieverProducesWellFormedRuns) {
  const auto toy = load_toy();
  Engine engine(toy.corpus, toy.queries);
  for (auto kind : {RetrieverKind::kBm25, RetrieverKind::kDense, RetrieverKind::kMaxSim, RetrieverKind::kMuvera,
                    RetrieverKind::kHybrid, RetrieverKind::kMultimodal}) {
    const auto run = engine.run(std::string(to_string(kind)), spec_of(kind), 5);
    EXPECT_NO_THROW(check_run(run, toy.queries));
    EXPECT_EQ(run.corpus_checksum, toy.corpus.checksum());
    EXPECT_EQ(run.config["retriever"], to_string(kind));
    for (const auto& l : run.lists) {
      EXPECT_TRUE(is_well_formed(l));
      EXPECT_LE(l.size(), 5u);
    }
    const auto rep = evaluate(run, toy.queries, toy.corpus);
    EXPECT_GT(rep.at(20), 0.0) << to_string(kind);
  }
}

TEST(Engine, SerialAndParallelRunsAgree) {
  const auto toy = load_toy();
  Engine engine(toy.corpus, toy.queries);
  for (auto kind : {RetrieverKind::kBm25, RetrieverKind::kMuvera, RetrieverKind::kMultimodal}) {
    const auto a = engine.run("a", spec_of(kind), 12, Exec::kSerial);
    const auto b = engine.run("a", spec_of(kind), 12, Exec::kParallel);
    for (std::size_t q = 0; q < a.lists.size(); ++q) EXPECT_EQ(a.lists[q].hits, b.lists[q].hits);
  }
}

TEST(Engine, CompositeRetrieversMatchTheirParts) {
  const auto toy = load_toy();
  Engine engine(toy.corpus, toy.queries);
  const std::size_t n = toy.corpus.page_count();
  for (std::uint32_t q = 0; q < toy.queries.size(); ++q) {
    const auto in = engine.query(q);
    const auto bm25 = engine.search(spec_of(RetrieverKind::kBm25), in, 100).list;
    const auto dense = engine.search(spec_of(RetrieverKind::kDense), in, 100).list;
    const auto maxsim = engine.search(spec_of(RetrieverKind::kMaxSim), in, n).list;
    EXPECT_EQ(engine.search(spec_of(RetrieverKind::kMuvera), in, n).list.hits, maxsim.hits);

    const auto hybrid = engine.search(spec_of(RetrieverKind::kHybrid), in, n);
    const auto want = hybrid_text(bm25, dense, Strategy::kRsf);
    EXPECT_EQ(hybrid.list.page_ids(), want.list.page_ids());
    EXPECT_EQ(hybrid.inputs.size(), 2u);

    auto mm = spec_of(RetrieverKind::kMultimodal);
    mm.alpha = 0.0;
    EXPECT_EQ(engine.search(mm, in, n).list.page_ids(), hybrid.list.page_ids());
    mm.alpha = 1.0;
    EXPECT_EQ(engine.search(mm, in, n).list.page_ids(), maxsim.page_ids());
    mm.alpha = 0.5;
    const auto mid = engine.search(mm, in, n);
    ASSERT_EQ(mid.contributions.size(), mid.list.size());
    for (std::size_t i = 0; i < mid.list.size(); ++i) {
      double sum = 0.0;
      for (double c : mid.contributions[i]) sum += c;
      EXPECT_DOUBLE_EQ(sum, mid.list.hits[i].score);
    }

    auto graph = spec_of(RetrieverKind::kDense);
    graph.graph = true;
    EXPECT_EQ(engine.search(graph, in, n).list.page_ids(), engine.search(spec_of(RetrieverKind::kDense), in, n).list.page_ids());
  }
}

TEST(Engine, FreeTextQueries) {
  const auto toy = load_toy();
  Engine engine(toy.corpus, toy.queries);
  const auto out = engine.search(spec_of(RetrieverKind::kBm25), QueryInput{"colbert token maxsim", std::nullopt}, 3);
  ASSERT_FALSE(out.list.empty());
  EXPECT_EQ(out.list.hits[0].page_id.rfind("colbert", 0), 0u);
  EXPECT_DOCRET_ERROR(engine.search(spec_of(RetrieverKind::kDense), QueryInput{"x", std::nullopt}, 3),
                      ErrorCode::kInvalidParams);
}

TEST(Engine, MissingChannelIsReported) {
  const auto toy = load_toy();
  Engine engine(Corpus::from_records(toy.corpus.pages()), toy.queries);
  EXPECT_DOCRET_ERROR(engine.run("m", spec_of(RetrieverKind::kMaxSim), 5), ErrorCode::kChannelNotFound);
}

TEST(Engine, PersistedIndexesReloadAndDetectStaleData) {
  const auto toy = load_toy();
  fixtures::TempDir dir;
  auto spec = spec_of(RetrieverKind::kMultimodal);
  spec.image_retriever = RetrieverKind::kMuvera;
  spec.graph = true;
  RetrievalRun fresh;
  {
    Engine engine(toy.corpus, toy.queries, dir.path());
    engine.build_indexes(spec);
    fresh = engine.run("m", spec, 10);
  }
  EXPECT_TRUE(std::filesystem::exists(dir / "index.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "bm25.bin"));
  Engine reloaded(toy.corpus, toy.queries, dir.path());
  const auto again = reloaded.run("m", spec, 10);
  for (std::size_t q = 0; q < fresh.lists.size(); ++q) EXPECT_EQ(fresh.lists[q].hits, again.lists[q].hits);

  auto pages = toy.corpus.pages();
  pages[0].text += " changed";
  EXPECT_DOCRET_ERROR(Engine(Corpus::from_records(pages), toy.queries, dir.path()), ErrorCode::kIncompatibleStore);
  Engine no_dir(toy.corpus, toy.queries);
  EXPECT_DOCRET_ERROR(no_dir.build_indexes(spec), ErrorCode::kInvalidParams);
}

TEST(RetrieverSpec, JsonRoundTripAndValidation) {
  for (auto kind : {RetrieverKind::kBm25, RetrieverKind::kDense, RetrieverKind::kMaxSim, RetrieverKind::kMuvera,
                    RetrieverKind::kHybrid, RetrieverKind::kMultimodal}) {
    auto s = spec_of(kind);
    s.alpha = 0.3;
    s.strategy = Strategy::kRrf;
    s.fde.repetitions = 4;
    s.stage1 = Stage1::kGraph;
    const auto j = s.to_json();
    EXPECT_EQ(RetrieverSpec::from_json(j).to_json(), j);
  }
  EXPECT_EQ(RetrieverSpec::from_json(nlohmann::json::object()).kind, RetrieverKind::kBm25);
  EXPECT_DOCRET_ERROR(RetrieverSpec::from_json({{"retriever", "magic"}}), ErrorCode::kInvalidParams);
  EXPECT_DOCRET_ERROR(RetrieverSpec::from_json({{"retriever", "multimodal"}, {"alpha", 2.0}}), ErrorCode::kInvalidParams);
  EXPECT_DOCRET_ERROR(RetrieverSpec::from_json({{"text_channel", "multivector_image"}}), ErrorCode::kInvalidParams);
  EXPECT_DOCRET_ERROR(RetrieverSpec::from_json({{"ef", "many"}}), ErrorCode::kInvalidParams);
}
