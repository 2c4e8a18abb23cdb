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
#include <cstring>

#include "docret/corpus.hpp"
#include "expect_error.hpp"
#include "fixtures.hpp"
#include "temp_store.hpp"

using namespace docret;
using fixtures::TempDir;
using fixtures::write_text;

namespace {

const char* kThreePages =
    R"({"doc_id": "d1", "page_id": "p3", "page_index": 1, "text": "gamma"}
{"doc_id": "d1", "page_id": "p1", "page_index": 0, "text": "alpha", "image_ref": "img/p1.png"}
{"doc_id": "d2", "page_id": "p2", "page_index": 0, "text": ""}
)";

const char* kTwoQueries =
    R"({"query_id": "q2", "question": "b?", "gold_page_id": "p2", "reference_answer": "B"}
{"query_id": "q1", "question": "a?", "gold_page_id": "p1", "reference_answer": "A"}
)";

Corpus three_pages(const TempDir& dir) {
  write_text(dir / "pages.jsonl", kThreePages);
  return ingest_corpus(dir / "pages.jsonl");
}

}  // namespace

TEST(Corpus, IngestCountsAndOrdersByPageId) {
  TempDir dir;
  const auto c = three_pages(dir);
  EXPECT_EQ(c.page_count(), 3u);
  EXPECT_EQ(c.doc_count(), 2u);
  EXPECT_EQ(c.page(0).page_id, "p1");
  EXPECT_EQ(c.page(2).page_id, "p3");
  EXPECT_EQ(c.page(0).image_ref, std::optional<std::string>("img/p1.png"));
  EXPECT_EQ(c.page(1).text, "");
  EXPECT_EQ(c.ordinal_of("p3"), std::optional<std::uint32_t>(2));
  EXPECT_FALSE(c.ordinal_of("nope").has_value());
}

TEST(Corpus, DuplicatePageIdIsRejected) {
  TempDir dir;
  write_text(dir / "pages.jsonl", R"({"doc_id": "a", "page_id": "p7", "page_index": 0, "text": "x"}
{"doc_id": "b", "page_id": "p7", "page_index": 0, "text": "y"}
)");
  EXPECT_DOCRET_ERROR(ingest_corpus(dir / "pages.jsonl"), ErrorCode::kDuplicateId);
}

TEST(Corpus, DuplicateDocPageIndexIsRejected) {
  std::vector<PageRecord> pages{{"d", "p1", 0, "", std::nullopt}, {"d", "p2", 0, "", std::nullopt}};
  EXPECT_DOCRET_ERROR(Corpus::from_records(pages), ErrorCode::kDuplicateId);
}

TEST(Corpus, MalformedLineReportsLineNumber) {
  TempDir dir;
  write_text(dir / "pages.jsonl", R"({"doc_id": "a", "page_id": "p1", "page_index": 0, "text": "x"}
{"doc_id": "a", "page_id":
)");
  try {
    ingest_corpus(dir / "pages.jsonl");
    FAIL() << "expected ParseError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParseError);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Queries, OrderedByQueryId) {
  TempDir dir;
  write_text(dir / "queries.jsonl", kTwoQueries);
  const auto q = ingest_queries(dir / "queries.jsonl");
  ASSERT_EQ(q.size(), 2u);
  EXPECT_EQ(q.at(0).query_id, "q1");
  EXPECT_EQ(q.at(1).reference_answer, "B");
}

TEST(Queries, MissingGoldFieldIsParseError) {
  TempDir dir;
  write_text(dir / "queries.jsonl", R"({"query_id": "q1", "question": "a?", "reference_answer": "A"})");
  EXPECT_DOCRET_ERROR(ingest_queries(dir / "queries.jsonl"), ErrorCode::kParseError);
}

TEST(Queries, UnknownGoldFailsAtBindTime) {
  TempDir dir;
  const auto c = three_pages(dir);
  const auto q = QuerySet::from_records({{"q1", "?", "p9", "a"}});
  EXPECT_DOCRET_ERROR(q.bind(c), ErrorCode::kGoldNotFound);
}

TEST(Embeddings, DenseChannelIsAttachedAndNormalised) {
  TempDir dir;
  const auto c = three_pages(dir);
  write_text(dir / "emb.jsonl", R"({"page_id": "p1", "vector": [3, 0, 0, 4]}
{"page_id": "p2", "vector": [0, 1, 0, 0]}
{"page_id": "p3", "vector": [1, 1, 1, 1]}
)");
  const auto with = attach_embeddings(c, dir / "emb.jsonl", ChannelId::kDenseText);
  const auto& ch = with.channel(ChannelId::kDenseText);
  EXPECT_EQ(ch.dim(), 4u);
  EXPECT_TRUE(ch.normalized());
  EXPECT_FLOAT_EQ(ch.vector(0)[0], 0.6f);
  EXPECT_FLOAT_EQ(ch.vector(0)[3], 0.8f);
  EXPECT_FALSE(c.has_channel(ChannelId::kDenseText));
}

TEST(Embeddings, DimMismatchIsRejected) {
  TempDir dir;
  const auto c = three_pages(dir);
  write_text(dir / "emb.jsonl", R"({"page_id": "p1", "vector": [1, 0, 0, 0]}
{"page_id": "p2", "vector": [1, 0, 0, 0, 0]}
)");
  EXPECT_DOCRET_ERROR(attach_embeddings(c, dir / "emb.jsonl", ChannelId::kDenseText), ErrorCode::kDimMismatch);
}

TEST(Embeddings, UnknownPageIsRejected) {
  TempDir dir;
  const auto c = three_pages(dir);
  write_text(dir / "emb.jsonl", R"({"page_id": "p9", "vector": [1, 0]})");
  EXPECT_DOCRET_ERROR(attach_embeddings(c, dir / "emb.jsonl", ChannelId::kDenseText), ErrorCode::kUnknownPage);
}

TEST(Embeddings, EmptyMultiVectorSetIsRejected) {
  TempDir dir;
  const auto c = three_pages(dir);
  write_text(dir / "emb.jsonl", R"({"page_id": "p1", "vectors": []})");
  EXPECT_DOCRET_ERROR(attach_embeddings(c, dir / "emb.jsonl", ChannelId::kMultivectorImage), ErrorCode::kEmptySet);
}

TEST(Embeddings, MultiVectorsKeptAsGiven) {
  TempDir dir;
  const auto c = three_pages(dir);
  write_text(dir / "emb.jsonl", R"({"page_id": "p2", "vectors": [[2, 0], [0, 3], [1, 1]]})");
  const auto with = attach_embeddings(c, dir / "emb.jsonl", ChannelId::kMultivectorImage);
  const auto& ch = with.channel(ChannelId::kMultivectorImage);
  EXPECT_FALSE(ch.has(0));
  EXPECT_EQ(ch.count(1), 3u);
  EXPECT_EQ(ch.total_vectors(), 3u);
  EXPECT_FLOAT_EQ(ch.vectors(1).row(1)[1], 3.0f);
  EXPECT_EQ(ch.present_entries(), 1u);
}

TEST(Embeddings, StorageEstimateMatchesPageScaleArithmetic) {
  EXPECT_EQ(multivector_storage_bytes(3230, 1000, 128), 1'653'760'000u);
  EXPECT_EQ(multivector_storage_bytes(1, 1, 1), 4u);
}

TEST(Embeddings, QueryEmbeddingsKeyedByQueryId) {
  TempDir dir;
  write_text(dir / "queries.jsonl", kTwoQueries);
  const auto q = ingest_queries(dir / "queries.jsonl");
  write_text(dir / "qemb.jsonl", R"({"query_id": "q2", "vector": [0, 2]})");
  const auto with = attach_query_embeddings(q, dir / "qemb.jsonl", ChannelId::kDenseText);
  EXPECT_FALSE(with.channel(ChannelId::kDenseText).has(0));
  EXPECT_FLOAT_EQ(with.channel(ChannelId::kDenseText).vector(1)[1], 1.0f);
}

TEST(Store, RoundTripKeepsManifestAndVectors) {
  TempDir dir;
  auto c = three_pages(dir);
  write_text(dir / "queries.jsonl", kTwoQueries);
  const auto q = ingest_queries(dir / "queries.jsonl");
  write_text(dir / "dense.jsonl", R"({"page_id": "p1", "vector": [1, 2]}
{"page_id": "p3", "vector": [0.5, -1]}
)");
  write_text(dir / "multi.jsonl", R"({"page_id": "p1", "vectors": [[1, 2, 3]]}
{"page_id": "p2", "vectors": [[0.1, 0.2, 0.3], [4, 5, 6]]}
)");
  c = attach_embeddings(c, dir / "dense.jsonl", ChannelId::kDenseText);
  c = attach_embeddings(c, dir / "multi.jsonl", ChannelId::kMultivectorImage);
  persist(c, q, dir / "store");
  const auto store = load(dir / "store");
  EXPECT_EQ(store.manifest, make_manifest(c, q));
  EXPECT_EQ(store.corpus.pages(), c.pages());
  EXPECT_EQ(store.queries.records(), q.records());
  for (auto id : {ChannelId::kDenseText, ChannelId::kMultivectorImage}) {
    const auto& a = c.channel(id);
    const auto& b = store.corpus.channel(id);
    ASSERT_EQ(a.data().size(), b.data().size());
    EXPECT_EQ(0, std::memcmp(a.data().data(), b.data().data(), a.data().size_bytes()));
    EXPECT_TRUE(std::equal(a.offsets().begin(), a.offsets().end(), b.offsets().begin(), b.offsets().end()));
  }
}

TEST(Store, EmptyDirectoryIsIncompatible) {
  TempDir dir;
  EXPECT_DOCRET_ERROR(load(dir.path()), ErrorCode::kIncompatibleStore);
}

TEST(Store, VersionMismatchIsIncompatible) {
  TempDir dir;
  const auto c = three_pages(dir);
  persist(c, QuerySet{}, dir / "store");
  auto j = nlohmann::json::parse(fixtures::read_text(dir / "store" / "manifest.json"));
  j["format_version"] = 99;
  write_text(dir / "store" / "manifest.json", j.dump());
  EXPECT_DOCRET_ERROR(load(dir / "store"), ErrorCode::kIncompatibleStore);
}

TEST(Store, TamperedContentIsIncompatible) {
  TempDir dir;
  const auto c = three_pages(dir);
  persist(c, QuerySet{}, dir / "store");
  auto text = fixtures::read_text(dir / "store" / "pages.jsonl");
  text.replace(text.find("alpha"), 5, "ALPHA");
  write_text(dir / "store" / "pages.jsonl", text);
  EXPECT_DOCRET_ERROR(load(dir / "store"), ErrorCode::kIncompatibleStore);
}

TEST(Store, ChecksumIgnoresInputLineOrder) {
  TempDir a, b;
  write_text(a / "pages.jsonl", kThreePages);
  std::string reversed = R"({"doc_id": "d2", "page_id": "p2", "page_index": 0, "text": ""}
{"doc_id": "d1", "page_id": "p1", "page_index": 0, "text": "alpha", "image_ref": "img/p1.png"}
{"doc_id": "d1", "page_id": "p3", "page_index": 1, "text": "gamma"}
)";
  write_text(b / "pages.jsonl", reversed);
  EXPECT_EQ(ingest_corpus(a / "pages.jsonl").checksum(), ingest_corpus(b / "pages.jsonl").checksum());
}

TEST(Channels, NamesRoundTrip) {
  for (auto id : {ChannelId::kDenseText, ChannelId::kDenseImage, ChannelId::kMultivectorImage, ChannelId::kMultivectorText}) {
    EXPECT_EQ(parse_channel_id(to_string(id)), id);
  }
  EXPECT_DOCRET_ERROR(parse_channel_id("bogus"), ErrorCode::kInvalidParams);
  EXPECT_DOCRET_ERROR(Corpus().channel(ChannelId::kDenseImage), ErrorCode::kChannelNotFound);
}
