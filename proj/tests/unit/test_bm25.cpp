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
#include <cmath>
#include <map>

#include "docret/bm25.hpp"
#include "docret/rng.hpp"
#include "expect_error.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "temp_store.hpp"

using namespace docret;

TEST(Tokenize, SplitsOnNonAlphanumericAndLowercases) {
  EXPECT_EQ(tokenize("HyDE uses InstructGPT"), (std::vector<std::string>{"hyde", "uses", "instructgpt"}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_EQ(tokenize("nDCG@10 = 46.6"), (std::vector<std::string>{"ndcg", "10", "46", "6"}));
}

TEST(Tokenize, HandlesUnicodeLetters) {
  EXPECT_EQ(tokenize("Über-Straße café"), (std::vector<std::string>{"über", "straße", "café"}));
  EXPECT_EQ(tokenize("ΑΒΓ δ"), (std::vector<std::string>{"αβγ", "δ"}));
}

TEST(Bm25Index, TwoDocPostings) {
  const std::vector<std::string> docs{"a b", "b b"};
  const auto index = InvertedIndex::build(docs);
  EXPECT_EQ(index.doc_count(), 2u);
  EXPECT_DOUBLE_EQ(index.avg_doc_length(), 2.0);
  ASSERT_NE(index.postings("a"), nullptr);
  EXPECT_EQ(*index.postings("a"), (std::vector<Posting>{{0, 1}}));
  EXPECT_EQ(*index.postings("b"), (std::vector<Posting>{{0, 1}, {1, 2}}));
  EXPECT_EQ(index.postings("c"), nullptr);
}

TEST(Bm25Index, EmptyCorpusReturnsNothing) {
  const auto index = InvertedIndex::build(std::vector<std::string>{});
  EXPECT_EQ(index.doc_count(), 0u);
  EXPECT_TRUE(index.search("anything", Bm25Params{}, 10).empty());
}

TEST(Bm25Search, HigherTfRanksFirstAndMatchesOracle) {
  const std::vector<std::string> docs{"a b", "b b"};
  const auto index = InvertedIndex::build(docs);
  const auto hits = index.search("b", Bm25Params{}, 10);
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_EQ(hits[0].ordinal, 1u);
  const auto want = oracle::bm25_scores(docs, "b", 1.2, 0.75);
  EXPECT_NEAR(hits[0].score, want[1], 1e-12);
  EXPECT_NEAR(hits[1].score, want[0], 1e-12);
}

TEST(Bm25Search, NoMatchingTermsGivesEmptyList) {
  const auto index = InvertedIndex::build(std::vector<std::string>{"a b", "b b"});
  EXPECT_TRUE(index.search("zzz", Bm25Params{}, 10).empty());
}

TEST(Bm25Search, RepeatedQueryTermDoublesContribution) {
  const std::vector<std::string> docs{"a b", "b b", "c"};
  const auto index = InvertedIndex::build(docs);
  const auto once = index.search("b", Bm25Params{}, 10);
  const auto twice = index.search("b b", Bm25Params{}, 10);
  ASSERT_EQ(once.size(), twice.size());
  for (std::size_t i = 0; i < once.size(); ++i) {
    EXPECT_EQ(once[i].ordinal, twice[i].ordinal);
    EXPECT_NEAR(twice[i].score, 2.0 * once[i].score, 1e-12);
  }
  const auto want = oracle::bm25_scores(docs, "b b", 1.2, 0.75);
  EXPECT_NEAR(twice[0].score, want[twice[0].ordinal], 1e-12);
}

TEST(Bm25Search, TiesBreakByPageId) {
  Corpus corpus = Corpus::from_records({{"d", "pb", 0, "same words", std::nullopt},
                                        {"d", "pa", 1, "same words", std::nullopt},
                                        {"d", "pc", 2, "other", std::nullopt}});
  const auto index = InvertedIndex::build(corpus.texts());
  const auto list = bm25_search(index, corpus, "same", Bm25Params{}, 10);
  EXPECT_EQ(list.page_ids(), (std::vector<std::string>{"pa", "pb"}));
  EXPECT_EQ(list.retriever, "bm25");
  EXPECT_TRUE(is_well_formed(list));
}

TEST(Bm25Search, ZeroLengthDocumentsScoreZero) {
  const auto index = InvertedIndex::build(std::vector<std::string>{"", "x y", "!!"});
  const auto all = index.score_all("x y", Bm25Params{});
  for (const auto& [ord, s] : all) EXPECT_EQ(ord, 1u);
}

TEST(Bm25Search, PermutedCorpusGivesSameScoresPerPage) {
  const auto planted = fixtures::make_planted(30, 5);
  auto reversed = planted.pages;
  std::reverse(reversed.begin(), reversed.end());
  // from_records sorts pages, so build indexes directly over both text orders.
  std::vector<std::string> fwd, rev;
  for (const auto& p : planted.pages) fwd.push_back(p.text);
  for (const auto& p : reversed) rev.push_back(p.text);
  const auto a = InvertedIndex::build(fwd);
  const auto b = InvertedIndex::build(rev);
  const std::string q = "table needle4 model report";
  std::map<std::string, double> sa, sb;
  for (const auto& [ord, s] : a.score_all(q, Bm25Params{})) sa[planted.pages[ord].page_id] = s;
  for (const auto& [ord, s] : b.score_all(q, Bm25Params{})) sb[reversed[ord].page_id] = s;
  ASSERT_EQ(sa.size(), sb.size());
  for (const auto& [id, s] : sa) EXPECT_NEAR(s, sb.at(id), 1e-12) << id;
}

TEST(Bm25Search, ExtraOccurrenceAtFixedLengthNeverLowersScore) {
  GaussianSource g(3);
  static const char* vocab[] = {"w0", "w1", "w2", "w3", "w4", "w5"};
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::vector<std::string>> words(6);
    for (auto& d : words)
      for (int w = 0; w < 6; ++w) d.push_back(vocab[static_cast<int>(g.uniform() * 6)]);
    const std::string term = vocab[static_cast<int>(g.uniform() * 6)];
    auto& doc = words[0];
    const auto has = std::find(doc.begin(), doc.end(), term) != doc.end();
    const auto other = std::find_if(doc.begin(), doc.end(), [&](const std::string& w) { return w != term; });
    if (!has || other == doc.end()) continue;
    auto join = [&] {
      std::vector<std::string> texts;
      for (const auto& d : words) {
        std::string t;
        for (const auto& w : d) t += w + " ";
        texts.push_back(t);
      }
      return texts;
    };
    auto score0 = [&](const std::vector<std::string>& texts) {
      double s = 0.0;
      for (const auto& [o, v] : InvertedIndex::build(texts).score_all(term, Bm25Params{}))
        if (o == 0) s = v;
      return s;
    };
    const auto before_texts = join();
    const double before = score0(before_texts);
    *other = term;  // same length, same df
    const auto after_texts = join();
    const double after = score0(after_texts);
    EXPECT_GT(after, before);
    EXPECT_NEAR(after, oracle::bm25_scores(after_texts, term, 1.2, 0.75)[0], 1e-9);
    ++checked;
  }
  EXPECT_GT(checked, 20);
}

TEST(Bm25Index, SerialAndParallelBuildsAreIdentical) {
  const auto planted = fixtures::make_planted(200, 1);
  std::vector<std::string> texts;
  for (const auto& p : planted.pages) texts.push_back(p.text);
  const auto a = InvertedIndex::build(texts, Exec::kSerial);
  const auto b = InvertedIndex::build(texts, Exec::kParallel);
  EXPECT_TRUE(a == b);
  const auto ha = a.search("figure needle17 data", Bm25Params{}, 50);
  const auto hb = b.search("figure needle17 data", Bm25Params{}, 50);
  EXPECT_EQ(ha, hb);
}

TEST(Bm25Index, SaveLoadRoundTrip) {
  fixtures::TempDir dir;
  const auto index = InvertedIndex::build(std::vector<std::string>{"one two", "two three three", ""});
  index.save(dir / "bm25.bin");
  EXPECT_TRUE(InvertedIndex::load(dir / "bm25.bin") == index);
}

TEST(Bm25Params, Validation) {
  EXPECT_DOCRET_ERROR((Bm25Params{0.0, 0.75}.validate()), ErrorCode::kInvalidParams);
  EXPECT_DOCRET_ERROR((Bm25Params{1.2, 1.5}.validate()), ErrorCode::kInvalidParams);
  EXPECT_NO_THROW((Bm25Params{1.2, 0.0}.validate()));
}
