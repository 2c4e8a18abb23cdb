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

// Seeded synthetic corpora shared by unit and acceptance tests.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "docret/corpus.hpp"
#include "docret/rng.hpp"

namespace fixtures {

inline std::string pad_id(const char* prefix, std::size_t i, int width = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, i);
  return buf;
}

inline void normalize(float* v, std::size_t d) {
  double s = 0.0;
  for (std::size_t t = 0; t < d; ++t) s += static_cast<double>(v[t]) * v[t];
  const double n = std::sqrt(s);
  if (n == 0.0) return;
  for (std::size_t t = 0; t < d; ++t) v[t] = static_cast<float>(v[t] / n);
}

inline std::vector<float> gaussian(docret::GaussianSource& g, std::size_t n, double scale = 1.0) {
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(g.next() * scale);
  return v;
}

inline std::vector<float> unit_rows(docret::GaussianSource& g, std::size_t rows, std::size_t d) {
  auto v = gaussian(g, rows * d);
  for (std::size_t r = 0; r < rows; ++r) normalize(&v[r * d], d);
  return v;
}

/// Multi-vector corpus with documents grouped around a few topic centres.
/// Each query samples tokens of its gold document and perturbs them.
struct Clustered {
  std::size_t dim = 32;
  std::vector<std::vector<float>> docs;     // tokens x dim, row-major
  std::vector<std::vector<float>> queries;  // tokens x dim
  std::vector<std::size_t> doc_tokens;
  std::vector<std::size_t> query_tokens;
  std::vector<std::size_t> gold;            // doc index per query
};

inline Clustered make_clustered(std::size_t n_docs = 500, std::size_t tokens = 20, std::size_t clusters = 5,
                                std::size_t dim = 32, std::size_t n_queries = 100, std::size_t q_tokens = 8,
                                std::uint64_t seed = 7, double doc_spread_scale = 0.1, double query_noise = 1.0) {
  docret::GaussianSource g(seed);
  Clustered c;
  c.dim = dim;
  const auto centres = unit_rows(g, clusters, dim);
  const double doc_spread = doc_spread_scale / std::sqrt(static_cast<double>(dim));
  const double tok_spread = 0.8 / std::sqrt(static_cast<double>(dim));
  for (std::size_t i = 0; i < n_docs; ++i) {
    const std::size_t k = i % clusters;
    std::vector<float> centre(dim);
    for (std::size_t t = 0; t < dim; ++t) centre[t] = centres[k * dim + t] + static_cast<float>(g.next() * doc_spread);
    std::vector<float> doc(tokens * dim);
    for (std::size_t j = 0; j < tokens; ++j) {
      for (std::size_t t = 0; t < dim; ++t) doc[j * dim + t] = centre[t] + static_cast<float>(g.next() * tok_spread);
      normalize(&doc[j * dim], dim);
    }
    c.docs.push_back(std::move(doc));
    c.doc_tokens.push_back(tokens);
  }
  const double q_noise = query_noise / std::sqrt(static_cast<double>(dim));
  for (std::size_t q = 0; q < n_queries; ++q) {
    const std::size_t gd = static_cast<std::size_t>(g.uniform() * static_cast<double>(n_docs));
    std::vector<float> qv(q_tokens * dim);
    for (std::size_t j = 0; j < q_tokens; ++j) {
      const std::size_t src = static_cast<std::size_t>(g.uniform() * static_cast<double>(tokens));
      for (std::size_t t = 0; t < dim; ++t)
        qv[j * dim + t] = c.docs[gd][src * dim + t] + static_cast<float>(g.next() * q_noise);
      normalize(&qv[j * dim], dim);
    }
    c.queries.push_back(std::move(qv));
    c.query_tokens.push_back(q_tokens);
    c.gold.push_back(gd);
  }
  return c;
}

inline std::vector<std::vector<float>> split_rows(const std::vector<float>& flat, std::size_t dim) {
  std::vector<std::vector<float>> rows;
  for (std::size_t r = 0; r * dim < flat.size(); ++r) rows.emplace_back(flat.begin() + r * dim, flat.begin() + (r + 1) * dim);
  return rows;
}

inline std::vector<docret::PageRecord> numbered_pages(std::size_t n, std::size_t pages_per_doc = 1) {
  std::vector<docret::PageRecord> pages;
  for (std::size_t i = 0; i < n; ++i) {
    docret::PageRecord p;
    p.doc_id = pad_id("doc", i / pages_per_doc);
    p.page_id = pad_id("p", i);
    p.page_index = static_cast<std::uint32_t>(i % pages_per_doc);
    p.text = "page " + std::to_string(i);
    pages.push_back(p);
  }
  return pages;
}

/// Corpus whose page i (id p0000 + i, so ordinal i) carries docs[i] on the
/// multi-vector image channel.
inline docret::Corpus clustered_corpus(const Clustered& c) {
  auto corpus = docret::Corpus::from_records(numbered_pages(c.docs.size()));
  std::map<std::uint32_t, std::vector<std::vector<float>>> payloads;
  for (std::size_t i = 0; i < c.docs.size(); ++i) payloads[static_cast<std::uint32_t>(i)] = split_rows(c.docs[i], c.dim);
  return corpus.with_channel(
      docret::make_channel(docret::ChannelId::kMultivectorImage, c.docs.size(), payloads, false));
}

inline docret::QuerySet clustered_queries(const Clustered& c) {
  std::vector<docret::QueryRecord> recs;
  for (std::size_t q = 0; q < c.queries.size(); ++q)
    recs.push_back({pad_id("q", q), "query " + std::to_string(q), pad_id("p", c.gold[q]), "answer " + std::to_string(q)});
  auto qs = docret::QuerySet::from_records(recs);
  std::map<std::uint32_t, std::vector<std::vector<float>>> payloads;
  for (std::size_t q = 0; q < c.queries.size(); ++q) payloads[static_cast<std::uint32_t>(q)] = split_rows(c.queries[q], c.dim);
  return qs.with_channel(
      docret::make_channel(docret::ChannelId::kMultivectorImage, c.queries.size(), payloads, false));
}

/// Text corpus where page i alone contains the word "needle<i>" and every
/// query asks for one needle.
struct Planted {
  std::vector<docret::PageRecord> pages;
  std::vector<docret::QueryRecord> queries;
};

inline Planted make_planted(std::size_t n_pages = 40, std::size_t n_queries = 20, std::uint64_t seed = 11) {
  docret::GaussianSource g(seed);
  static const char* filler[] = {"report", "table", "figure", "method", "result", "model", "data", "score"};
  Planted p;
  for (std::size_t i = 0; i < n_pages; ++i) {
    std::string text;
    for (int w = 0; w < 12; ++w) text += std::string(filler[static_cast<std::size_t>(g.uniform() * 8)]) + " ";
    text += "needle" + std::to_string(i);
    p.pages.push_back({pad_id("doc", i / 4), pad_id("p", i), static_cast<std::uint32_t>(i % 4), text, std::nullopt});
  }
  for (std::size_t q = 0; q < n_queries; ++q) {
    const std::size_t gold = (q * 7 + 3) % n_pages;
    p.queries.push_back({pad_id("q", q), "which page has needle" + std::to_string(gold) + " in the table",
                         pad_id("p", gold), "answer " + std::to_string(gold)});
  }
  return p;
}

}  // namespace fixtures
