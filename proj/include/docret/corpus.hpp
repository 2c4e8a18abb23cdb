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
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace docret {

struct PageRecord {
  std::string doc_id;
  std::string page_id;
  std::uint32_t page_index = 0;
  std::string text;  // may be empty
  std::optional<std::string> image_ref;

  bool operator==(const PageRecord&) const = default;
};

struct QueryRecord {
  std::string query_id;
  std::string question;
  std::string gold_page_id;
  std::string reference_answer;

  bool operator==(const QueryRecord&) const = default;
};

enum class ChannelId { kDenseText, kDenseImage, kMultivectorImage, kMultivectorText };
enum class ChannelKind { kDense, kMulti };

std::string_view to_string(ChannelId id);
ChannelId parse_channel_id(std::string_view name);
ChannelKind kind_of(ChannelId id);
/// Dense channels are cosine by default and get unit-normalised on attach;
/// multi-vector channels are kept as produced by the model.
bool normalizes_by_default(ChannelId id);

/// Row-major `count x dim` block of 32-bit floats.
struct VectorSetView {
  std::span<const float> data;
  std::size_t count = 0;
  std::size_t dim = 0;

  std::span<const float> row(std::size_t i) const { return data.subspan(i * dim, dim); }
};

VectorSetView make_view(std::span<const float> data, std::size_t dim);

/// Embeddings for one channel, stored contiguously in entry-ordinal order.
/// Entries without a payload have an empty range.
class EmbeddingChannel {
 public:
  EmbeddingChannel(ChannelId id, std::size_t dim, bool normalized, std::vector<float> data,
                   std::vector<std::uint64_t> offsets);

  ChannelId id() const { return id_; }
  ChannelKind kind() const { return kind_of(id_); }
  std::size_t dim() const { return dim_; }
  bool normalized() const { return normalized_; }

  std::size_t slots() const { return offsets_.size() - 1; }
  bool has(std::uint32_t ordinal) const { return offsets_[ordinal + 1] > offsets_[ordinal]; }
  std::size_t count(std::uint32_t ordinal) const {
    return static_cast<std::size_t>(offsets_[ordinal + 1] - offsets_[ordinal]);
  }
  VectorSetView vectors(std::uint32_t ordinal) const;
  /// First vector of the entry; the whole payload for dense channels.
  std::span<const float> vector(std::uint32_t ordinal) const;

  std::size_t present_entries() const;
  std::size_t total_vectors() const { return static_cast<std::size_t>(offsets_.back()); }
  std::uint64_t raw_bytes() const { return data_.size() * sizeof(float); }
  std::string checksum() const;

  std::span<const float> data() const { return data_; }
  std::span<const std::uint64_t> offsets() const { return offsets_; }

 private:
  ChannelId id_;
  std::size_t dim_;
  bool normalized_;
  std::vector<float> data_;
  std::vector<std::uint64_t> offsets_;
};

/// Raw storage of `pages x avg_vectors x dim` 32-bit floats.
std::uint64_t multivector_storage_bytes(std::uint64_t pages, double avg_vectors, std::uint64_t dim);

struct ChannelInfo {
  ChannelId id = ChannelId::kDenseText;
  std::size_t dim = 0;
  std::size_t entries = 0;
  std::size_t total_vectors = 0;
  bool normalized = false;
  std::uint64_t raw_bytes = 0;
  std::string checksum;

  bool operator==(const ChannelInfo&) const = default;
};

struct CorpusManifest {
  static constexpr int kFormatVersion = 1;

  int format_version = kFormatVersion;
  std::size_t page_count = 0;
  std::size_t doc_count = 0;
  std::size_t query_count = 0;
  std::string pages_checksum;
  std::string queries_checksum;
  std::vector<ChannelInfo> channels;
  std::vector<ChannelInfo> query_channels;

  nlohmann::ordered_json to_json() const;
  static CorpusManifest from_json(const nlohmann::json& j);

  bool operator==(const CorpusManifest&) const = default;
};

class ChannelMap {
 public:
  bool has(ChannelId id) const { return channels_.count(id) != 0; }
  const EmbeddingChannel& get(ChannelId id, std::string_view owner) const;
  void put(std::shared_ptr<const EmbeddingChannel> channel);
  std::vector<ChannelInfo> infos() const;
  const std::map<ChannelId, std::shared_ptr<const EmbeddingChannel>>& all() const { return channels_; }

 private:
  std::map<ChannelId, std::shared_ptr<const EmbeddingChannel>> channels_;
};

/// Immutable corpus handle. Pages are held in ascending page_id order and
/// addressed by ordinal; copies share storage.
class Corpus {
 public:
  Corpus();
  static Corpus from_records(std::vector<PageRecord> pages);

  std::size_t page_count() const;
  std::size_t doc_count() const;
  const std::vector<PageRecord>& pages() const;
  const PageRecord& page(std::uint32_t ordinal) const;
  std::optional<std::uint32_t> ordinal_of(const std::string& page_id) const;
  std::vector<std::string> texts() const;

  bool has_channel(ChannelId id) const { return channels_.has(id); }
  const EmbeddingChannel& channel(ChannelId id) const { return channels_.get(id, "corpus"); }
  const ChannelMap& channels() const { return channels_; }
  Corpus with_channel(std::shared_ptr<const EmbeddingChannel> channel) const;

  const std::string& checksum() const;

 private:
  struct Pages;
  std::shared_ptr<const Pages> pages_;
  ChannelMap channels_;
};

/// Queries ordered by query_id. Query-side embeddings live here, keyed by
/// the corpus channel they are scored against.
class QuerySet {
 public:
  QuerySet() = default;
  static QuerySet from_records(std::vector<QueryRecord> queries);

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::vector<QueryRecord>& records() const { return records_; }
  const QueryRecord& at(std::uint32_t ordinal) const { return records_.at(ordinal); }
  std::optional<std::uint32_t> ordinal_of(const std::string& query_id) const;

  bool has_channel(ChannelId id) const { return channels_.has(id); }
  const EmbeddingChannel& channel(ChannelId id) const { return channels_.get(id, "query set"); }
  const ChannelMap& channels() const { return channels_; }
  QuerySet with_channel(std::shared_ptr<const EmbeddingChannel> channel) const;

  /// Throws GoldNotFound when a gold page is absent from `corpus`.
  void bind(const Corpus& corpus) const;

  std::string checksum() const;

 private:
  std::vector<QueryRecord> records_;
  std::unordered_map<std::string, std::uint32_t> by_id_;
  ChannelMap channels_;
};

struct AttachOptions {
  std::optional<bool> normalize;  // defaults per channel
};

Corpus ingest_corpus(const std::filesystem::path& path);
QuerySet ingest_queries(const std::filesystem::path& path);

Corpus attach_embeddings(const Corpus& corpus, const std::filesystem::path& path, ChannelId id,
                         AttachOptions options = {});
/// Same wire format with `query_id` in place of `page_id`.
QuerySet attach_query_embeddings(const QuerySet& queries, const std::filesystem::path& path,
                                 ChannelId id, AttachOptions options = {});

/// In-memory variants used by ingestion and tests. `payloads` maps an id to
/// one vector (dense) or several (multi).
std::shared_ptr<const EmbeddingChannel> make_channel(
    ChannelId id, std::size_t slots,
    const std::map<std::uint32_t, std::vector<std::vector<float>>>& payloads, bool normalize);

CorpusManifest make_manifest(const Corpus& corpus, const QuerySet& queries);

struct Store {
  Corpus corpus;
  QuerySet queries;
  CorpusManifest manifest;
};

void persist(const Corpus& corpus, const QuerySet& queries, const std::filesystem::path& dir);
/// Throws IncompatibleStore for a missing/foreign manifest, a version
/// mismatch, or content that no longer matches the manifest checksums.
Store load(const std::filesystem::path& dir);

}  // namespace docret
