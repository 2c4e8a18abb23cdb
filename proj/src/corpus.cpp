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

#include "docret/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "docret/checksum.hpp"
#include "docret/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace docret {

namespace {

constexpr char kChannelMagic[8] = {'D', 'R', 'C', 'H', '0', '0', '0', '1'};

void for_each_jsonl(const fs::path& path, const std::function<void(const json&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kParseError,
                  path.filename().string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!record.is_object()) {
      throw Error(ErrorCode::kParseError,
                  path.filename().string() + " line " + std::to_string(line_no) + ": not an object");
    }
    fn(record, line_no);
  }
}

std::string require_string(const json& record, const char* field, std::size_t line_no) {
  auto it = record.find(field);
  if (it == record.end() || !it->is_string()) {
    throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) + ": missing string field '" +
                                            field + "'");
  }
  return it->get<std::string>();
}

std::vector<float> parse_vector(const json& arr, std::size_t line_no) {
  if (!arr.is_array()) {
    throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) + ": vector is not an array");
  }
  std::vector<float> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_number()) {
      throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) + ": non-numeric component");
    }
    out.push_back(static_cast<float>(v.get<double>()));
  }
  return out;
}

void normalize_in_place(std::span<float> v) {
  double norm = 0.0;
  for (float x : v) norm += static_cast<double>(x) * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) return;
  for (float& x : v) x = static_cast<float>(x / norm);
}

void hash_string(Sha256& h, const std::string& s) {
  h.update_u64(s.size());
  h.update(s);
}

using Payloads = std::map<std::uint32_t, std::vector<std::vector<float>>>;

Payloads read_embedding_file(const fs::path& path, ChannelId id, const char* key_field,
                             const std::function<std::optional<std::uint32_t>(const std::string&)>& resolve) {
  const bool multi = kind_of(id) == ChannelKind::kMulti;
  Payloads payloads;
  std::optional<std::size_t> dim;
  for_each_jsonl(path, [&](const json& record, std::size_t line_no) {
    const std::string key = require_string(record, key_field, line_no);
    const auto ordinal = resolve(key);
    if (!ordinal) {
      throw Error(ErrorCode::kUnknownPage, "line " + std::to_string(line_no) + ": '" + key +
                                               "' is not in the " +
                                               (std::string(key_field) == "page_id" ? "corpus" : "query set"));
    }
    std::vector<std::vector<float>> vectors;
    if (multi) {
      auto it = record.find("vectors");
      if (it == record.end() || !it->is_array()) {
        throw Error(ErrorCode::kParseError,
                    "line " + std::to_string(line_no) + ": multi-vector record needs 'vectors'");
      }
      for (const auto& row : *it) vectors.push_back(parse_vector(row, line_no));
      if (vectors.empty()) {
        throw Error(ErrorCode::kEmptySet, "line " + std::to_string(line_no) + ": empty vector set for '" + key + "'");
      }
    } else {
      auto it = record.find("vector");
      if (it == record.end()) {
        throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) + ": dense record needs 'vector'");
      }
      vectors.push_back(parse_vector(*it, line_no));
    }
    for (const auto& v : vectors) {
      if (v.empty()) throw Error(ErrorCode::kDimMismatch, "line " + std::to_string(line_no) + ": zero-length vector");
      if (!dim) dim = v.size();
      if (v.size() != *dim) {
        throw Error(ErrorCode::kDimMismatch, "line " + std::to_string(line_no) + ": dim " +
                                                 std::to_string(v.size()) + " in a dim-" +
                                                 std::to_string(*dim) + " channel");
      }
    }
    if (!payloads.emplace(*ordinal, std::move(vectors)).second) {
      throw Error(ErrorCode::kDuplicateId, "line " + std::to_string(line_no) + ": '" + key + "' embedded twice");
    }
  });
  return payloads;
}

void write_channel(const EmbeddingChannel& ch, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  auto put_u64 = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); };
  out.write(kChannelMagic, sizeof kChannelMagic);
  const std::string name(to_string(ch.id()));
  put_u64(name.size());
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  put_u64(ch.dim());
  put_u64(ch.normalized() ? 1 : 0);
  put_u64(ch.slots());
  out.write(reinterpret_cast<const char*>(ch.offsets().data()),
            static_cast<std::streamsize>(ch.offsets().size_bytes()));
  out.write(reinterpret_cast<const char*>(ch.data().data()),
            static_cast<std::streamsize>(ch.data().size_bytes()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

std::shared_ptr<const EmbeddingChannel> read_channel(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIncompatibleStore, "missing channel file " + path.string());
  auto fail = [&]() -> Error { return Error(ErrorCode::kIncompatibleStore, "corrupt channel file " + path.string()); };
  auto get_u64 = [&]() {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw fail();
    return v;
  };
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || !std::equal(magic, magic + 8, kChannelMagic)) throw fail();
  const auto name_len = get_u64();
  if (name_len > 64) throw fail();
  std::string name(name_len, '\0');
  in.read(name.data(), static_cast<std::streamsize>(name_len));
  const auto dim = get_u64();
  const bool normalized = get_u64() != 0;
  const auto slots = get_u64();
  std::vector<std::uint64_t> offsets(slots + 1);
  in.read(reinterpret_cast<char*>(offsets.data()), static_cast<std::streamsize>(offsets.size() * 8));
  if (!in) throw fail();
  std::vector<float> data(offsets.back() * dim);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(float)));
  if (!in) throw fail();
  return std::make_shared<EmbeddingChannel>(parse_channel_id(name), dim, normalized, std::move(data),
                                            std::move(offsets));
}

nlohmann::ordered_json channel_info_json(const ChannelInfo& c) {
  nlohmann::ordered_json j;
  j["id"] = std::string(to_string(c.id));
  j["kind"] = kind_of(c.id) == ChannelKind::kDense ? "dense" : "multi";
  j["dim"] = c.dim;
  j["entries"] = c.entries;
  j["total_vectors"] = c.total_vectors;
  j["normalized"] = c.normalized;
  j["raw_bytes"] = c.raw_bytes;
  j["checksum"] = c.checksum;
  return j;
}

ChannelInfo channel_info_from_json(const json& j) {
  ChannelInfo c;
  c.id = parse_channel_id(j.at("id").get<std::string>());
  c.dim = j.at("dim").get<std::size_t>();
  c.entries = j.at("entries").get<std::size_t>();
  c.total_vectors = j.at("total_vectors").get<std::size_t>();
  c.normalized = j.at("normalized").get<bool>();
  c.raw_bytes = j.at("raw_bytes").get<std::uint64_t>();
  c.checksum = j.at("checksum").get<std::string>();
  return c;
}

}  // namespace

// ---------------------------------------------------------------------------
// Channel ids

std::string_view to_string(ChannelId id) {
  switch (id) {
    case ChannelId::kDenseText: return "dense_text";
    case ChannelId::kDenseImage: return "dense_image";
    case ChannelId::kMultivectorImage: return "multivector_image";
    case ChannelId::kMultivectorText: return "multivector_text";
  }
  return "unknown";
}

ChannelId parse_channel_id(std::string_view name) {
  for (auto id : {ChannelId::kDenseText, ChannelId::kDenseImage, ChannelId::kMultivectorImage,
                  ChannelId::kMultivectorText}) {
    if (name == to_string(id)) return id;
  }
  if (name == "sparse_text") {
    throw Error(ErrorCode::kInvalidParams, "sparse_text is built from page text, not attached");
  }
  throw Error(ErrorCode::kInvalidParams, "unknown channel '" + std::string(name) + "'");
}

ChannelKind kind_of(ChannelId id) {
  return (id == ChannelId::kDenseText || id == ChannelId::kDenseImage) ? ChannelKind::kDense
                                                                        : ChannelKind::kMulti;
}

bool normalizes_by_default(ChannelId id) { return kind_of(id) == ChannelKind::kDense; }

VectorSetView make_view(std::span<const float> data, std::size_t dim) {
  if (dim == 0 || data.size() % dim != 0) {
    throw Error(ErrorCode::kDimMismatch, "buffer of " + std::to_string(data.size()) +
                                             " floats is not a whole number of dim-" + std::to_string(dim) +
                                             " vectors");
  }
  return VectorSetView{data, data.size() / dim, dim};
}

// ---------------------------------------------------------------------------
// EmbeddingChannel

EmbeddingChannel::EmbeddingChannel(ChannelId id, std::size_t dim, bool normalized, std::vector<float> data,
                                   std::vector<std::uint64_t> offsets)
    : id_(id), dim_(dim), normalized_(normalized), data_(std::move(data)), offsets_(std::move(offsets)) {
  if (offsets_.empty()) offsets_.push_back(0);
  if (data_.size() != offsets_.back() * dim_) {
    throw Error(ErrorCode::kDimMismatch, "channel payload does not match its offsets");
  }
}

VectorSetView EmbeddingChannel::vectors(std::uint32_t ordinal) const {
  const auto begin = offsets_[ordinal] * dim_;
  const auto n = count(ordinal);
  return VectorSetView{std::span<const float>(data_).subspan(begin, n * dim_), n, dim_};
}

std::span<const float> EmbeddingChannel::vector(std::uint32_t ordinal) const {
  return std::span<const float>(data_).subspan(offsets_[ordinal] * dim_, dim_);
}

std::size_t EmbeddingChannel::present_entries() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < slots(); ++i) n += offsets_[i + 1] > offsets_[i] ? 1 : 0;
  return n;
}

std::string EmbeddingChannel::checksum() const {
  Sha256 h;
  h.update(to_string(id_));
  h.update_u64(dim_);
  h.update_u64(normalized_ ? 1 : 0);
  h.update_u64(slots());
  for (auto o : offsets_) h.update_u64(o);
  h.update(std::span<const float>(data_));
  return h.hex_digest();
}

std::uint64_t multivector_storage_bytes(std::uint64_t pages, double avg_vectors, std::uint64_t dim) {
  return static_cast<std::uint64_t>(std::llround(static_cast<double>(pages) * avg_vectors *
                                                 static_cast<double>(dim) * sizeof(float)));
}

std::shared_ptr<const EmbeddingChannel> make_channel(ChannelId id, std::size_t slots, const Payloads& payloads,
                                                     bool normalize) {
  std::size_t dim = 0;
  for (const auto& [ordinal, vectors] : payloads) {
    if (ordinal >= slots) throw Error(ErrorCode::kUnknownPage, "ordinal out of range");
    if (vectors.empty()) throw Error(ErrorCode::kEmptySet, "empty vector set");
    if (kind_of(id) == ChannelKind::kDense && vectors.size() != 1) {
      throw Error(ErrorCode::kInvalidParams, "dense channel entries hold exactly one vector");
    }
    for (const auto& v : vectors) {
      if (dim == 0) dim = v.size();
      if (v.size() != dim || dim == 0) throw Error(ErrorCode::kDimMismatch, "non-uniform channel dim");
    }
  }
  std::vector<std::uint64_t> offsets(slots + 1, 0);
  std::vector<float> data;
  std::uint64_t cursor = 0;
  auto it = payloads.begin();
  for (std::size_t s = 0; s < slots; ++s) {
    offsets[s] = cursor;
    if (it != payloads.end() && it->first == s) {
      for (const auto& v : it->second) {
        const auto start = data.size();
        data.insert(data.end(), v.begin(), v.end());
        if (normalize) normalize_in_place(std::span<float>(data).subspan(start, dim));
        ++cursor;
      }
      ++it;
    }
  }
  offsets[slots] = cursor;
  return std::make_shared<EmbeddingChannel>(id, dim, normalize, std::move(data), std::move(offsets));
}

// ---------------------------------------------------------------------------
// ChannelMap

const EmbeddingChannel& ChannelMap::get(ChannelId id, std::string_view owner) const {
  auto it = channels_.find(id);
  if (it == channels_.end()) {
    throw Error(ErrorCode::kChannelNotFound, "channel '" + std::string(to_string(id)) + "' is not attached to the " +
                                                 std::string(owner) + "; attach it with `docret ingest --emb " +
                                                 std::string(to_string(id)) + "=<file>`");
  }
  return *it->second;
}

void ChannelMap::put(std::shared_ptr<const EmbeddingChannel> channel) {
  channels_[channel->id()] = std::move(channel);
}

std::vector<ChannelInfo> ChannelMap::infos() const {
  std::vector<ChannelInfo> out;
  for (const auto& [id, ch] : channels_) {
    out.push_back(ChannelInfo{id, ch->dim(), ch->present_entries(), ch->total_vectors(), ch->normalized(),
                              ch->raw_bytes(), ch->checksum()});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Corpus

struct Corpus::Pages {
  std::vector<PageRecord> records;
  std::unordered_map<std::string, std::uint32_t> by_id;
  std::size_t doc_count = 0;
  std::string checksum;
};

Corpus::Corpus() : pages_(std::make_shared<Pages>()) {
  auto p = std::const_pointer_cast<Pages>(pages_);
  p->checksum = Sha256().update_u64(0).hex_digest();
}

Corpus Corpus::from_records(std::vector<PageRecord> pages) {
  std::sort(pages.begin(), pages.end(),
            [](const PageRecord& a, const PageRecord& b) { return a.page_id < b.page_id; });
  auto p = std::make_shared<Pages>();
  std::set<std::pair<std::string, std::uint32_t>> doc_pages;
  std::set<std::string> docs;
  for (std::size_t i = 0; i < pages.size(); ++i) {
    const auto& page = pages[i];
    if (i > 0 && pages[i - 1].page_id == page.page_id) {
      throw Error(ErrorCode::kDuplicateId, "page_id '" + page.page_id + "' appears more than once");
    }
    if (!doc_pages.emplace(page.doc_id, page.page_index).second) {
      throw Error(ErrorCode::kDuplicateId, "(doc_id '" + page.doc_id + "', page_index " +
                                               std::to_string(page.page_index) + ") appears more than once");
    }
    docs.insert(page.doc_id);
    p->by_id.emplace(page.page_id, static_cast<std::uint32_t>(i));
  }
  Sha256 h;
  h.update_u64(pages.size());
  for (const auto& page : pages) {
    hash_string(h, page.page_id);
    hash_string(h, page.doc_id);
    h.update_u64(page.page_index);
    hash_string(h, page.text);
    h.update_u64(page.image_ref ? 1 : 0);
    if (page.image_ref) hash_string(h, *page.image_ref);
  }
  p->checksum = h.hex_digest();
  p->doc_count = docs.size();
  p->records = std::move(pages);
  Corpus c;
  c.pages_ = std::move(p);
  return c;
}

std::size_t Corpus::page_count() const { return pages_->records.size(); }
std::size_t Corpus::doc_count() const { return pages_->doc_count; }
const std::vector<PageRecord>& Corpus::pages() const { return pages_->records; }
const PageRecord& Corpus::page(std::uint32_t ordinal) const { return pages_->records.at(ordinal); }
const std::string& Corpus::checksum() const { return pages_->checksum; }

std::optional<std::uint32_t> Corpus::ordinal_of(const std::string& page_id) const {
  auto it = pages_->by_id.find(page_id);
  if (it == pages_->by_id.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> Corpus::texts() const {
  std::vector<std::string> out;
  out.reserve(page_count());
  for (const auto& p : pages()) out.push_back(p.text);
  return out;
}

Corpus Corpus::with_channel(std::shared_ptr<const EmbeddingChannel> channel) const {
  if (channel->slots() != page_count()) {
    throw Error(ErrorCode::kUnknownPage, "channel does not cover this corpus");
  }
  Corpus c = *this;
  c.channels_.put(std::move(channel));
  return c;
}

// ---------------------------------------------------------------------------
// QuerySet

QuerySet QuerySet::from_records(std::vector<QueryRecord> queries) {
  std::sort(queries.begin(), queries.end(),
            [](const QueryRecord& a, const QueryRecord& b) { return a.query_id < b.query_id; });
  QuerySet qs;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (!qs.by_id_.emplace(queries[i].query_id, static_cast<std::uint32_t>(i)).second) {
      throw Error(ErrorCode::kDuplicateId, "query_id '" + queries[i].query_id + "' appears more than once");
    }
  }
  qs.records_ = std::move(queries);
  return qs;
}

std::optional<std::uint32_t> QuerySet::ordinal_of(const std::string& query_id) const {
  auto it = by_id_.find(query_id);
  if (it == by_id_.end()) return std::nullopt;
  return it->second;
}

QuerySet QuerySet::with_channel(std::shared_ptr<const EmbeddingChannel> channel) const {
  if (channel->slots() != size()) throw Error(ErrorCode::kUnknownPage, "channel does not cover this query set");
  QuerySet q = *this;
  q.channels_.put(std::move(channel));
  return q;
}

void QuerySet::bind(const Corpus& corpus) const {
  for (const auto& q : records_) {
    if (!corpus.ordinal_of(q.gold_page_id)) {
      throw Error(ErrorCode::kGoldNotFound,
                  "query '" + q.query_id + "' points at unknown gold page '" + q.gold_page_id + "'");
    }
  }
}

std::string QuerySet::checksum() const {
  Sha256 h;
  h.update_u64(records_.size());
  for (const auto& q : records_) {
    hash_string(h, q.query_id);
    hash_string(h, q.question);
    hash_string(h, q.gold_page_id);
    hash_string(h, q.reference_answer);
  }
  return h.hex_digest();
}

// ---------------------------------------------------------------------------
// Ingestion

Corpus ingest_corpus(const fs::path& path) {
  std::vector<PageRecord> pages;
  for_each_jsonl(path, [&](const json& record, std::size_t line_no) {
    PageRecord page;
    page.doc_id = require_string(record, "doc_id", line_no);
    page.page_id = require_string(record, "page_id", line_no);
    auto idx = record.find("page_index");
    if (idx == record.end() || !idx->is_number_integer() || idx->get<long long>() < 0) {
      throw Error(ErrorCode::kParseError,
                  "line " + std::to_string(line_no) + ": page_index must be a non-negative integer");
    }
    page.page_index = idx->get<std::uint32_t>();
    auto text = record.find("text");
    if (text != record.end() && !text->is_null()) {
      if (!text->is_string()) throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) + ": text must be a string");
      page.text = text->get<std::string>();
    }
    auto image = record.find("image_ref");
    if (image != record.end() && !image->is_null()) {
      if (!image->is_string()) {
        throw Error(ErrorCode::kParseError, "line " + std::to_string(line_no) + ": image_ref must be a string");
      }
      page.image_ref = image->get<std::string>();
    }
    pages.push_back(std::move(page));
  });
  return Corpus::from_records(std::move(pages));
}

QuerySet ingest_queries(const fs::path& path) {
  std::vector<QueryRecord> queries;
  for_each_jsonl(path, [&](const json& record, std::size_t line_no) {
    QueryRecord q;
    q.query_id = require_string(record, "query_id", line_no);
    q.question = require_string(record, "question", line_no);
    q.gold_page_id = require_string(record, "gold_page_id", line_no);
    auto ref = record.find("reference_answer");
    if (ref != record.end() && ref->is_string()) q.reference_answer = ref->get<std::string>();
    queries.push_back(std::move(q));
  });
  return QuerySet::from_records(std::move(queries));
}

Corpus attach_embeddings(const Corpus& corpus, const fs::path& path, ChannelId id, AttachOptions options) {
  auto payloads = read_embedding_file(path, id, "page_id",
                                      [&](const std::string& key) { return corpus.ordinal_of(key); });
  const bool normalize = options.normalize.value_or(normalizes_by_default(id));
  return corpus.with_channel(make_channel(id, corpus.page_count(), payloads, normalize));
}

QuerySet attach_query_embeddings(const QuerySet& queries, const fs::path& path, ChannelId id,
                                 AttachOptions options) {
  auto payloads = read_embedding_file(path, id, "query_id",
                                      [&](const std::string& key) { return queries.ordinal_of(key); });
  const bool normalize = options.normalize.value_or(normalizes_by_default(id));
  return queries.with_channel(make_channel(id, queries.size(), payloads, normalize));
}

// ---------------------------------------------------------------------------
// Manifest + persistence

CorpusManifest make_manifest(const Corpus& corpus, const QuerySet& queries) {
  CorpusManifest m;
  m.page_count = corpus.page_count();
  m.doc_count = corpus.doc_count();
  m.query_count = queries.size();
  m.pages_checksum = corpus.checksum();
  m.queries_checksum = queries.checksum();
  m.channels = corpus.channels().infos();
  m.query_channels = queries.channels().infos();
  return m;
}

nlohmann::ordered_json CorpusManifest::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "docret-store";
  j["format_version"] = format_version;
  j["page_count"] = page_count;
  j["doc_count"] = doc_count;
  j["query_count"] = query_count;
  j["pages_checksum"] = pages_checksum;
  j["queries_checksum"] = queries_checksum;
  j["channels"] = nlohmann::ordered_json::array();
  for (const auto& c : channels) j["channels"].push_back(channel_info_json(c));
  j["query_channels"] = nlohmann::ordered_json::array();
  for (const auto& c : query_channels) j["query_channels"].push_back(channel_info_json(c));
  return j;
}

CorpusManifest CorpusManifest::from_json(const json& j) {
  if (!j.is_object() || j.value("format", "") != "docret-store") {
    throw Error(ErrorCode::kIncompatibleStore, "not a docret store manifest");
  }
  CorpusManifest m;
  m.format_version = j.at("format_version").get<int>();
  if (m.format_version != kFormatVersion) {
    throw Error(ErrorCode::kIncompatibleStore, "store format version " + std::to_string(m.format_version) +
                                                   ", expected " + std::to_string(kFormatVersion));
  }
  m.page_count = j.at("page_count").get<std::size_t>();
  m.doc_count = j.at("doc_count").get<std::size_t>();
  m.query_count = j.at("query_count").get<std::size_t>();
  m.pages_checksum = j.at("pages_checksum").get<std::string>();
  m.queries_checksum = j.at("queries_checksum").get<std::string>();
  for (const auto& c : j.at("channels")) m.channels.push_back(channel_info_from_json(c));
  for (const auto& c : j.at("query_channels")) m.query_channels.push_back(channel_info_from_json(c));
  return m;
}

void persist(const Corpus& corpus, const QuerySet& queries, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir / "channels", ec);
  fs::create_directories(dir / "query_channels", ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create store at " + dir.string() + ": " + ec.message());

  {
    std::ofstream out(dir / "pages.jsonl", std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write pages.jsonl");
    for (const auto& p : corpus.pages()) {
      nlohmann::ordered_json j;
      j["doc_id"] = p.doc_id;
      j["page_id"] = p.page_id;
      j["page_index"] = p.page_index;
      j["text"] = p.text;
      if (p.image_ref) j["image_ref"] = *p.image_ref;
      out << j.dump() << '\n';
    }
  }
  {
    std::ofstream out(dir / "queries.jsonl", std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write queries.jsonl");
    for (const auto& q : queries.records()) {
      nlohmann::ordered_json j;
      j["query_id"] = q.query_id;
      j["question"] = q.question;
      j["gold_page_id"] = q.gold_page_id;
      j["reference_answer"] = q.reference_answer;
      out << j.dump() << '\n';
    }
  }
  for (const auto& [id, ch] : corpus.channels().all()) {
    write_channel(*ch, dir / "channels" / (std::string(to_string(id)) + ".bin"));
  }
  for (const auto& [id, ch] : queries.channels().all()) {
    write_channel(*ch, dir / "query_channels" / (std::string(to_string(id)) + ".bin"));
  }
  // Manifest last: a store without one is never mistaken for a complete store.
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write manifest.json");
  out << make_manifest(corpus, queries).to_json().dump(2) << '\n';
}

Store load(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw Error(ErrorCode::kIncompatibleStore, "no manifest.json in " + dir.string());
  json raw;
  try {
    raw = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIncompatibleStore, std::string("unreadable manifest: ") + e.what());
  }
  CorpusManifest manifest;
  try {
    manifest = CorpusManifest::from_json(raw);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIncompatibleStore, std::string("malformed manifest: ") + e.what());
  }

  Store store;
  try {
    store.corpus = ingest_corpus(dir / "pages.jsonl");
    store.queries = ingest_queries(dir / "queries.jsonl");
  } catch (const Error& e) {
    throw Error(ErrorCode::kIncompatibleStore, e.what());
  }
  for (const auto& info : manifest.channels) {
    store.corpus = store.corpus.with_channel(read_channel(dir / "channels" / (std::string(to_string(info.id)) + ".bin")));
  }
  for (const auto& info : manifest.query_channels) {
    store.queries =
        store.queries.with_channel(read_channel(dir / "query_channels" / (std::string(to_string(info.id)) + ".bin")));
  }
  store.manifest = make_manifest(store.corpus, store.queries);
  if (!(store.manifest == manifest)) {
    throw Error(ErrorCode::kIncompatibleStore, "store content does not match manifest checksums");
  }
  return store;
}

}  // namespace docret
