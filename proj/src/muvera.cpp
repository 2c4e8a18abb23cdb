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

#include "docret/muvera.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <limits>

#include "docret/error.hpp"
#include "docret/late_interaction.hpp"
#include "docret/rng.hpp"

namespace docret {

namespace {

constexpr std::uint64_t kPlaneStream = 0x706c616e65;
constexpr std::uint64_t kProjStream = 0x70726f6a;

}  // namespace

void FdeParams::validate() const {
  if (k_sim == 0 || k_sim > 16) throw Error(ErrorCode::kInvalidParams, "k_sim must be in [1, 16]");
  if (d_proj == 0) throw Error(ErrorCode::kInvalidParams, "d_proj must be positive");
  if (repetitions == 0) throw Error(ErrorCode::kInvalidParams, "repetitions must be positive");
}

void FdeParams::validate_for(std::size_t input_dim) const {
  validate();
  if (input_dim == 0) throw Error(ErrorCode::kInvalidParams, "input dim must be positive");
  if (identity_projection && d_proj != input_dim) {
    throw Error(ErrorCode::kInvalidParams, "identity projection needs d_proj == input dim (" +
                                               std::to_string(d_proj) + " vs " + std::to_string(input_dim) + ")");
  }
}

nlohmann::ordered_json FdeParams::to_json() const {
  nlohmann::ordered_json j;
  j["k_sim"] = k_sim;
  j["d_proj"] = d_proj;
  j["repetitions"] = repetitions;
  j["seed"] = seed;
  j["identity_projection"] = identity_projection;
  return j;
}

FdeParams FdeParams::from_json(const nlohmann::json& j) {
  FdeParams p;
  p.k_sim = j.value("k_sim", p.k_sim);
  p.d_proj = j.value("d_proj", p.d_proj);
  p.repetitions = j.value("repetitions", p.repetitions);
  p.seed = j.value("seed", p.seed);
  p.identity_projection = j.value("identity_projection", p.identity_projection);
  return p;
}

std::size_t fde_dim(const FdeParams& params) {
  params.validate();
  return params.buckets() * params.d_proj * params.repetitions;
}

MemoryEstimate memory_estimate(std::uint64_t pages, double avg_vectors_per_page, std::uint64_t dim,
                               const FdeParams& params) {
  MemoryEstimate m;
  m.raw_bytes = multivector_storage_bytes(pages, avg_vectors_per_page, dim);
  m.fde_bytes = pages * fde_dim(params) * sizeof(float);
  m.ratio = m.fde_bytes == 0 ? 0.0 : static_cast<double>(m.raw_bytes) / static_cast<double>(m.fde_bytes);
  return m;
}

std::uint32_t simhash_bucket(std::span<const float> v, std::span<const float> hyperplanes, std::size_t dim) {
  const std::size_t k = hyperplanes.size() / dim;
  std::uint32_t code = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const float s = kernels::dot(v.data(), hyperplanes.data() + i * dim, dim);
    code = (code << 1) | (s > 0.0f ? 1u : 0u);
  }
  return code;
}

FdeEncoder::FdeEncoder(const FdeParams& params, std::size_t input_dim) : params_(params), dim_(input_dim) {
  params_.validate_for(dim_);
  const std::size_t reps = params_.repetitions;
  const std::size_t buckets = params_.buckets();
  hyperplanes_.resize(reps * params_.k_sim * dim_);
  for (std::size_t r = 0; r < reps; ++r) {
    GaussianSource g(mix_seed(params_.seed, kPlaneStream, r));
    float* out = hyperplanes_.data() + r * params_.k_sim * dim_;
    for (std::size_t i = 0; i < params_.k_sim * dim_; ++i) out[i] = static_cast<float>(g.next());
  }
  if (params_.identity_projection) return;
  const std::size_t block = dim_ * params_.d_proj;
  const float scale = static_cast<float>(1.0 / std::sqrt(static_cast<double>(params_.d_proj)));
  projections_.resize(reps * buckets * block);
  for (std::size_t r = 0; r < reps; ++r) {
    for (std::size_t b = 0; b < buckets; ++b) {
      GaussianSource g(mix_seed(params_.seed, kProjStream, (r << 20) | b));
      float* out = projections_.data() + (r * buckets + b) * block;
      std::uint64_t word = 0;
      for (std::size_t i = 0; i < block; ++i) {
        if (i % 64 == 0) word = g.bits();
        out[i] = (word & 1u) ? scale : -scale;
        word >>= 1;
      }
    }
  }
}

std::span<const float> FdeEncoder::hyperplanes(std::size_t rep) const {
  const std::size_t n = params_.k_sim * dim_;
  return std::span<const float>(hyperplanes_).subspan(rep * n, n);
}

std::span<const float> FdeEncoder::projection(std::size_t rep, std::size_t bucket) const {
  if (params_.identity_projection) return {};
  const std::size_t n = dim_ * params_.d_proj;
  return std::span<const float>(projections_).subspan((rep * params_.buckets() + bucket) * n, n);
}

std::uint32_t FdeEncoder::bucket(std::size_t rep, std::span<const float> v) const {
  return simhash_bucket(v, hyperplanes(rep), dim_);
}

std::vector<float> FdeEncoder::aggregate(std::size_t rep, const VectorSetView& vectors, FdeRole role) const {
  if (vectors.count == 0) throw Error(ErrorCode::kEmptySet, "cannot encode an empty vector set");
  if (vectors.dim != dim_) {
    throw Error(ErrorCode::kDimMismatch,
                "vector dim " + std::to_string(vectors.dim) + " vs encoder dim " + std::to_string(dim_));
  }
  const std::size_t buckets = params_.buckets();
  std::vector<float> agg(buckets * dim_, 0.0f);
  std::vector<std::uint32_t> codes(vectors.count);
  std::vector<std::size_t> members(buckets, 0);
  for (std::size_t j = 0; j < vectors.count; ++j) {
    const auto v = vectors.row(j);
    codes[j] = bucket(rep, v);
    float* dst = agg.data() + codes[j] * dim_;
    for (std::size_t t = 0; t < dim_; ++t) dst[t] += v[t];
    ++members[codes[j]];
  }
  if (role == FdeRole::kQuery) return agg;

  for (std::size_t b = 0; b < buckets; ++b) {
    float* dst = agg.data() + b * dim_;
    if (members[b] > 0) {
      const float n = static_cast<float>(members[b]);
      for (std::size_t t = 0; t < dim_; ++t) dst[t] /= n;
      continue;
    }
    std::size_t nearest = 0;
    int best = std::numeric_limits<int>::max();
    for (std::size_t j = 0; j < vectors.count; ++j) {
      const int d = std::popcount(codes[j] ^ static_cast<std::uint32_t>(b));
      if (d < best) {
        best = d;
        nearest = j;
      }
    }
    const auto v = vectors.row(nearest);
    std::copy(v.begin(), v.end(), dst);
  }
  return agg;
}

FdeVector FdeEncoder::encode(const VectorSetView& vectors, FdeRole role) const {
  const std::size_t buckets = params_.buckets();
  const std::size_t dp = params_.d_proj;
  FdeVector fde;
  fde.role = role;
  fde.values.assign(output_dim(), 0.0f);
  std::vector<float> acc(dp);
  for (std::size_t r = 0; r < params_.repetitions; ++r) {
    const auto agg = aggregate(r, vectors, role);
    for (std::size_t b = 0; b < buckets; ++b) {
      const float* src = agg.data() + b * dim_;
      float* dst = fde.values.data() + (r * buckets + b) * dp;
      if (params_.identity_projection) {
        std::copy(src, src + dim_, dst);
        continue;
      }
      const float* proj = projection(r, b).data();
      std::fill(acc.begin(), acc.end(), 0.0f);
      for (std::size_t t = 0; t < dim_; ++t) {
        const float x = src[t];
        if (x == 0.0f) continue;
        const float* row = proj + t * dp;
        for (std::size_t c = 0; c < dp; ++c) acc[c] += x * row[c];
      }
      std::copy(acc.begin(), acc.end(), dst);
    }
  }
  return fde;
}

FdeVector FdeEncoder::encode_document(const VectorSetView& vectors) const {
  return encode(vectors, FdeRole::kDocument);
}

FdeVector FdeEncoder::encode_query(const VectorSetView& vectors) const { return encode(vectors, FdeRole::kQuery); }

FdeIndex FdeIndex::build(const EmbeddingChannel& channel, const FdeParams& params, Exec exec) {
  if (channel.kind() != ChannelKind::kMulti) {
    throw Error(ErrorCode::kInvalidParams, std::string(to_string(channel.id())) + " is not a multi-vector channel");
  }
  FdeIndex index;
  index.source_ = channel.id();
  index.encoder_ = std::make_shared<FdeEncoder>(params, channel.dim());
  const auto& enc = *index.encoder_;
  std::vector<std::uint32_t> ordinals;
  for (std::uint32_t o = 0; o < channel.slots(); ++o) {
    if (channel.has(o)) ordinals.push_back(o);
  }
  const std::size_t width = enc.output_dim();
  std::vector<float> rows(ordinals.size() * width);
  const auto n = static_cast<std::ptrdiff_t>(ordinals.size());
#pragma omp parallel for schedule(dynamic, 8) if (exec == Exec::kParallel)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto fde = enc.encode_document(channel.vectors(ordinals[static_cast<std::size_t>(i)]));
    std::copy(fde.values.begin(), fde.values.end(), rows.begin() + i * static_cast<std::ptrdiff_t>(width));
  }
  index.vectors_ = std::make_shared<DenseIndex>(std::move(rows), width, std::move(ordinals), Metric::kDot);
  return index;
}

void FdeIndex::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  const std::string stem = "fde." + std::string(to_string(source_));
  nlohmann::ordered_json meta;
  meta["source"] = to_string(source_);
  meta["input_dim"] = encoder_->input_dim();
  meta["params"] = encoder_->params().to_json();
  std::ofstream out(dir / (stem + ".json"), std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + (dir / (stem + ".json")).string());
  out << meta.dump(2) << '\n';
  vectors_->save(dir / (stem + ".bin"));
}

FdeIndex FdeIndex::load(const std::filesystem::path& dir, ChannelId source) {
  const std::string stem = "fde." + std::string(to_string(source));
  std::ifstream in(dir / (stem + ".json"));
  if (!in) throw Error(ErrorCode::kIncompatibleStore, "no FDE index for " + std::string(to_string(source)));
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kIncompatibleStore, std::string("bad FDE metadata: ") + e.what());
  }
  FdeIndex index;
  index.source_ = source;
  index.encoder_ =
      std::make_shared<FdeEncoder>(FdeParams::from_json(meta.at("params")), meta.at("input_dim").get<std::size_t>());
  index.vectors_ = std::make_shared<DenseIndex>(DenseIndex::load(dir / (stem + ".bin")));
  if (index.vectors_->dim() != index.encoder_->output_dim()) {
    throw Error(ErrorCode::kIncompatibleStore, "FDE rows do not match parameters");
  }
  return index;
}

std::vector<ScoredDoc> fde_candidates(const FdeIndex& index, const VectorSetView& query, std::size_t ef,
                                      const TwoStageOptions& options) {
  const auto q = index.encoder().encode_query(query);
  if (options.stage1 == Stage1::kGraph) {
    if (options.graph == nullptr) throw Error(ErrorCode::kInvalidParams, "graph stage 1 needs a graph index");
    return options.graph->search(q.values, SearchParams{ef, ef});
  }
  return index.vectors().search(q.values, ef, options.exec);
}

RankedList two_stage_search(const FdeIndex& index, const Corpus& corpus, const VectorSetView& query,
                            const SearchParams& params, const TwoStageOptions& options) {
  params.validate();
  const auto& channel = corpus.channel(index.source());
  if (query.count == 0) throw Error(ErrorCode::kEmptySet, "empty query vector set");
  if (query.dim != channel.dim()) {
    throw Error(ErrorCode::kDimMismatch,
                "query dim " + std::to_string(query.dim) + " vs channel dim " + std::to_string(channel.dim()));
  }
  const auto stage1 = fde_candidates(index, query, params.ef, options);
  std::vector<std::uint32_t> ordinals;
  ordinals.reserve(stage1.size());
  for (const auto& d : stage1) ordinals.push_back(d.ordinal);
  auto docs = maxsim_rescore(channel, query, ordinals, options.exec);
  select_top_k(docs, params.k);
  return to_ranked_list(docs, corpus, "muvera");
}

}  // namespace docret
