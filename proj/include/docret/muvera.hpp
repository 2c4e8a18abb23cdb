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
#include <memory>
#include <span>
#include <vector>

#include "docret/corpus.hpp"
#include "docret/dense_index.hpp"
#include "docret/kernels.hpp"
#include "docret/ranked_list.hpp"
#include "json.hpp"

namespace docret {

/// Fixed dimensional encoding parameters. Output length is
/// 2^k_sim * d_proj * repetitions.
struct FdeParams {
  std::uint32_t k_sim = 4;
  std::uint32_t d_proj = 16;
  std::uint32_t repetitions = 10;
  std::uint64_t seed = 42;
  /// Skip the random projection (requires d_proj == input dim).
  bool identity_projection = false;

  void validate() const;
  void validate_for(std::size_t input_dim) const;
  std::size_t buckets() const { return std::size_t{1} << k_sim; }

  nlohmann::ordered_json to_json() const;
  static FdeParams from_json(const nlohmann::json& j);
  bool operator==(const FdeParams&) const = default;
};

std::size_t fde_dim(const FdeParams& params);

struct MemoryEstimate {
  std::uint64_t raw_bytes = 0;  // pages * avg_vectors * dim * 4
  std::uint64_t fde_bytes = 0;  // pages * fde_dim * 4
  double ratio = 0.0;           // raw / fde
};

MemoryEstimate memory_estimate(std::uint64_t pages, double avg_vectors_per_page, std::uint64_t dim,
                               const FdeParams& params);

/// Bucket index of `v` for one repetition: bit i is set iff v . plane_i > 0,
/// with plane 0 as the most significant bit. `hyperplanes` is k x dim.
std::uint32_t simhash_bucket(std::span<const float> v, std::span<const float> hyperplanes, std::size_t dim);

enum class FdeRole { kQuery, kDocument };

struct FdeVector {
  std::vector<float> values;
  FdeRole role = FdeRole::kDocument;
};

/// Holds the seeded hyperplanes and projections shared by every encoding
/// made under one index, so query and document FDEs live in the same space.
class FdeEncoder {
 public:
  FdeEncoder(const FdeParams& params, std::size_t input_dim);

  const FdeParams& params() const { return params_; }
  std::size_t input_dim() const { return dim_; }
  std::size_t output_dim() const { return fde_dim(params_); }

  /// Gaussian hyperplanes of one repetition, k_sim x input_dim.
  std::span<const float> hyperplanes(std::size_t rep) const;
  /// Random sign matrix (+-1/sqrt(d_proj)) of one (repetition, bucket),
  /// input_dim x d_proj, row-major.
  std::span<const float> projection(std::size_t rep, std::size_t bucket) const;

  std::uint32_t bucket(std::size_t rep, std::span<const float> v) const;

  /// Per-bucket aggregate of one repetition before projection,
  /// buckets x input_dim. Queries sum their members and leave empty buckets
  /// at zero; documents average their members and fill empty buckets with
  /// the vector whose code is nearest in Hamming distance (lowest index on
  /// ties).
  std::vector<float> aggregate(std::size_t rep, const VectorSetView& vectors, FdeRole role) const;

  FdeVector encode_document(const VectorSetView& vectors) const;
  FdeVector encode_query(const VectorSetView& vectors) const;

 private:
  FdeVector encode(const VectorSetView& vectors, FdeRole role) const;

  FdeParams params_;
  std::size_t dim_;
  std::vector<float> hyperplanes_;  // reps x k x dim
  std::vector<float> projections_;  // reps x buckets x dim x d_proj
};

/// Document FDEs of a multi-vector channel, searchable by exact dot product.
class FdeIndex {
 public:
  static FdeIndex build(const EmbeddingChannel& channel, const FdeParams& params, Exec exec = Exec::kParallel);

  const FdeEncoder& encoder() const { return *encoder_; }
  const DenseIndex& vectors() const { return *vectors_; }
  std::shared_ptr<const DenseIndex> shared_vectors() const { return vectors_; }
  ChannelId source() const { return source_; }

  void save(const std::filesystem::path& dir) const;
  static FdeIndex load(const std::filesystem::path& dir, ChannelId source);

 private:
  std::shared_ptr<const FdeEncoder> encoder_;
  std::shared_ptr<const DenseIndex> vectors_;
  ChannelId source_ = ChannelId::kMultivectorImage;
};

enum class Stage1 { kExact, kGraph };

struct TwoStageOptions {
  Stage1 stage1 = Stage1::kExact;
  const GraphIndex* graph = nullptr;  // required for kGraph, built over FdeIndex::vectors()
  Exec exec = Exec::kParallel;
};

/// Stage 1 ranks pages by FDE dot product and keeps the top `ef`; stage 2
/// rescores those candidates with exact MaxSim over the original vectors
/// and returns the top `k`.
RankedList two_stage_search(const FdeIndex& index, const Corpus& corpus, const VectorSetView& query,
                            const SearchParams& params, const TwoStageOptions& options = {});

/// Stage-1 candidates only (ordinal, FDE score), best first.
std::vector<ScoredDoc> fde_candidates(const FdeIndex& index, const VectorSetView& query, std::size_t ef,
                                      const TwoStageOptions& options = {});

}  // namespace docret
