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

#include "docret/pipeline.hpp"

#include <algorithm>
#include <fstream>

#include "docret/error.hpp"
#include "docret/late_interaction.hpp"

namespace fs = std::filesystem;

namespace docret {

std::string_view to_string(RetrieverKind kind) {
  switch (kind) {
    case RetrieverKind::kBm25: return "bm25";
    case RetrieverKind::kDense: return "dense";
    case RetrieverKind::kMaxSim: return "maxsim";
    case RetrieverKind::kMuvera: return "muvera";
    case RetrieverKind::kHybrid: return "hybrid";
    case RetrieverKind::kMultimodal: return "multimodal";
  }
  return "bm25";
}

RetrieverKind parse_retriever(std::string_view name) {
  for (auto k : {RetrieverKind::kBm25, RetrieverKind::kDense, RetrieverKind::kMaxSim, RetrieverKind::kMuvera,
                 RetrieverKind::kHybrid, RetrieverKind::kMultimodal}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::kInvalidParams, "unknown retriever '" + std::string(name) + "'");
}

void RetrieverSpec::validate() const {
  bm25.validate();
  graph_params.validate();
  fde.validate();
  if (ef == 0) throw Error(ErrorCode::kInvalidParams, "ef must be positive");
  if (pool == 0) throw Error(ErrorCode::kInvalidParams, "pool must be positive");
  if (rrf_k == 0) throw Error(ErrorCode::kInvalidParams, "rrf_k must be positive");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::kInvalidParams, "alpha must be in [0, 1]");
  if (kind_of(text_channel) != ChannelKind::kDense) {
    throw Error(ErrorCode::kInvalidParams, std::string(to_string(text_channel)) + " is not a dense channel");
  }
  if (kind_of(image_channel) != ChannelKind::kMulti) {
    throw Error(ErrorCode::kInvalidParams, std::string(to_string(image_channel)) + " is not a multi-vector channel");
  }
  if (image_retriever != RetrieverKind::kMaxSim && image_retriever != RetrieverKind::kMuvera) {
    throw Error(ErrorCode::kInvalidParams, "image retriever must be maxsim or muvera");
  }
}

nlohmann::ordered_json RetrieverSpec::to_json() const {
  nlohmann::ordered_json j;
  j["retriever"] = to_string(kind);
  const bool uses_bm25 = kind == RetrieverKind::kBm25 || kind == RetrieverKind::kHybrid ||
                         kind == RetrieverKind::kMultimodal;
  const bool uses_dense = kind == RetrieverKind::kDense || kind == RetrieverKind::kHybrid ||
                          kind == RetrieverKind::kMultimodal;
  const bool uses_image = kind == RetrieverKind::kMaxSim || kind == RetrieverKind::kMuvera ||
                          kind == RetrieverKind::kMultimodal;
  const bool uses_fde = kind == RetrieverKind::kMuvera ||
                        (kind == RetrieverKind::kMultimodal && image_retriever == RetrieverKind::kMuvera);
  if (uses_bm25) j["bm25"] = {{"k1", bm25.k1}, {"b", bm25.b}};
  if (uses_dense) {
    j["text_channel"] = to_string(text_channel);
    j["metric"] = to_string(metric);
    j["graph"] = graph;
  }
  if (uses_image) j["image_channel"] = to_string(image_channel);
  if (kind == RetrieverKind::kMultimodal) j["image_retriever"] = to_string(image_retriever);
  if ((uses_dense && graph) || uses_fde) j["ef"] = ef;
  if ((uses_dense && graph) || (uses_fde && stage1 == Stage1::kGraph)) {
    j["graph_params"] = {{"M", graph_params.M}, {"ef_construction", graph_params.ef_construction},
                         {"seed", graph_params.seed}};
  }
  if (uses_fde) {
    j["fde"] = fde.to_json();
    j["stage1"] = stage1 == Stage1::kExact ? "exact" : "graph";
  }
  if (kind == RetrieverKind::kHybrid || kind == RetrieverKind::kMultimodal) {
    j["strategy"] = to_string(strategy);
    if (strategy == Strategy::kRrf) j["rrf_k"] = rrf_k;
    j["pool"] = pool;
  }
  if (kind == RetrieverKind::kMultimodal) j["alpha"] = alpha;
  return j;
}

RetrieverSpec RetrieverSpec::from_json(const nlohmann::json& j) {
  RetrieverSpec s;
  try {
    if (j.contains("retriever")) s.kind = parse_retriever(j["retriever"].get<std::string>());
    if (j.contains("bm25")) {
      s.bm25.k1 = j["bm25"].value("k1", s.bm25.k1);
      s.bm25.b = j["bm25"].value("b", s.bm25.b);
    }
    if (j.contains("text_channel")) s.text_channel = parse_channel_id(j["text_channel"].get<std::string>());
    if (j.contains("image_channel")) s.image_channel = parse_channel_id(j["image_channel"].get<std::string>());
    if (j.contains("metric")) s.metric = parse_metric(j["metric"].get<std::string>());
    s.graph = j.value("graph", s.graph);
    if (j.contains("graph_params")) {
      const auto& g = j["graph_params"];
      s.graph_params.M = g.value("M", s.graph_params.M);
      s.graph_params.ef_construction = g.value("ef_construction", s.graph_params.ef_construction);
      s.graph_params.seed = g.value("seed", s.graph_params.seed);
    }
    s.ef = j.value("ef", s.ef);
    if (j.contains("fde")) s.fde = FdeParams::from_json(j["fde"]);
    if (j.contains("stage1")) {
      const auto v = j["stage1"].get<std::string>();
      if (v != "exact" && v != "graph") throw Error(ErrorCode::kInvalidParams, "stage1 must be exact or graph");
      s.stage1 = v == "exact" ? Stage1::kExact : Stage1::kGraph;
    }
    if (j.contains("strategy")) s.strategy = parse_strategy(j["strategy"].get<std::string>());
    s.alpha = j.value("alpha", s.alpha);
    s.rrf_k = j.value("rrf_k", s.rrf_k);
    s.pool = j.value("pool", s.pool);
    if (j.contains("image_retriever")) s.image_retriever = parse_retriever(j["image_retriever"].get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidParams, std::string("bad retriever spec: ") + e.what());
  }
  s.validate();
  return s;
}

Engine::Engine(Corpus corpus, QuerySet queries, std::optional<fs::path> index_dir)
    : corpus_(std::move(corpus)), queries_(std::move(queries)), index_dir_(std::move(index_dir)) {
  check_index_dir();
}

namespace {

nlohmann::ordered_json index_meta(const Corpus& corpus) {
  nlohmann::ordered_json j;
  j["format"] = "docret-index";
  j["corpus_checksum"] = corpus.checksum();
  nlohmann::ordered_json channels = nlohmann::ordered_json::object();
  for (const auto& info : corpus.channels().infos()) channels[std::string(to_string(info.id))] = info.checksum;
  j["channels"] = std::move(channels);
  return j;
}

std::string graph_file(ChannelId channel, Metric metric) {
  return "graph." + std::string(to_string(channel)) + "." + std::string(to_string(metric)) + ".bin";
}

}  // namespace

void Engine::check_index_dir() {
  if (!index_dir_) return;
  const auto meta_path = *index_dir_ / "index.json";
  if (!fs::exists(meta_path)) return;
  std::ifstream in(meta_path);
  nlohmann::ordered_json stored;
  try {
    stored = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::kIncompatibleStore, "unreadable " + meta_path.string());
  }
  if (stored != index_meta(corpus_)) {
    throw Error(ErrorCode::kIncompatibleStore,
                "indexes in " + index_dir_->string() + " were built for different data; rerun `docret index`");
  }
}

void Engine::save_index_meta() {
  fs::create_directories(*index_dir_);
  std::ofstream out(*index_dir_ / "index.json", std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + (*index_dir_ / "index.json").string());
  out << index_meta(corpus_).dump(2) << '\n';
}

const InvertedIndex& Engine::bm25() {
  std::lock_guard lock(mutex_);
  if (!bm25_) {
    if (index_dir_ && fs::exists(*index_dir_ / "bm25.bin")) {
      bm25_ = std::make_unique<InvertedIndex>(InvertedIndex::load(*index_dir_ / "bm25.bin"));
      if (bm25_->doc_count() != corpus_.page_count()) {
        throw Error(ErrorCode::kIncompatibleStore, "BM25 index does not match the corpus");
      }
    } else {
      const auto texts = corpus_.texts();
      bm25_ = std::make_unique<InvertedIndex>(InvertedIndex::build(texts));
    }
  }
  return *bm25_;
}

std::shared_ptr<const DenseIndex> Engine::dense(ChannelId channel, Metric metric) {
  std::lock_guard lock(mutex_);
  auto& slot = dense_[{channel, metric}];
  if (!slot) slot = std::make_shared<DenseIndex>(build_exact(corpus_, channel, metric));
  return slot;
}

const GraphIndex& Engine::graph(ChannelId channel, Metric metric, const GraphIndexParams& params) {
  std::lock_guard lock(mutex_);
  auto& slot = graphs_[{channel, metric, params.M, params.ef_construction, params.seed}];
  if (!slot) {
    auto vectors = dense(channel, metric);
    if (index_dir_ && fs::exists(*index_dir_ / graph_file(channel, metric))) {
      auto loaded = GraphIndex::load(*index_dir_ / graph_file(channel, metric), vectors);
      const auto& p = loaded.params();
      if (p.M == params.M && p.ef_construction == params.ef_construction && p.seed == params.seed) {
        slot = std::make_unique<GraphIndex>(std::move(loaded));
      }
    }
    if (!slot) slot = std::make_unique<GraphIndex>(GraphIndex::build(vectors, params));
  }
  return *slot;
}

const FdeIndex& Engine::fde(ChannelId channel, const FdeParams& params) {
  std::lock_guard lock(mutex_);
  auto& slot = fdes_[{channel, params.k_sim, params.d_proj, params.repetitions, params.seed, params.identity_projection}];
  if (!slot) {
    const auto& source = corpus_.channel(channel);
    if (index_dir_ && fs::exists(*index_dir_ / ("fde." + std::string(to_string(channel)) + ".json"))) {
      auto loaded = FdeIndex::load(*index_dir_, channel);
      if (loaded.encoder().params() == params && loaded.vectors().size() == source.present_entries()) {
        slot = std::make_unique<FdeIndex>(std::move(loaded));
      }
    }
    if (!slot) slot = std::make_unique<FdeIndex>(FdeIndex::build(source, params));
  }
  return *slot;
}

const GraphIndex& Engine::fde_graph(ChannelId channel, const FdeParams& params, const GraphIndexParams& graph_params) {
  std::lock_guard lock(mutex_);
  auto& slot =
      fde_graphs_[{channel, params.k_sim, params.d_proj, params.repetitions, params.seed, params.identity_projection}];
  if (!slot || slot->params().M != graph_params.M || slot->params().ef_construction != graph_params.ef_construction ||
      slot->params().seed != graph_params.seed) {
    slot = std::make_unique<GraphIndex>(GraphIndex::build(fde(channel, params).shared_vectors(), graph_params));
  }
  return *slot;
}

QueryInput Engine::query(std::uint32_t ordinal) const {
  return QueryInput{queries_.at(ordinal).question, ordinal};
}

VectorSetView Engine::query_vectors(const QueryInput& query, ChannelId channel) const {
  if (!query.ordinal) {
    throw Error(ErrorCode::kInvalidParams, std::string(to_string(channel)) +
                                               " retrieval needs a query embedding; select the query by id");
  }
  const auto& ch = queries_.channel(channel);
  if (*query.ordinal >= ch.slots() || !ch.has(*query.ordinal)) {
    throw Error(ErrorCode::kPayloadMissing, "query '" + queries_.at(*query.ordinal).query_id + "' has no " +
                                                std::string(to_string(channel)) + " embedding");
  }
  return ch.vectors(*query.ordinal);
}

void Engine::prepare(const RetrieverSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case RetrieverKind::kMultimodal:
      if (spec.image_retriever == RetrieverKind::kMuvera) {
        fde(spec.image_channel, spec.fde);
        if (spec.stage1 == Stage1::kGraph) fde_graph(spec.image_channel, spec.fde, spec.graph_params);
      } else {
        corpus_.channel(spec.image_channel);
      }
      [[fallthrough]];
    case RetrieverKind::kHybrid:
      bm25();
      [[fallthrough]];
    case RetrieverKind::kDense:
      if (spec.graph) graph(spec.text_channel, spec.metric, spec.graph_params);
      else dense(spec.text_channel, spec.metric);
      break;
    case RetrieverKind::kBm25:
      bm25();
      break;
    case RetrieverKind::kMaxSim:
      corpus_.channel(spec.image_channel);
      break;
    case RetrieverKind::kMuvera:
      fde(spec.image_channel, spec.fde);
      if (spec.stage1 == Stage1::kGraph) fde_graph(spec.image_channel, spec.fde, spec.graph_params);
      break;
  }
}

void Engine::build_indexes(const RetrieverSpec& spec) {
  if (!index_dir_) throw Error(ErrorCode::kInvalidParams, "no index directory configured");
  prepare(spec);
  std::lock_guard lock(mutex_);
  save_index_meta();
  if (bm25_) bm25_->save(*index_dir_ / "bm25.bin");
  for (const auto& [key, g] : graphs_) g->save(*index_dir_ / graph_file(std::get<0>(key), std::get<1>(key)));
  for (const auto& [key, f] : fdes_) f->save(*index_dir_);
}

RankedList Engine::single(const RetrieverSpec& spec, RetrieverKind kind, const QueryInput& query, std::size_t depth) {
  switch (kind) {
    case RetrieverKind::kBm25:
      return bm25_search(bm25(), corpus_, query.text, spec.bm25, depth);
    case RetrieverKind::kDense: {
      const auto view = query_vectors(query, spec.text_channel);
      if (spec.graph) {
        const auto& g = graph(spec.text_channel, spec.metric, spec.graph_params);
        return graph_search(g, corpus_, view.row(0), SearchParams{std::max(spec.ef, depth), depth});
      }
      return exact_search(*dense(spec.text_channel, spec.metric), corpus_, view.row(0), depth);
    }
    case RetrieverKind::kMaxSim:
      return exact_maxsim_search(corpus_, spec.image_channel, query_vectors(query, spec.image_channel), depth);
    case RetrieverKind::kMuvera: {
      const auto view = query_vectors(query, spec.image_channel);
      TwoStageOptions options;
      options.stage1 = spec.stage1;
      if (spec.stage1 == Stage1::kGraph) options.graph = &fde_graph(spec.image_channel, spec.fde, spec.graph_params);
      return two_stage_search(fde(spec.image_channel, spec.fde), corpus_, view,
                              SearchParams{spec.ef, std::min(depth, spec.ef)}, options);
    }
    default:
      break;
  }
  throw Error(ErrorCode::kInvalidParams, "not a single retriever: " + std::string(to_string(kind)));
}

namespace {

SearchOutcome from_fusion(FusionResult fused, std::size_t depth) {
  SearchOutcome out;
  out.list = truncated(std::move(fused.list), depth);
  out.inputs = std::move(fused.inputs);
  fused.contributions.resize(out.list.size());
  out.contributions = std::move(fused.contributions);
  return out;
}

}  // namespace

SearchOutcome Engine::search(const RetrieverSpec& spec, const QueryInput& query, std::size_t depth) {
  if (depth == 0) throw Error(ErrorCode::kInvalidParams, "k must be positive");
  switch (spec.kind) {
    case RetrieverKind::kHybrid: {
      const auto lex = single(spec, RetrieverKind::kBm25, query, spec.pool);
      const auto sem = single(spec, RetrieverKind::kDense, query, spec.pool);
      return from_fusion(hybrid_text(lex, sem, spec.strategy, spec.rrf_k), depth);
    }
    case RetrieverKind::kMultimodal: {
      RetrieverSpec text_spec = spec;
      text_spec.kind = RetrieverKind::kHybrid;
      const auto text = search(text_spec, query, spec.pool).list;
      const auto image = single(spec, spec.image_retriever, query, spec.pool);
      return from_fusion(multimodal(text, image, spec.alpha, spec.strategy, spec.rrf_k), depth);
    }
    default:
      return SearchOutcome{single(spec, spec.kind, query, depth), {}, {}};
  }
}

RetrievalRun Engine::run(const std::string& name, const RetrieverSpec& spec, std::size_t depth, Exec exec) {
  prepare(spec);
  auto config = spec.to_json();
  config["depth"] = depth;
  return make_run(name, std::move(config), corpus_, queries_,
                  [&](std::uint32_t q) { return search(spec, query(q), depth).list; }, exec);
}

}  // namespace docret
