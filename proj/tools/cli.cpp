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

#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "docret/error.hpp"
#include "docret/eval.hpp"
#include "docret/fusion.hpp"
#include "docret/pipeline.hpp"
#include "docret/rag.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace docret {

namespace {

std::pair<ChannelId, fs::path> parse_binding(const std::string& arg) {
  const auto eq = arg.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == arg.size()) {
    throw Error(ErrorCode::kInvalidParams, "expected <channel>=<file>, got '" + arg + "'");
  }
  return {parse_channel_id(arg.substr(0, eq)), fs::path(arg.substr(eq + 1))};
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string score_text(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

fs::path index_dir(const fs::path& store) { return store / "index"; }

// Retrieval flags shared by search, benchmark defaults, index and rag.
struct RetrievalFlags {
  std::string retriever = "bm25";
  std::string text_channel = "dense_text";
  std::string image_channel = "multivector_image";
  std::string image_retriever = "maxsim";
  std::string metric = "cosine";
  bool graph = false;
  std::size_t M = 16;
  std::size_t ef_construction = 128;
  std::size_t ef = 160;
  std::uint32_t ksim = 4;
  std::uint32_t dproj = 16;
  std::uint32_t reps = 10;
  std::uint64_t seed = 42;
  bool identity_projection = false;
  std::string stage1 = "exact";
  std::string strategy = "rsf";
  double alpha = 0.5;
  std::size_t rrf_k = kDefaultRrfK;
  std::size_t pool = 0;  // 0 = max(100, 5k)
  double k1 = 1.2;
  double b = 0.75;

  void add_to(CLI::App& cmd, bool with_retriever) {
    if (with_retriever) {
      cmd.add_option("--retriever", retriever, "bm25|dense|maxsim|muvera|hybrid|multimodal")->capture_default_str();
    }
    cmd.add_option("--text-channel", text_channel, "dense text channel")->capture_default_str();
    cmd.add_option("--image-channel", image_channel, "multi-vector channel")->capture_default_str();
    cmd.add_option("--image-retriever", image_retriever, "image side of multimodal: maxsim|muvera")
        ->capture_default_str();
    cmd.add_option("--metric", metric, "dot|cosine")->capture_default_str();
    cmd.add_flag("--graph", graph, "dense retrieval through the graph index");
    cmd.add_option("--M", M, "graph degree")->capture_default_str();
    cmd.add_option("--ef-construction", ef_construction, "graph build beam")->capture_default_str();
    cmd.add_option("--ef", ef, "graph beam / MUVERA candidates")->capture_default_str();
    cmd.add_option("--ksim", ksim, "FDE hyperplanes per repetition")->capture_default_str();
    cmd.add_option("--dproj", dproj, "FDE projected dim")->capture_default_str();
    cmd.add_option("--reps", reps, "FDE repetitions")->capture_default_str();
    cmd.add_option("--seed", seed, "FDE and graph seed")->capture_default_str();
    cmd.add_flag("--identity-projection", identity_projection, "skip the FDE projection (dproj = dim)");
    cmd.add_option("--stage1", stage1, "MUVERA candidate stage: exact|graph")->capture_default_str();
    cmd.add_option("--strategy", strategy, "rsf|rrf")->capture_default_str();
    cmd.add_option("--alpha", alpha, "image weight of multimodal fusion")->capture_default_str();
    cmd.add_option("--rrf-k", rrf_k, "RRF constant")->capture_default_str();
    cmd.add_option("--pool", pool, "per-retriever depth before fusion (default max(100, 5k))");
    cmd.add_option("--k1", k1, "BM25 k1")->capture_default_str();
    cmd.add_option("--b", b, "BM25 b")->capture_default_str();
  }

  RetrieverSpec spec(std::size_t k) const {
    RetrieverSpec s;
    s.kind = parse_retriever(retriever);
    s.bm25 = Bm25Params{k1, b};
    s.text_channel = parse_channel_id(text_channel);
    s.image_channel = parse_channel_id(image_channel);
    s.image_retriever = parse_retriever(image_retriever);
    s.metric = parse_metric(metric);
    s.graph = graph;
    s.graph_params = GraphIndexParams{M, ef_construction, seed};
    s.ef = ef;
    s.fde = FdeParams{ksim, dproj, reps, seed, identity_projection};
    if (stage1 != "exact" && stage1 != "graph") throw Error(ErrorCode::kInvalidParams, "--stage1 must be exact or graph");
    s.stage1 = stage1 == "exact" ? Stage1::kExact : Stage1::kGraph;
    s.strategy = parse_strategy(strategy);
    s.alpha = alpha;
    s.rrf_k = rrf_k;
    s.pool = pool == 0 ? default_pool(k) : pool;
    s.validate();
    return s;
  }
};

Engine open_engine(const fs::path& store) {
  auto loaded = load(store);
  return Engine(std::move(loaded.corpus), std::move(loaded.queries), index_dir(store));
}

// ---- ingest ---------------------------------------------------------------

struct IngestArgs {
  std::string store;
  std::string corpus;
  std::string queries;
  std::vector<std::string> emb;
  std::vector<std::string> qemb;
  bool no_normalize = false;
};

int cmd_ingest(const IngestArgs& a, std::ostream& out) {
  Corpus corpus = ingest_corpus(a.corpus);
  QuerySet queries = ingest_queries(a.queries);
  AttachOptions options;
  if (a.no_normalize) options.normalize = false;
  for (const auto& binding : a.emb) {
    const auto [id, path] = parse_binding(binding);
    corpus = attach_embeddings(corpus, path, id, options);
  }
  for (const auto& binding : a.qemb) {
    const auto [id, path] = parse_binding(binding);
    queries = attach_query_embeddings(queries, path, id, options);
  }
  queries.bind(corpus);
  fs::remove_all(index_dir(a.store));
  persist(corpus, queries, a.store);
  out << make_manifest(corpus, queries).to_json().dump(2) << '\n';
  return 0;
}

// ---- index ----------------------------------------------------------------

struct IndexArgs {
  std::string store;
  RetrievalFlags flags;
};

int cmd_index(IndexArgs& a, std::ostream& out) {
  Engine engine = open_engine(a.store);
  const auto& corpus = engine.corpus();
  ordered_json built = ordered_json::array();

  RetrieverSpec base = a.flags.spec(20);
  base.kind = RetrieverKind::kBm25;
  engine.build_indexes(base);
  built.push_back("bm25");
  for (const auto& [id, channel] : corpus.channels().all()) {
    RetrieverSpec s = base;
    if (channel->kind() == ChannelKind::kDense) {
      s.kind = RetrieverKind::kDense;
      s.text_channel = id;
      s.graph = true;
      engine.build_indexes(s);
      built.push_back("graph:" + std::string(to_string(id)));
    } else {
      s.kind = RetrieverKind::kMuvera;
      s.image_channel = id;
      engine.build_indexes(s);
      built.push_back("fde:" + std::string(to_string(id)));
    }
  }
  ordered_json report;
  report["store"] = a.store;
  report["indexes"] = std::move(built);
  report["graph"] = {{"M", base.graph_params.M}, {"ef_construction", base.graph_params.ef_construction},
                     {"seed", base.graph_params.seed}, {"metric", to_string(base.metric)}};
  report["fde"] = base.fde.to_json();
  out << report.dump(2) << '\n';
  return 0;
}

// ---- search ---------------------------------------------------------------

struct SearchArgs {
  std::string store;
  std::string query_text;
  std::string query_id;
  std::size_t k = 20;
  bool explain = false;
  bool json = false;
  RetrievalFlags flags;
};

int cmd_search(SearchArgs& a, std::ostream& out) {
  if (a.query_text.empty() == a.query_id.empty()) {
    throw Error(ErrorCode::kInvalidParams, "give exactly one of --query-text or --query-id");
  }
  Engine engine = open_engine(a.store);
  const auto spec = a.flags.spec(a.k);
  QueryInput query;
  if (!a.query_id.empty()) {
    const auto ordinal = engine.queries().ordinal_of(a.query_id);
    if (!ordinal) throw Error(ErrorCode::kUnknownPage, "unknown query id '" + a.query_id + "'");
    query = engine.query(*ordinal);
  } else {
    query.text = a.query_text;
  }
  engine.prepare(spec);
  const auto outcome = engine.search(spec, query, a.k);

  if (a.json) {
    ordered_json j;
    j["config"] = spec.to_json();
    j["config"]["k"] = a.k;
    j["query"] = a.query_id.empty() ? ordered_json{{"text", query.text}} : ordered_json{{"query_id", a.query_id}};
    if (a.explain && !outcome.inputs.empty()) j["inputs"] = outcome.inputs;
    auto hits = ordered_json::array();
    for (std::size_t r = 0; r < outcome.list.size(); ++r) {
      ordered_json h;
      h["rank"] = r + 1;
      h["page_id"] = outcome.list.hits[r].page_id;
      h["score"] = outcome.list.hits[r].score;
      if (a.explain && !outcome.inputs.empty()) h["contributions"] = outcome.contributions[r];
      hits.push_back(std::move(h));
    }
    j["hits"] = std::move(hits);
    out << j.dump(2) << '\n';
    return 0;
  }
  out << "# " << spec.to_json().dump() << '\n';
  if (a.explain && !outcome.inputs.empty()) {
    out << "rank\tpage_id\tscore";
    for (const auto& name : outcome.inputs) out << '\t' << name;
    out << '\n';
  }
  for (std::size_t r = 0; r < outcome.list.size(); ++r) {
    out << r + 1 << '\t' << outcome.list.hits[r].page_id << '\t' << score_text(outcome.list.hits[r].score);
    if (a.explain && !outcome.inputs.empty()) {
      for (double c : outcome.contributions[r]) out << '\t' << score_text(c);
    }
    out << '\n';
  }
  return 0;
}

// ---- benchmark ------------------------------------------------------------

struct BenchmarkArgs {
  std::string store;
  std::string suite;
  std::string out_dir;
};

std::string safe_name(const std::string& name) {
  std::string s = name;
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
  }
  return s;
}

int cmd_benchmark(const BenchmarkArgs& a, std::ostream& out) {
  nlohmann::json suite;
  try {
    suite = nlohmann::json::parse(read_file(a.suite));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("suite is not JSON: ") + e.what());
  }
  Engine engine = open_engine(a.store);
  const auto ks = suite.value("ks", std::vector<std::size_t>(default_ks()));
  if (ks.empty()) throw Error(ErrorCode::kInvalidParams, "suite lists no K values");
  const std::size_t max_k = *std::max_element(ks.begin(), ks.end());
  const std::size_t pool = suite.value("pool", default_pool(max_k));
  const std::size_t rrf_k = suite.value("rrf_k", kDefaultRrfK);
  const bool doc_level = suite.value("doc_level", false);
  const std::size_t depth = std::max(pool, max_k);
  const fs::path out_dir(a.out_dir);

  ordered_json resolved;
  resolved["suite"] = suite.value("name", fs::path(a.suite).stem().string());
  resolved["corpus_checksum"] = engine.corpus().checksum();
  resolved["queries_checksum"] = engine.queries().checksum();
  resolved["ks"] = ks;
  resolved["pool"] = pool;
  resolved["rrf_k"] = rrf_k;
  resolved["depth"] = depth;
  resolved["runs"] = ordered_json::array();

  ordered_json timings;
  std::map<std::string, RetrievalRun> runs;
  std::vector<RecallReport> reports;
  std::vector<RecallReport> doc_reports;
  std::vector<std::string> order;
  if (!suite.contains("runs") || !suite["runs"].is_array() || suite["runs"].empty()) {
    throw Error(ErrorCode::kInvalidParams, "suite has no runs");
  }
  for (const auto& entry : suite["runs"]) {
    nlohmann::json spec_json = entry;
    if (!spec_json.contains("pool")) spec_json["pool"] = pool;
    if (!spec_json.contains("rrf_k")) spec_json["rrf_k"] = rrf_k;
    const auto spec = RetrieverSpec::from_json(spec_json);
    const std::string name = entry.value("name", std::string(to_string(spec.kind)));
    if (runs.count(name)) throw Error(ErrorCode::kDuplicateId, "run name '" + name + "' used twice");
    const auto start = std::chrono::steady_clock::now();
    auto run = engine.run(name, spec, depth);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    timings[name] = seconds;
    auto report = evaluate(run, engine.queries(), engine.corpus(), ks);
    write_file(out_dir / "runs" / (safe_name(name) + ".report.json"), emit_report({report}, ReportFormat::kJson));
    reports.push_back(report);
    if (doc_level) {
      auto doc = evaluate(run, engine.queries(), engine.corpus(), ks, true);
      write_file(out_dir / "runs" / (safe_name(name) + ".doc.report.json"), emit_report({doc}, ReportFormat::kJson));
      doc_reports.push_back(std::move(doc));
    }
    resolved["runs"].push_back(ordered_json{{"name", name}, {"config", run.config}});
    order.push_back(name);
    runs.emplace(name, std::move(run));
  }
  write_file(out_dir / "recall.json", emit_report(reports, ReportFormat::kJson));
  write_file(out_dir / "recall.md", emit_report(reports, ReportFormat::kMarkdown));
  if (doc_level) {
    write_file(out_dir / "recall.doc.json", emit_report(doc_reports, ReportFormat::kJson));
    write_file(out_dir / "recall.doc.md", emit_report(doc_reports, ReportFormat::kMarkdown));
  }

  auto find_run = [&](const std::string& name) -> const RetrievalRun& {
    const auto it = runs.find(name);
    if (it == runs.end()) throw Error(ErrorCode::kInvalidParams, "suite refers to unknown run '" + name + "'");
    return it->second;
  };

  std::vector<RecallReport> all = reports;
  if (suite.contains("sweep")) {
    const auto& sw = suite["sweep"];
    SweepOptions options;
    options.pool = pool;
    options.rrf_k = rrf_k;
    options.ks = ks;
    if (sw.contains("alphas")) options.alphas = sw["alphas"].get<std::vector<double>>();
    if (sw.contains("strategies")) {
      options.strategies.clear();
      for (const auto& s : sw["strategies"]) options.strategies.push_back(parse_strategy(s.get<std::string>()));
    }
    const auto start = std::chrono::steady_clock::now();
    const auto entries = alpha_sweep(find_run(sw.value("text", "hybrid")), find_run(sw.value("image", "maxsim")),
                                     engine.queries(), engine.corpus(), options);
    timings["sweep"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::vector<RecallReport> sweep_reports;
    for (const auto& e : entries) sweep_reports.push_back(e.report);
    write_file(out_dir / "sweep.json", emit_report(sweep_reports, ReportFormat::kJson));
    write_file(out_dir / "sweep.md", emit_report(sweep_reports, ReportFormat::kMarkdown));
    resolved["sweep"] = {{"text", sw.value("text", "hybrid")},
                         {"image", sw.value("image", "maxsim")},
                         {"alphas", options.alphas},
                         {"reports", sweep_reports.size()}};
    all.insert(all.end(), sweep_reports.begin(), sweep_reports.end());
  }

  if (suite.contains("complementarity")) {
    auto cells = ordered_json::array();
    std::string md;
    for (const auto& c : suite["complementarity"]) {
      const std::string an = c.at("a").get<std::string>();
      const std::string bn = c.at("b").get<std::string>();
      const std::size_t k = c.value("k", std::size_t{1});
      const auto report = exclusive_successes(find_run(an), find_run(bn), engine.queries(), engine.corpus(), k);
      cells.push_back(report.to_json());
      md += emit_complementarity(report, ReportFormat::kMarkdown) + "\n";
    }
    write_file(out_dir / "complementarity.json", cells.dump(2) + "\n");
    write_file(out_dir / "complementarity.md", md);
  }

  // Best configuration(s) per K across runs and sweep entries.
  ordered_json best = ordered_json::object();
  for (std::size_t k : ks) {
    double top = -1.0;
    for (const auto& r : all) top = std::max(top, r.at(k));
    ordered_json names = ordered_json::array();
    for (const auto& r : all) {
      if (r.at(k) == top) names.push_back(r.name);
    }
    best[std::to_string(k)] = {{"recall", top}, {"configs", std::move(names)}};
  }
  resolved["best"] = best;
  write_file(out_dir / "summary.json", resolved.dump(2) + "\n");
  write_file(out_dir / "timings.json", timings.dump(2) + "\n");

  out << emit_report(reports, ReportFormat::kMarkdown);
  return 0;
}

// ---- rag ------------------------------------------------------------------

struct RagArgs {
  std::string store;
  std::string modality = "text";
  std::string mode = "standard";
  std::size_t k = 5;
  int votes = 3;
  std::size_t parallelism = 4;
  bool exclude_gold_document = false;
  bool stub = false;
  std::string image_root;
  std::string out_file;
  RetrievalFlags flags;
  bool retriever_given = false;
};

int cmd_rag(RagArgs& a, std::ostream& out) {
  Engine engine = open_engine(a.store);
  RagConfig config;
  config.modality = parse_modality(a.modality);
  config.mode = parse_rag_mode(a.mode);
  config.k = a.k;
  config.judge_votes = a.votes;
  config.parallelism = a.parallelism;
  config.exclude_gold_document = a.exclude_gold_document;
  config.image_root = a.image_root.empty() ? fs::path(a.store) : fs::path(a.image_root);
  config.validate();

  std::optional<RetrievalRun> run;
  std::string retriever = "none";
  if (config.mode == RagMode::kStandard || config.mode == RagMode::kHardNegative) {
    if (!a.retriever_given) a.flags.retriever = config.modality == Modality::kText ? "hybrid" : "maxsim";
    const auto spec = a.flags.spec(std::max<std::size_t>(a.k, 20));
    run = engine.run(a.flags.retriever, spec, std::max<std::size_t>(a.k, 20));
    retriever = spec.to_json().dump();
  }

  std::unique_ptr<ReaderClient> reader;
  std::unique_ptr<JudgeClient> judge;
  if (a.stub) {
    reader = std::make_unique<StubReader>(engine.queries());
    judge = std::make_unique<StubJudge>();
  } else {
    reader = make_http_reader(ServiceConfig::from_env("DOCRET_READER"));
    judge = make_http_judge(ServiceConfig::from_env("DOCRET_JUDGE"));
  }
  auto results = run_rag(engine.queries(), engine.corpus(), run ? &*run : nullptr, *reader, *judge, config);
  const auto report = make_qa_report(std::move(results), config, reader->identity(), judge->identity(), retriever);
  const auto text = report.to_json().dump(2) + "\n";
  if (!a.out_file.empty()) write_file(a.out_file, text);
  out << "alignment_score\t" << score_text(report.alignment_score) << '\n'
      << "avg_input_tokens\t" << score_text(report.avg_input_tokens) << '\n'
      << "avg_output_tokens\t" << score_text(report.avg_output_tokens) << '\n'
      << "scored\t" << report.scored << "\nabstained\t" << report.abstained << "\nfailed\t" << report.failed << '\n';
  return 0;
}

// ---- report ---------------------------------------------------------------

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string format = "markdown";
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
  std::vector<RecallReport> reports;
  for (const auto& path : a.inputs) {
    auto parsed = parse_reports(read_file(path));
    reports.insert(reports.end(), parsed.begin(), parsed.end());
  }
  if (a.format != "markdown" && a.format != "json") {
    throw Error(ErrorCode::kInvalidParams, "--format must be markdown or json");
  }
  out << emit_report(reports, a.format == "json" ? ReportFormat::kJson : ReportFormat::kMarkdown);
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Page retrieval and evaluation toolkit"};
  app.require_subcommand(1);
  int jobs = 0;
  app.add_option("--jobs", jobs, "worker thread cap (0 = all cores)");

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "validate inputs and create a store");
  c_ingest->add_option("--store", ingest.store, "store directory")->required();
  c_ingest->add_option("--corpus", ingest.corpus, "pages jsonl")->required();
  c_ingest->add_option("--queries", ingest.queries, "queries jsonl")->required();
  c_ingest->add_option("--emb", ingest.emb, "page embeddings, <channel>=<file>");
  c_ingest->add_option("--qemb", ingest.qemb, "query embeddings, <channel>=<file>");
  c_ingest->add_flag("--no-normalize", ingest.no_normalize, "keep dense vectors as given");

  IndexArgs index;
  auto* c_index = app.add_subcommand("index", "build and persist BM25, graph and FDE indexes");
  c_index->add_option("--store", index.store, "store directory")->required();
  index.flags.add_to(*c_index, false);

  SearchArgs search;
  auto* c_search = app.add_subcommand("search", "run one query");
  c_search->add_option("--store", search.store, "store directory")->required();
  c_search->add_option("--query-text", search.query_text, "free-text query (bm25 only)");
  c_search->add_option("--query-id", search.query_id, "query from the store, with its embeddings");
  c_search->add_option("--k", search.k, "results to print")->capture_default_str();
  c_search->add_flag("--explain", search.explain, "per-retriever contributions of fused scores");
  c_search->add_flag("--json", search.json, "JSON output");
  search.flags.add_to(*c_search, true);

  BenchmarkArgs bench;
  auto* c_bench = app.add_subcommand("benchmark", "evaluate a suite of retrievers");
  c_bench->add_option("--store", bench.store, "store directory")->required();
  c_bench->add_option("--suite", bench.suite, "suite JSON")->required();
  c_bench->add_option("--out", bench.out_dir, "output directory")->required();

  RagArgs rag;
  auto* c_rag = app.add_subcommand("rag", "question answering with a reader and a judge");
  c_rag->add_option("--store", rag.store, "store directory")->required();
  c_rag->add_option("--modality", rag.modality, "text|image")->capture_default_str();
  c_rag->add_option("--mode", rag.mode, "standard|no_retrieval|hard_negative|oracle")->capture_default_str();
  c_rag->add_option("--k", rag.k, "context pages")->capture_default_str();
  c_rag->add_option("--votes", rag.votes, "judge votes (odd)")->capture_default_str();
  c_rag->add_option("--parallelism", rag.parallelism, "concurrent service calls")->capture_default_str();
  c_rag->add_flag("--exclude-gold-document", rag.exclude_gold_document, "hard negatives skip the whole gold document");
  c_rag->add_flag("--stub", rag.stub, "offline stub reader and judge");
  c_rag->add_option("--image-root", rag.image_root, "base directory of image references (default: store)");
  c_rag->add_option("--out", rag.out_file, "write qa_report JSON here");
  rag.flags.add_to(*c_rag, true);

  ReportArgs report;
  auto* c_report = app.add_subcommand("report", "render report JSON files");
  c_report->add_option("inputs", report.inputs, "report files")->required();
  c_report->add_option("--format", report.format, "markdown|json")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : exit_status(ErrorCode::kInvalidParams);
  }

  try {
    set_max_threads(jobs);
    if (*c_ingest) return cmd_ingest(ingest, out);
    if (*c_index) return cmd_index(index, out);
    if (*c_search) return cmd_search(search, out);
    if (*c_bench) return cmd_benchmark(bench, out);
    if (*c_rag) {
      rag.retriever_given = c_rag->count("--retriever") > 0;
      return cmd_rag(rag, out);
    }
    if (*c_report) return cmd_report(report, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_status(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_status(ErrorCode::kIo);
  }
  return exit_status(ErrorCode::kInvalidParams);
}

}  // namespace docret
