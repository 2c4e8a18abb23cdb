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

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "docret/corpus.hpp"
#include "json.hpp"

namespace fixtures {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("docret-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  f << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void write_pages(const std::filesystem::path& path, const std::vector<docret::PageRecord>& pages) {
  std::string out;
  for (const auto& p : pages) {
    nlohmann::ordered_json j{{"doc_id", p.doc_id}, {"page_id", p.page_id}, {"page_index", p.page_index}, {"text", p.text}};
    if (p.image_ref) j["image_ref"] = *p.image_ref;
    out += j.dump() + "\n";
  }
  write_text(path, out);
}

inline void write_queries(const std::filesystem::path& path, const std::vector<docret::QueryRecord>& queries) {
  std::string out;
  for (const auto& q : queries) {
    out += nlohmann::ordered_json{{"query_id", q.query_id},
                                  {"question", q.question},
                                  {"gold_page_id", q.gold_page_id},
                                  {"reference_answer", q.reference_answer}}
               .dump() +
           "\n";
  }
  write_text(path, out);
}

struct CliResult {
  int status = 0;
  std::string out;
  std::string err;
};

inline CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "docret");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliResult r;
  r.status = docret::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

}  // namespace fixtures
