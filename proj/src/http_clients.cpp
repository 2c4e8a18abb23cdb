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

#include <cctype>
#include <cstdlib>
#include <regex>

#include "docret/checksum.hpp"
#include "docret/error.hpp"
#include "docret/rag.hpp"
#include "httplib.h"

namespace docret {

namespace {

constexpr const char* kReaderInstruction = "Answer the question as well as you can.";

constexpr const char* kJudgeInstruction =
    "You are an expert grader assessing if a system's answer is semantically aligned with the correct answer.\n"
    "Only return True if the system answer has essentially the same meaning as the correct answer.\n"
    "If the system answer misses key aspects or meaning, return False.\n"
    "Reply with a JSON object {\"score\": true} or {\"score\": false} and nothing else.";

struct Completion {
  std::string content;
  std::uint64_t prompt_tokens = 0;
  std::uint64_t completion_tokens = 0;
};

Completion post_chat(const ServiceConfig& config, const nlohmann::json& body) {
  static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config.url, m, url_re)) {
    throw Error(ErrorCode::kInvalidParams, "bad service URL '" + config.url + "'");
  }
  httplib::Client client(m[1].str());
  client.set_connection_timeout(config.timeout_seconds, 0);
  client.set_read_timeout(config.timeout_seconds, 0);
  client.set_write_timeout(config.timeout_seconds, 0);
  httplib::Headers headers;
  if (!config.token.empty()) headers.emplace("Authorization", "Bearer " + config.token);
  const std::string path = m[2].matched ? m[2].str() : "/v1/chat/completions";
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) throw Error(ErrorCode::kServiceError, "request to " + config.url + " failed: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw Error(ErrorCode::kServiceError, config.url + " answered HTTP " + std::to_string(res->status));
  }
  try {
    const auto reply = nlohmann::json::parse(res->body);
    Completion c;
    c.content = reply.at("choices").at(0).at("message").at("content").get<std::string>();
    if (reply.contains("usage")) {
      c.prompt_tokens = reply["usage"].value("prompt_tokens", std::uint64_t{0});
      c.completion_tokens = reply["usage"].value("completion_tokens", std::uint64_t{0});
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kServiceError, std::string("unexpected completion payload: ") + e.what());
  }
}

class HttpReader : public ReaderClient {
 public:
  explicit HttpReader(ServiceConfig config) : config_(std::move(config)) {}

  ReaderResponse answer(const std::string& question, std::span<const ContextItem> context) override {
    const auto c = post_chat(config_, reader_request(config_.model, question, context));
    return ReaderResponse{c.content, c.prompt_tokens, c.completion_tokens};
  }
  std::string identity() const override { return config_.model + "@" + config_.url; }

 private:
  ServiceConfig config_;
};

class HttpJudge : public JudgeClient {
 public:
  explicit HttpJudge(ServiceConfig config) : config_(std::move(config)) {}

  bool judge(const std::string& question, const std::string& system_answer,
             const std::string& reference_answer) override {
    const auto c = post_chat(config_, judge_request(config_.model, question, system_answer, reference_answer));
    return parse_judge_reply(c.content);
  }
  std::string identity() const override { return config_.model + "@" + config_.url; }

 private:
  ServiceConfig config_;
};

}  // namespace

ServiceConfig ServiceConfig::from_env(const std::string& prefix) {
  auto get = [&](const char* suffix) {
    const char* v = std::getenv((prefix + suffix).c_str());
    return v ? std::string(v) : std::string();
  };
  ServiceConfig c;
  c.url = get("_URL");
  c.model = get("_MODEL");
  c.token = get("_TOKEN");
  if (c.url.empty() || c.model.empty()) {
    throw Error(ErrorCode::kServiceError, prefix + "_URL and " + prefix + "_MODEL must be set");
  }
  return c;
}

std::unique_ptr<ReaderClient> make_http_reader(const ServiceConfig& config) {
  return std::make_unique<HttpReader>(config);
}

std::unique_ptr<JudgeClient> make_http_judge(const ServiceConfig& config) {
  return std::make_unique<HttpJudge>(config);
}

nlohmann::json reader_request(const std::string& model, const std::string& question,
                              std::span<const ContextItem> context) {
  auto content = nlohmann::json::array();
  for (const auto& item : context) {
    if (item.is_image()) {
      content.push_back({{"type", "image_url"},
                         {"image_url", {{"url", "data:" + item.mime_type + ";base64," + base64_encode(item.image_bytes)}}}});
    } else {
      content.push_back({{"type", "text"}, {"text", "Context (" + item.page_id + "):\n" + item.text}});
    }
  }
  content.push_back({{"type", "text"}, {"text", "Question: " + question}});
  return {{"model", model},
          {"temperature", 0},
          {"messages",
           {{{"role", "system"}, {"content", kReaderInstruction}}, {{"role", "user"}, {"content", content}}}}};
}

nlohmann::json judge_request(const std::string& model, const std::string& question, const std::string& system_answer,
                             const std::string& reference_answer) {
  const std::string user = "question: " + question + "\nsystem_answer: " + system_answer +
                           "\ncorrect_answer: " + reference_answer;
  return {{"model", model},
          {"messages", {{{"role", "system"}, {"content", kJudgeInstruction}}, {{"role", "user"}, {"content", user}}}}};
}

bool parse_judge_reply(std::string_view content) {
  try {
    const auto j = nlohmann::json::parse(content);
    if (j.is_object() && j.contains("score")) {
      const auto& s = j["score"];
      if (s.is_boolean()) return s.get<bool>();
      if (s.is_string()) return parse_judge_reply(s.get<std::string>());
    }
    if (j.is_boolean()) return j.get<bool>();
  } catch (const nlohmann::json::exception&) {
  }
  std::string lower(content);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  const auto t = lower.find("true");
  const auto f = lower.find("false");
  if (t == std::string::npos && f == std::string::npos) {
    throw Error(ErrorCode::kServiceError, "judge reply has no verdict: " + std::string(content.substr(0, 80)));
  }
  return t < f;
}

}  // namespace docret
