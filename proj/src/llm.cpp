#include "krail/llm.hpp"

#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <regex>
#include <thread>

#include "krail/error.hpp"
#include "krail/text.hpp"

namespace krail {

using json = nlohmann::json;

std::string_view prompt_tag_name(PromptTag tag) noexcept {
  switch (tag) {
    case PromptTag::AgentTask: return "agent.task";
    case PromptTag::AgentContext: return "agent.context";
    case PromptTag::AgentCognitive: return "agent.cognitive";
    case PromptTag::AgentTime: return "agent.time";
    case PromptTag::AttributeExtract: return "attribute.extract";
  }
  return "?";
}

std::optional<PromptTag> parse_prompt_tag(std::string_view name) {
  for (auto tag : {PromptTag::AgentTask, PromptTag::AgentContext, PromptTag::AgentCognitive,
                   PromptTag::AgentTime, PromptTag::AttributeExtract}) {
    if (prompt_tag_name(tag) == name) return tag;
  }
  return std::nullopt;
}

CaseFingerprint fingerprint_case(std::string_view data_source_text) {
  return {text::digest(text::normalize_newlines(data_source_text))};
}

std::size_t estimate_tokens(std::string_view s) noexcept { return (s.size() + 3) / 4; }

// ---------------------------------------------------------------------------
// Mock
// ---------------------------------------------------------------------------

void MockFixture::add(PromptTag tag, CaseFingerprint fp, std::string response) {
  responses_[{tag, std::move(fp)}] = std::move(response);
}

const std::string* MockFixture::find(PromptTag tag, const CaseFingerprint& fp) const {
  auto it = responses_.find({tag, fp});
  return it == responses_.end() ? nullptr : &it->second;
}

void MockFixture::merge(const MockFixture& other) {
  for (const auto& [k, v] : other.responses_) responses_[k] = v;
}

MockFixture load_fixtures(std::istream& in) {
  MockFixture out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    json j;
    try {
      j = json::parse(t);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::FormatError, "fixture line " + std::to_string(row) + ": " + e.what());
    }
    auto tag = parse_prompt_tag(j.value("tag", ""));
    if (!tag) {
      throw Error(ErrorCode::FormatError,
                  "fixture line " + std::to_string(row) + ": unknown tag '" + j.value("tag", "") + "'");
    }
    if (!j.contains("response") || !j["response"].is_string()) {
      throw Error(ErrorCode::FormatError, "fixture line " + std::to_string(row) + ": missing response");
    }
    CaseFingerprint fp;
    if (j.contains("fingerprint")) {
      fp.hex = j["fingerprint"].get<std::string>();
    } else if (j.contains("case_text")) {
      fp = fingerprint_case(j["case_text"].get<std::string>());
    } else {
      throw Error(ErrorCode::FormatError,
                  "fixture line " + std::to_string(row) + ": needs fingerprint or case_text");
    }
    out.add(*tag, std::move(fp), j["response"].get<std::string>());
  }
  return out;
}

MockFixture load_fixtures_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FormatError, "cannot open fixture file " + path.string());
  return load_fixtures(in);
}

CompletionResult MockProvider::complete(const CompletionRequest& request) {
  const auto start = std::chrono::steady_clock::now();
  if (text::trim(request.prompt).empty()) {
    throw Error(ErrorCode::InvalidArgument, "empty prompt");
  }
  const std::string* hit = fixtures_.find(request.prompt_tag, request.case_fingerprint);
  if (!hit) {
    throw Error(ErrorCode::FixtureMiss,
                "no fixture for (" + std::string(prompt_tag_name(request.prompt_tag)) + ", " +
                    request.case_fingerprint.hex + ")",
                std::string(prompt_tag_name(request.prompt_tag)));
  }
  CompletionResult r;
  r.text = *hit;
  r.provider_name = name();
  r.token_estimate = estimate_tokens(*hit);
  r.latency = std::chrono::steady_clock::now() - start;
  return r;
}

// ---------------------------------------------------------------------------
// Live
// ---------------------------------------------------------------------------

RateLimiter::RateLimiter(double requests_per_minute)
    : capacity_(std::max(1.0, requests_per_minute)),
      tokens_(capacity_),
      refill_per_second_(std::max(requests_per_minute, 1e-9) / 60.0),
      last_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
  std::unique_lock lock(mu_);
  while (true) {
    const auto now = std::chrono::steady_clock::now();
    const double elapsed = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    tokens_ = std::min(capacity_, tokens_ + elapsed * refill_per_second_);
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    const double wait = (1.0 - tokens_) / refill_per_second_;
    lock.unlock();
    std::this_thread::sleep_for(std::chrono::duration<double>(wait));
    lock.lock();
  }
}

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, kUrl)) {
    throw Error(ErrorCode::InvalidArgument, "endpoint must be an http(s) URL: '" + url + "'");
  }
  return {m[1].str(), m[2].matched ? m[2].str() : std::string("/")};
}

}  // namespace

LiveProvider::LiveProvider(LiveProviderConfig config)
    : config_(std::move(config)),
      limiter_(config_.requests_per_minute),
      sleep_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
  if (config_.api_key.empty()) {
    if (const char* key = std::getenv("KRAIL_API_KEY")) config_.api_key = key;
  }
  if (config_.model.empty()) throw Error(ErrorCode::InvalidArgument, "live provider needs a model name");
  split_endpoint(config_.endpoint);
}

CompletionResult LiveProvider::complete(const CompletionRequest& request) {
  if (text::trim(request.prompt).empty()) throw Error(ErrorCode::InvalidArgument, "empty prompt");
  const auto endpoint = split_endpoint(config_.endpoint);

  json body = {
      {"model", config_.model},
      {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
      {"max_tokens", request.max_tokens},
      {"temperature", request.temperature},
  };
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  const auto start = std::chrono::steady_clock::now();
  auto backoff = config_.retry.initial_backoff;
  const int max_attempts = std::max(1, config_.retry.max_attempts);
  std::string last_failure;
  bool last_was_status = false;

  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    limiter_.acquire();
    httplib::Client client(endpoint.origin);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    auto res = client.Post(endpoint.path, headers, payload, "application/json");

    if (!res) {
      last_failure = "transport error: " + httplib::to_string(res.error());
      last_was_status = false;
    } else if (res->status == 429 || res->status >= 500) {
      last_failure = "status " + std::to_string(res->status);
      last_was_status = true;
    } else if (res->status < 200 || res->status >= 300) {
      throw Error(ErrorCode::ProviderRefusal,
                  "provider returned status " + std::to_string(res->status) + ": " + res->body,
                  std::string(prompt_tag_name(request.prompt_tag)), res->body);
    } else {
      std::string content;
      try {
        auto j = json::parse(res->body);
        content = j.at("choices").at(0).at("message").at("content").get<std::string>();
      } catch (const json::exception& e) {
        throw Error(ErrorCode::ProviderRefusal, std::string("unreadable provider response: ") + e.what(),
                    std::string(prompt_tag_name(request.prompt_tag)), res->body);
      }
      CompletionResult r;
      r.text = std::move(content);
      r.provider_name = name();
      r.latency = std::chrono::steady_clock::now() - start;
      r.token_estimate = estimate_tokens(r.text);
      r.attempts = attempt;
      return r;
    }

    if (attempt < max_attempts) {
      sleep_(backoff);
      backoff = std::chrono::milliseconds(
          static_cast<long long>(static_cast<double>(backoff.count()) * config_.retry.multiplier));
    }
  }
  throw Error(last_was_status ? ErrorCode::ProviderRefusal : ErrorCode::ProviderUnavailable,
              "provider failed after " + std::to_string(max_attempts) + " attempts (" + last_failure + ")",
              std::string(prompt_tag_name(request.prompt_tag)));
}

}  // namespace krail
