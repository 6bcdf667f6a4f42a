#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace krail {

/// Closed registry of pipeline stages that talk to a model.
enum class PromptTag { AgentTask, AgentContext, AgentCognitive, AgentTime, AttributeExtract };

std::string_view prompt_tag_name(PromptTag tag) noexcept;  // "agent.task", ...
std::optional<PromptTag> parse_prompt_tag(std::string_view name);

/// Stable hash of a case's data-source text. Line endings and trailing
/// whitespace do not affect it.
struct CaseFingerprint {
  std::string hex;

  friend bool operator==(const CaseFingerprint&, const CaseFingerprint&) = default;
  friend auto operator<=>(const CaseFingerprint&, const CaseFingerprint&) = default;
};

CaseFingerprint fingerprint_case(std::string_view data_source_text);

struct CompletionRequest {
  PromptTag prompt_tag = PromptTag::AgentTask;
  std::string prompt;
  int max_tokens = 2048;
  double temperature = 0.0;
  CaseFingerprint case_fingerprint;
};

struct CompletionResult {
  std::string text;
  std::string provider_name;
  std::chrono::nanoseconds latency{0};
  std::size_t token_estimate = 0;
  int attempts = 1;
};

class Provider {
 public:
  virtual ~Provider() = default;
  /// Throws Error(ProviderUnavailable | ProviderRefusal | FixtureMiss).
  virtual CompletionResult complete(const CompletionRequest& request) = 0;
  virtual std::string name() const = 0;
};

/// Canned responses keyed by (prompt tag, case fingerprint).
class MockFixture {
 public:
  void add(PromptTag tag, CaseFingerprint fp, std::string response);
  void add_for_case(PromptTag tag, std::string_view case_text, std::string response) {
    add(tag, fingerprint_case(case_text), std::move(response));
  }
  const std::string* find(PromptTag tag, const CaseFingerprint& fp) const;
  std::size_t size() const noexcept { return responses_.size(); }

  /// Merges `other` into this set; entries in `other` win.
  void merge(const MockFixture& other);

 private:
  std::map<std::pair<PromptTag, CaseFingerprint>, std::string> responses_;
};

/// JSON-lines fixture file. Each line: {"tag": ..., "fingerprint": ... |
/// "case_text": ..., "response": ...}. Blank lines and lines starting with
/// '#' are ignored.
MockFixture load_fixtures(std::istream& in);
MockFixture load_fixtures_file(const std::filesystem::path& path);

/// Pure function of (fixture set, request). A missing key throws FixtureMiss.
class MockProvider final : public Provider {
 public:
  explicit MockProvider(MockFixture fixtures) : fixtures_(std::move(fixtures)) {}
  CompletionResult complete(const CompletionRequest& request) override;
  std::string name() const override { return "mock"; }

 private:
  MockFixture fixtures_;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
};

/// Token bucket sized to one minute of requests.
class RateLimiter {
 public:
  explicit RateLimiter(double requests_per_minute);
  /// Blocks until a token is available.
  void acquire();

 private:
  std::mutex mu_;
  double capacity_;
  double tokens_;
  double refill_per_second_;
  std::chrono::steady_clock::time_point last_;
};

struct LiveProviderConfig {
  std::string endpoint;  // e.g. https://api.example.com/v1/chat/completions
  std::string model;
  std::string api_key;   // from KRAIL_API_KEY when empty
  double requests_per_minute = 60.0;
  RetryPolicy retry;
  std::chrono::seconds timeout{120};
};

/// Minimal chat-completion client: POST {model, messages, max_tokens,
/// temperature}, read choices[0].message.content. Transport failures and
/// 429/5xx responses are retried with exponential backoff.
class LiveProvider final : public Provider {
 public:
  explicit LiveProvider(LiveProviderConfig config);
  CompletionResult complete(const CompletionRequest& request) override;
  std::string name() const override { return "live:" + config_.model; }

  // Test seam; defaults to std::this_thread::sleep_for.
  void set_sleeper(std::function<void(std::chrono::milliseconds)> sleeper) { sleep_ = std::move(sleeper); }

 private:
  LiveProviderConfig config_;
  RateLimiter limiter_;
  std::function<void(std::chrono::milliseconds)> sleep_;
};

std::size_t estimate_tokens(std::string_view text) noexcept;

}  // namespace krail
