#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "krail/error.hpp"
#include "krail/eval.hpp"
#include "krail/graph.hpp"
#include "krail/llm.hpp"
#include "krail/session.hpp"

namespace httplib {
class Server;
}

namespace krail {

struct ProviderSettings {
  std::string kind = "mock";  // "mock" or "live"
  std::vector<std::filesystem::path> fixture_files;
  LiveProviderConfig live;
};

/// Throws Error(InvalidArgument) for an unknown kind.
std::shared_ptr<Provider> make_provider(const ProviderSettings& settings);

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path data_dir = "data";
  std::filesystem::path journal_dir = "journal";
  ShotConfig default_shots = ShotConfig::of(5);
  bool parallel_agents = false;
};

inline constexpr std::string_view kSessionTokenHeader = "X-Session-Token";

struct ApiRequest {
  std::string method;
  std::string path;
  std::string body;
  std::string session_token;
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

/// HTTP adapter over review sessions and evaluation runs. Every state change
/// goes through the session operations; the store and graph are loaded once
/// and shared read-only.
class Service {
 public:
  /// Throws Error when the data directory has no parseable IDTABLE file.
  Service(ServiceConfig config, std::shared_ptr<Provider> provider);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Transport-independent request handling, also used by tests.
  ApiResponse dispatch(const ApiRequest& request);

  /// Blocks until stop(). Throws Error(InvalidArgument) if the port is busy.
  void listen();
  /// Binds to an ephemeral port and returns it; call listen_after_bind() next.
  int bind_any_port();
  void listen_after_bind();
  void stop();

  const KnowledgeGraph& graph() const noexcept { return *graph_; }
  std::size_t session_count() const;
  /// Waits for background evaluation runs to finish.
  void wait_for_eval_runs();

 private:
  struct SessionSlot {
    std::mutex mu;
    ReviewSession session;
    std::string token_digest;
  };
  struct EvalRun {
    std::string status = "running";  // running, done, failed
    nlohmann::json result;
    std::string report;
    std::string error;
  };

  ApiResponse create_session_endpoint(const nlohmann::json& body);
  ApiResponse session_endpoint(const std::string& method, const std::string& id, const std::string& action,
                               const nlohmann::json& body, const std::string& token);
  ApiResponse tables_endpoint() const;
  ApiResponse table_entries_endpoint(const std::string& table) const;
  ApiResponse start_eval_endpoint(const nlohmann::json& body);
  ApiResponse eval_status_endpoint(const std::string& id);

  std::shared_ptr<SessionSlot> find_slot(const std::string& id) const;
  void restore_sessions();
  void persist_token(const std::string& id, const std::string& digest) const;
  void install_routes();

  ServiceConfig config_;
  std::shared_ptr<Provider> provider_;
  std::shared_ptr<const KnowledgeGraph> graph_;
  SessionJournal journal_;

  mutable std::shared_mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<SessionSlot>> sessions_;

  std::mutex eval_mu_;
  std::map<std::string, std::shared_ptr<EvalRun>> eval_runs_;
  std::vector<std::thread> eval_threads_;
  std::atomic<std::uint64_t> eval_counter_{0};

  std::unique_ptr<httplib::Server> server_;
};

/// HTTP status for an error code.
int http_status_for(ErrorCode code) noexcept;

}  // namespace krail
