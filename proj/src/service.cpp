#include "krail/service.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include <httplib.h>

#include "krail/json_codec.hpp"
#include "krail/text.hpp"

namespace krail {

using json = nlohmann::json;

std::shared_ptr<Provider> make_provider(const ProviderSettings& settings) {
  if (settings.kind == "mock") {
    MockFixture fixtures;
    for (const auto& f : settings.fixture_files) fixtures.merge(load_fixtures_file(f));
    return std::make_shared<MockProvider>(std::move(fixtures));
  }
  if (settings.kind == "live") return std::make_shared<LiveProvider>(settings.live);
  throw Error(ErrorCode::InvalidArgument, "unknown provider '" + settings.kind + "' (expected mock or live)");
}

int http_status_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::UnknownSession: return 404;
    case ErrorCode::IllegalTransition: return 409;
    case ErrorCode::ProviderUnavailable:
    case ErrorCode::ProviderRefusal:
    case ErrorCode::FixtureMiss: return 502;
    case ErrorCode::MissingSection:
    case ErrorCode::EmptySection:
    case ErrorCode::MissingDimension:
    case ErrorCode::NoValidCandidate:
    case ErrorCode::EmptyTable: return 422;
    default: return 400;
  }
}

namespace {

std::string random_token() {
  static std::mutex mu;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mu);
  return text::hex64(rng()) + text::hex64(rng());
}

ApiResponse error_response(const Error& e) {
  return {http_status_for(e.code()),
          {{"error",
            {{"code", error_code_name(e.code())},
             {"message", e.what()},
             {"subject", e.subject()},
             {"stage", e.stage()},
             {"raw_text", e.raw_text()}}}}};
}

ApiResponse plain_error(int status, std::string_view code, const std::string& message) {
  return {status, {{"error", {{"code", code}, {"message", message}}}}};
}

std::vector<std::string> split_path(std::string_view path) {
  if (auto q = path.find('?'); q != std::string_view::npos) path = path.substr(0, q);
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= path.size()) {
    const auto end = path.find('/', start);
    const auto piece = path.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    if (!piece.empty()) parts.emplace_back(piece);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return parts;
}

ShotConfig shots_from(const json& body, ShotConfig fallback) {
  if (!body.contains("shots")) return fallback;
  if (!body["shots"].is_number_integer()) throw Error(ErrorCode::InvalidArgument, "shots must be an integer");
  return ShotConfig::of(body["shots"].get<int>());
}

std::string string_field(const json& body, const char* key) {
  if (!body.contains(key) || !body[key].is_string()) {
    throw Error(ErrorCode::InvalidArgument, std::string("field '") + key + "' must be a string");
  }
  return body[key].get<std::string>();
}

}  // namespace

Service::Service(ServiceConfig config, std::shared_ptr<Provider> provider)
    : config_(std::move(config)), provider_(std::move(provider)), journal_(config_.journal_dir) {
  auto store = std::make_shared<const EntryStore>(load_idtable_dir(config_.data_dir));
  if (store->empty()) throw Error(ErrorCode::FormatError, "no entries in " + config_.data_dir.string());
  graph_ = std::make_shared<const KnowledgeGraph>(build_graph(store));
  restore_sessions();
}

Service::~Service() {
  stop();
  wait_for_eval_runs();
}

void Service::restore_sessions() {
  for (const auto& id : journal_.session_ids()) {
    auto slot = std::make_shared<SessionSlot>();
    slot->session = journal_.load(id);
    std::ifstream tok(config_.journal_dir / (id + ".token"));
    std::getline(tok, slot->token_digest);
    sessions_[id] = std::move(slot);
  }
}

void Service::persist_token(const std::string& id, const std::string& digest) const {
  std::ofstream out(config_.journal_dir / (id + ".token"), std::ios::trunc);
  out << digest << '\n';
}

std::size_t Service::session_count() const {
  std::shared_lock lock(sessions_mu_);
  return sessions_.size();
}

std::shared_ptr<Service::SessionSlot> Service::find_slot(const std::string& id) const {
  std::shared_lock lock(sessions_mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::UnknownSession, "unknown session '" + id + "'", id);
  return it->second;
}

ApiResponse Service::dispatch(const ApiRequest& req) {
  try {
    json body = json::object();
    if (!text::trim(req.body).empty()) {
      body = json::parse(req.body, nullptr, false);
      if (body.is_discarded() || !body.is_object()) {
        return plain_error(400, "FormatError", "request body must be a JSON object");
      }
    }
    const auto parts = split_path(req.path);
    const auto& m = req.method;

    if (parts.size() == 1 && parts[0] == "sessions" && m == "POST") return create_session_endpoint(body);
    if (parts.size() == 2 && parts[0] == "sessions" && m == "GET") {
      return session_endpoint(m, parts[1], "", body, req.session_token);
    }
    if (parts.size() == 3 && parts[0] == "sessions") {
      return session_endpoint(m, parts[1], parts[2], body, req.session_token);
    }
    if (parts.size() == 1 && parts[0] == "tables" && m == "GET") return tables_endpoint();
    if (parts.size() == 3 && parts[0] == "tables" && parts[2] == "entries" && m == "GET") {
      return table_entries_endpoint(parts[1]);
    }
    if (parts.size() == 2 && parts[0] == "eval" && parts[1] == "runs" && m == "POST") {
      return start_eval_endpoint(body);
    }
    if (parts.size() == 3 && parts[0] == "eval" && parts[1] == "runs" && m == "GET") {
      return eval_status_endpoint(parts[2]);
    }
    return plain_error(404, "NotFound", "no route for " + m + " " + req.path);
  } catch (const Error& e) {
    return error_response(e);
  } catch (const json::exception& e) {
    return plain_error(400, "FormatError", e.what());
  } catch (const std::exception& e) {
    return plain_error(500, "Internal", e.what());
  }
}

ApiResponse Service::create_session_endpoint(const json& body) {
  const auto table = parse_table_id(string_field(body, "table"));
  if (!table) throw Error(ErrorCode::InvalidCase, "table must be SF, IAR or TC", "table");
  CaseInput c{string_field(body, "case_text"), *table};
  const bool ablation = body.value("ablation", false);

  auto slot = std::make_shared<SessionSlot>();
  slot->session = create_session(c, shots_from(body, config_.default_shots), ablation);
  const auto token = random_token();
  slot->token_digest = text::digest(token);
  const auto id = slot->session.session_id;
  {
    std::lock_guard lock(slot->mu);
    journal_.sync(slot->session);
    persist_token(id, slot->token_digest);
  }
  {
    std::unique_lock lock(sessions_mu_);
    sessions_[id] = slot;
  }
  return {201, {{"session_id", id}, {"token", token}, {"stage", stage_name(SessionStage::Created)}}};
}

ApiResponse Service::session_endpoint(const std::string& method, const std::string& id, const std::string& action,
                                      const json& body, const std::string& token) {
  auto slot = find_slot(id);
  std::lock_guard lock(slot->mu);
  auto& s = slot->session;

  if (action.empty()) return {200, session_snapshot(s)};

  const bool known = (method == "POST" && (action == "decompose" || action == "attribute" ||
                                           action == "resolve" || action == "reopen")) ||
                     (method == "PUT" && action == "attributes");
  if (!known) return plain_error(404, "NotFound", "no route for " + method + " /sessions/" + id + "/" + action);
  if (token.empty() || text::digest(token) != slot->token_digest) {
    return plain_error(403, "Forbidden", "missing or wrong session token");
  }

  // Failed model calls still append an audit entry, so sync on both paths.
  try {
    if (action == "decompose") {
      advance_decompose(s, *provider_, config_.parallel_agents);
    } else if (action == "attribute") {
      AttributeOptions opts;
      if (body.contains("exclude_reference")) opts.exclude_reference = string_field(body, "exclude_reference");
      advance_attribute(s, *graph_, *provider_, opts);
    } else if (action == "resolve") {
      advance_resolve(s, *graph_);
    } else if (action == "reopen") {
      reopen_session(s, Actor::Expert);
    } else {
      AttributeEdits edits;
      for (const auto& [key, value] : body.items()) {
        if (!value.is_string()) throw Error(ErrorCode::MalformedEdit, "edit of " + key + " must be a string", key);
        auto dim = parse_dimension_key(key);
        if (!dim) throw Error(ErrorCode::MalformedEdit, "unknown dimension '" + key + "'", key);
        auto v = value.get<std::string>();
        switch (*dim) {
          case Dimension::Pif: edits.pif = v; break;
          case Dimension::Cfm: edits.cfms = v; break;
          case Dimension::TaskAndErrorMeasure: edits.task = v; break;
          case Dimension::PifMeasure: edits.pif_measure = v; break;
          case Dimension::OtherPifsAndUncertainty: edits.other_pifs = v; break;
        }
      }
      apply_expert_edits(s, edits, Actor::Expert);
    }
  } catch (...) {
    journal_.sync(s);
    throw;
  }
  journal_.sync(s);
  return {200, session_snapshot(s)};
}

ApiResponse Service::tables_endpoint() const {
  json tables = json::array();
  const auto& store = graph_->store();
  for (TableId t : store.tables()) {
    tables.push_back({{"table", table_code(t)}, {"title", table_title(t)}, {"entries", store.by_table(t).size()}});
  }
  return {200, {{"tables", tables}, {"total_entries", store.size()}}};
}

ApiResponse Service::table_entries_endpoint(const std::string& code) const {
  const auto t = parse_table_id(code);
  if (!t) return plain_error(404, "NotFound", "unknown table '" + code + "'");
  json entries = json::array();
  for (auto i : graph_->table_entries(*t)) entries.push_back(codec::to_json(graph_->store().entries()[i]));
  return {200, {{"table", table_code(*t)}, {"entries", entries}}};
}

ApiResponse Service::start_eval_endpoint(const json& body) {
  std::vector<EvalCase> dataset;
  if (body.contains("dataset")) {
    std::istringstream in(string_field(body, "dataset"));
    dataset = load_eval_dataset(in, graph_->store());
  } else if (body.contains("dataset_path")) {
    dataset = load_eval_dataset_file(string_field(body, "dataset_path"), graph_->store());
  } else {
    throw Error(ErrorCode::InvalidArgument, "provide 'dataset' (CSV text) or 'dataset_path'");
  }
  EvalConfig cfg;
  cfg.shots = shots_from(body, config_.default_shots);
  cfg.ablation = body.value("ablation", false);
  cfg.seed = body.value("seed", std::uint64_t{0});
  cfg.n_resamples = body.value("n_resamples", kDefaultResamples);
  if (cfg.n_resamples == 0) throw Error(ErrorCode::InvalidArgument, "n_resamples must be positive");

  const auto id = "run-" + std::to_string(++eval_counter_);
  const auto n = dataset.size();
  auto run = std::make_shared<EvalRun>();
  std::lock_guard lock(eval_mu_);
  eval_runs_[id] = run;
  eval_threads_.emplace_back([this, run, dataset = std::move(dataset), cfg] {
    try {
      auto summary = run_evaluation(dataset, *graph_, *provider_, cfg);
      std::optional<TableId> table;
      if (!dataset.empty()) table = dataset.front().case_input.table;
      auto result = summary_to_json(summary, true);
      auto report = render_summary(summary, table);
      std::lock_guard l(eval_mu_);
      run->result = std::move(result);
      run->report = std::move(report);
      run->status = "done";
    } catch (const std::exception& e) {
      std::lock_guard l(eval_mu_);
      run->error = e.what();
      run->status = "failed";
    }
  });
  return {202, {{"run_id", id}, {"status", "running"}, {"n", n}}};
}

ApiResponse Service::eval_status_endpoint(const std::string& id) {
  std::lock_guard lock(eval_mu_);
  auto it = eval_runs_.find(id);
  if (it == eval_runs_.end()) return plain_error(404, "NotFound", "unknown evaluation run '" + id + "'");
  const auto& run = *it->second;
  json out = {{"run_id", id}, {"status", run.status}};
  if (run.status == "done") {
    out["summary"] = run.result;
    out["report"] = run.report;
  }
  if (run.status == "failed") out["error"] = run.error;
  return {200, out};
}

void Service::wait_for_eval_runs() {
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(eval_mu_);
    threads.swap(eval_threads_);
  }
  for (auto& t : threads) {
    if (t.joinable()) t.join();
  }
}

void Service::install_routes() {
  if (server_) return;
  server_ = std::make_unique<httplib::Server>();
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    ApiRequest api{req.method, req.path, req.body, req.get_header_value(std::string(kSessionTokenHeader))};
    const auto out = dispatch(api);
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  };
  server_->Get(".*", handler);
  server_->Post(".*", handler);
  server_->Put(".*", handler);
  server_->set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  server_->Options(".*", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, PUT, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type, " + std::string(kSessionTokenHeader));
    res.status = 204;
  });
}

void Service::listen() {
  install_routes();
  if (!server_->bind_to_port(config_.host, config_.port)) {
    throw Error(ErrorCode::InvalidArgument,
                "cannot bind " + config_.host + ":" + std::to_string(config_.port) + " (port busy?)");
  }
  server_->listen_after_bind();
}

int Service::bind_any_port() {
  install_routes();
  const int port = server_->bind_to_any_port(config_.host);
  if (port < 0) throw Error(ErrorCode::InvalidArgument, "cannot bind an ephemeral port on " + config_.host);
  return port;
}

void Service::listen_after_bind() { server_->listen_after_bind(); }

void Service::stop() {
  if (server_) server_->stop();
}

}  // namespace krail
