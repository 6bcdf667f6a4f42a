#include "krail/session.hpp"

#include <ctime>
#include <fstream>
#include <mutex>
#include <random>

#include "krail/error.hpp"
#include "krail/json_codec.hpp"
#include "krail/text.hpp"

namespace krail {

using json = nlohmann::json;

std::string_view stage_name(SessionStage s) noexcept {
  switch (s) {
    case SessionStage::Created: return "Created";
    case SessionStage::Decomposed: return "Decomposed";
    case SessionStage::Attributed: return "Attributed";
    case SessionStage::Resolved: return "Resolved";
  }
  return "?";
}

std::string_view actor_name(Actor a) noexcept { return a == Actor::System ? "system" : "expert"; }

std::string now_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1,
                tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

bool can_decompose(const ReviewSession& s) noexcept { return s.stage == SessionStage::Created && !s.ablation; }
bool can_attribute(const ReviewSession& s) noexcept {
  return (s.stage == SessionStage::Decomposed && !s.ablation) || (s.stage == SessionStage::Created && s.ablation);
}
bool can_edit(const ReviewSession& s) noexcept { return s.stage == SessionStage::Attributed; }
bool can_resolve(const ReviewSession& s) noexcept { return s.stage == SessionStage::Attributed; }
bool can_reopen(const ReviewSession& s) noexcept { return s.stage == SessionStage::Resolved; }

std::vector<std::string> check_consistency(const ReviewSession& s) {
  std::vector<std::string> out;
  const bool past_decompose = s.stage != SessionStage::Created;
  const bool attributed = s.stage == SessionStage::Attributed || s.stage == SessionStage::Resolved;
  const bool resolved = s.stage == SessionStage::Resolved;
  const bool want_reports = past_decompose && !s.ablation;
  if (s.reports.has_value() != want_reports) out.emplace_back("reports presence does not match stage");
  if (s.reports && s.reports->size() != kAllAgents.size()) out.emplace_back("reports count is not 4");
  if (s.ablation && s.stage == SessionStage::Decomposed) out.emplace_back("ablation session at Decomposed");
  if (s.candidates.has_value() != attributed) out.emplace_back("candidates presence does not match stage");
  if (s.resolved_attrs.has_value() != attributed) out.emplace_back("resolved_attrs presence does not match stage");
  if (s.resolution.has_value() != resolved) out.emplace_back("resolution presence does not match stage");
  if (s.resolution && (s.resolution->ranked_matches.empty() ||
                       s.resolution->base_hep != s.resolution->ranked_matches.front().error_rate)) {
    out.emplace_back("resolution base_hep is not rank 1");
  }
  return out;
}

namespace {

std::string random_session_id() {
  static std::mutex mu;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mu);
  return text::hex64(rng());
}

AuditEntry make_entry(Actor actor, std::string action, const json& payload) {
  AuditEntry e;
  e.timestamp = now_timestamp();
  e.actor = actor;
  e.action = std::move(action);
  e.payload = payload.dump();
  e.payload_digest = text::digest(e.payload);
  return e;
}

// Records and applies an entry in one step, so live operations and replay
// share the same code path.
void commit(ReviewSession& s, AuditEntry entry) {
  ReviewSession next = s;
  apply_audit_entry(next, entry);
  s = std::move(next);
}

[[noreturn]] void illegal(const ReviewSession& s, std::string_view op) {
  throw Error(ErrorCode::IllegalTransition,
              std::string(op) + " is not allowed at stage " + std::string(stage_name(s.stage)) +
                  (s.ablation ? " (ablation session)" : ""),
              std::string(op));
}

json error_payload(const Error& e) {
  return {{"code", error_code_name(e.code())},
          {"message", e.what()},
          {"subject", e.subject()},
          {"stage", e.stage()},
          {"raw_text", e.raw_text()}};
}

void record_failure(ReviewSession& s, std::string action, const Error& e) {
  s.audit_log.push_back(make_entry(Actor::System, std::move(action), error_payload(e)));
}

long long ns(std::chrono::nanoseconds d) { return static_cast<long long>(d.count()); }

}  // namespace

ReviewSession create_session(const CaseInput& c, ShotConfig shots, bool ablation, std::string session_id) {
  validate_case(c);
  if (session_id.empty()) session_id = random_session_id();
  json payload = {{"session_id", session_id},
                  {"case_text", c.data_source_text},
                  {"table", table_code(c.table)},
                  {"shots", shots.k()},
                  {"ablation", ablation},
                  {"template_hash", prompt_template_set_hash()}};
  ReviewSession s;
  apply_audit_entry(s, make_entry(Actor::System, "created", payload));
  return s;
}

void advance_decompose(ReviewSession& s, Provider& provider, bool parallel_agents) {
  if (!can_decompose(s)) illegal(s, "decompose");
  const auto start = std::chrono::steady_clock::now();
  Decomposition d;
  try {
    d = run_decomposition(s.case_input, provider, parallel_agents);
  } catch (const Error& e) {
    record_failure(s, "decompose_failed", e);
    throw;
  }
  json reports = json::array();
  for (std::size_t i = 0; i < d.reports.size(); ++i) {
    reports.push_back({{"kind", agent_name(d.reports[i].kind)},
                       {"raw_text", d.reports[i].raw_text},
                       {"latency_ns", ns(d.latencies[i])}});
  }
  json payload = {{"reports", reports}, {"stage_ns", ns(std::chrono::steady_clock::now() - start)}};
  commit(s, make_entry(Actor::System, "decomposed", payload));
}

void advance_attribute(ReviewSession& s, const KnowledgeGraph& graph, Provider& provider,
                       const AttributeOptions& options) {
  if (!can_attribute(s)) illegal(s, "attribute");
  const auto start = std::chrono::steady_clock::now();

  const auto context = serialize_graph_context(graph, s.case_input.table, options.max_context_entries);
  const auto shots = select_few_shots(graph.store(), s.case_input.table, s.shot_config, options.exclude_reference);
  static const std::vector<AgentReport> kNoReports;
  const auto& reports = s.ablation ? kNoReports : *s.reports;

  CompletionRequest req;
  req.prompt_tag = PromptTag::AttributeExtract;
  req.prompt = build_attribute_prompt(s.case_input, reports, context, shots);
  req.case_fingerprint = fingerprint_case(s.case_input.data_source_text);

  CompletionResult result;
  try {
    result = provider.complete(req);
    extract_attributes(result.text);
  } catch (Error& e) {
    e.with_stage("attribute");
    record_failure(s, "attribute_failed", e);
    throw;
  }

  json shot_ids = json::array();
  for (const auto& sh : shots) shot_ids.push_back(sh.source_entry_id);
  json payload = {{"raw_text", result.text},
                  {"prompt_digest", text::digest(req.prompt)},
                  {"shot_entry_ids", shot_ids},
                  {"excluded_reference", options.exclude_reference.value_or("")},
                  {"latency_ns", ns(result.latency)},
                  {"stage_ns", ns(std::chrono::steady_clock::now() - start)}};
  commit(s, make_entry(Actor::System, "attributed", payload));
}

void apply_expert_edits(ReviewSession& s, const AttributeEdits& edits, Actor actor) {
  if (!can_edit(s)) illegal(s, "edit");

  auto malformed = [](std::string_view dim, const std::string& why) {
    throw Error(ErrorCode::MalformedEdit, "edit of " + std::string(dim) + " rejected: " + why, std::string(dim));
  };
  std::vector<std::pair<Dimension, std::string>> changes;
  if (edits.pif) {
    if (!try_parse_pif_code(*edits.pif)) malformed("pif", "malformed PIF code '" + *edits.pif + "'");
    changes.emplace_back(Dimension::Pif, std::string(text::trim(*edits.pif)));
  }
  if (edits.cfms) {
    if (!parse_cfm_set(*edits.cfms)) malformed("cfm", "malformed CFM set '" + *edits.cfms + "'");
    changes.emplace_back(Dimension::Cfm, render_cfm_set(*parse_cfm_set(*edits.cfms)));
  }
  auto text_edit = [&](const std::optional<std::string>& v, Dimension d) {
    if (!v) return;
    if (text::trim(*v).empty()) malformed(dimension_key(d), "empty value");
    changes.emplace_back(d, std::string(text::trim(*v)));
  };
  text_edit(edits.task, Dimension::TaskAndErrorMeasure);
  text_edit(edits.pif_measure, Dimension::PifMeasure);
  text_edit(edits.other_pifs, Dimension::OtherPifsAndUncertainty);

  ReviewSession next = s;
  if (changes.empty()) {
    apply_audit_entry(next, make_entry(actor, "expert_edit_noop", json::object()));
  }
  for (const auto& [dim, value] : changes) {
    apply_audit_entry(next, make_entry(actor, "expert_edit", {{"dimension", dimension_key(dim)}, {"value", value}}));
  }
  s = std::move(next);
}

void advance_resolve(ReviewSession& s, const KnowledgeGraph& graph, const ScoreWeights& weights) {
  if (!can_resolve(s)) illegal(s, "resolve");
  const auto start = std::chrono::steady_clock::now();
  HepResolution r;
  try {
    r = resolve_hep(graph, s.case_input.table, *s.resolved_attrs, weights);
  } catch (Error& e) {
    e.with_stage("resolve");
    record_failure(s, "resolve_failed", e);
    throw;
  }
  json payload = {{"attributes", codec::to_json(*s.resolved_attrs)},
                  {"resolution", codec::to_json(r)},
                  {"stage_ns", ns(std::chrono::steady_clock::now() - start)}};
  commit(s, make_entry(Actor::System, "resolved", payload));
}

void reopen_session(ReviewSession& s, Actor actor) {
  if (!can_reopen(s)) illegal(s, "reopen");
  commit(s, make_entry(actor, "reopened", json::object()));
}

// ---------------------------------------------------------------------------
// Event application
// ---------------------------------------------------------------------------

void apply_audit_entry(ReviewSession& s, const AuditEntry& entry) {
  const json p = entry.payload.empty() ? json::object() : json::parse(entry.payload);
  const auto& a = entry.action;

  if (a == "created") {
    auto table = parse_table_id(p.at("table").get<std::string>());
    if (!table) throw Error(ErrorCode::FormatError, "created event has an unknown table");
    s = ReviewSession{};
    s.session_id = p.at("session_id").get<std::string>();
    s.case_input = {p.at("case_text").get<std::string>(), *table};
    s.shot_config = ShotConfig::of(p.at("shots").get<int>());
    s.ablation = p.at("ablation").get<bool>();
    s.template_hash = p.value("template_hash", "");
    s.stage = SessionStage::Created;
  } else if (a == "decomposed") {
    std::vector<AgentReport> reports;
    for (const auto& r : p.at("reports")) {
      auto kind = parse_agent_name(r.at("kind").get<std::string>());
      if (!kind) throw Error(ErrorCode::FormatError, "decomposed event has an unknown agent");
      reports.push_back(parse_agent_report(*kind, r.at("raw_text").get<std::string>()));
    }
    s.reports = std::move(reports);
    s.timings["decompose"] = std::chrono::nanoseconds(p.at("stage_ns").get<long long>());
    s.stage = SessionStage::Decomposed;
  } else if (a == "attributed") {
    auto candidates = extract_attributes(p.at("raw_text").get<std::string>());
    s.resolved_attrs = resolve_from_rank1(candidates);
    s.candidates = std::move(candidates);
    s.timings["attribute"] = std::chrono::nanoseconds(p.at("stage_ns").get<long long>());
    s.stage = SessionStage::Attributed;
  } else if (a == "expert_edit") {
    auto dim = parse_dimension_key(p.at("dimension").get<std::string>());
    if (!dim || !s.resolved_attrs) throw Error(ErrorCode::FormatError, "bad expert_edit event");
    const auto value = p.at("value").get<std::string>();
    auto& attrs = *s.resolved_attrs;
    switch (*dim) {
      case Dimension::Pif: attrs.pif = parse_pif_code(value); break;
      case Dimension::Cfm: attrs.cfms = parse_cfm_set(value).value(); break;
      case Dimension::TaskAndErrorMeasure: attrs.task = value; break;
      case Dimension::PifMeasure: attrs.pif_measure = value; break;
      case Dimension::OtherPifsAndUncertainty: attrs.other_pifs = value; break;
    }
    attrs.provenance[static_cast<std::size_t>(*dim)] = Provenance::ExpertEdited;
  } else if (a == "resolved") {
    s.resolution = codec::resolution_from_json(p.at("resolution"));
    s.timings["resolve"] = std::chrono::nanoseconds(p.at("stage_ns").get<long long>());
    s.stage = SessionStage::Resolved;
  } else if (a == "reopened") {
    s.resolution.reset();
    s.stage = SessionStage::Attributed;
  } else if (a != "expert_edit_noop" && a != "decompose_failed" && a != "attribute_failed" &&
             a != "resolve_failed") {
    throw Error(ErrorCode::FormatError, "unknown audit action '" + a + "'");
  }
  s.audit_log.push_back(entry);
}

ReviewSession replay_session(const std::vector<AuditEntry>& log) {
  if (log.empty() || log.front().action != "created") {
    throw Error(ErrorCode::FormatError, "session log must start with a created entry");
  }
  ReviewSession s;
  for (const auto& e : log) apply_audit_entry(s, e);
  return s;
}

// ---------------------------------------------------------------------------
// Views
// ---------------------------------------------------------------------------

namespace {

json timings_json(const ReviewSession& s) {
  json t = json::object();
  for (const auto& [k, v] : s.timings) t[k] = std::chrono::duration<double>(v).count();
  return t;
}

json audit_json(const AuditEntry& e) {
  return {{"timestamp", e.timestamp},
          {"actor", actor_name(e.actor)},
          {"action", e.action},
          {"payload_digest", e.payload_digest},
          {"payload", e.payload}};
}

}  // namespace

json session_export(const ReviewSession& s) {
  json out = {{"session_id", s.session_id},
              {"case", {{"data_source_text", s.case_input.data_source_text}, {"table", table_code(s.case_input.table)}}},
              {"stage", stage_name(s.stage)},
              {"shots", s.shot_config.k()},
              {"ablation", s.ablation},
              {"template_hash", s.template_hash},
              {"timings_seconds", timings_json(s)}};
  out["resolved_attributes"] = s.resolved_attrs ? codec::to_json(*s.resolved_attrs) : json(nullptr);
  out["resolution"] = s.resolution ? codec::to_json(*s.resolution) : json(nullptr);
  return out;
}

json session_snapshot(const ReviewSession& s) {
  json out = session_export(s);
  json reports = json::array();
  if (s.reports) {
    for (const auto& r : *s.reports) reports.push_back(codec::to_json(r));
  }
  out["reports"] = s.reports ? reports : json(nullptr);
  out["candidates"] = s.candidates ? codec::to_json(*s.candidates) : json(nullptr);
  json audit = json::array();
  for (const auto& e : s.audit_log) audit.push_back(audit_json(e));
  out["audit_log"] = audit;
  out["allowed_actions"] = {{"decompose", can_decompose(s)},
                            {"attribute", can_attribute(s)},
                            {"edit", can_edit(s)},
                            {"resolve", can_resolve(s)},
                            {"reopen", can_reopen(s)}};
  return out;
}

// ---------------------------------------------------------------------------
// Journal
// ---------------------------------------------------------------------------

namespace {
std::mutex& journal_mutex() {
  static std::mutex mu;
  return mu;
}
}  // namespace

SessionJournal::SessionJournal(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::filesystem::path SessionJournal::path_for(std::string_view session_id) const {
  return dir_ / (std::string(session_id) + ".jsonl");
}

void SessionJournal::sync(const ReviewSession& s) {
  std::lock_guard lock(journal_mutex());
  auto it = written_.find(s.session_id);
  if (it == written_.end()) {
    const auto file = path_for(s.session_id);
    const std::size_t existing = std::filesystem::exists(file) ? read(file).size() : 0;
    it = written_.emplace(s.session_id, existing).first;
  }
  if (it->second >= s.audit_log.size()) return;
  std::ofstream out(path_for(s.session_id), std::ios::app | std::ios::binary);
  if (!out) throw Error(ErrorCode::FormatError, "cannot write journal for session " + s.session_id);
  for (std::size_t i = it->second; i < s.audit_log.size(); ++i) {
    out << audit_json(s.audit_log[i]).dump() << '\n';
  }
  out.flush();
  it->second = s.audit_log.size();
}

std::vector<AuditEntry> SessionJournal::read(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::UnknownSession, "no journal at " + file.string());
  std::vector<AuditEntry> out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (text::trim(line).empty()) continue;
    try {
      const auto j = json::parse(line);
      AuditEntry e;
      e.timestamp = j.at("timestamp").get<std::string>();
      e.actor = j.at("actor").get<std::string>() == "expert" ? Actor::Expert : Actor::System;
      e.action = j.at("action").get<std::string>();
      e.payload_digest = j.at("payload_digest").get<std::string>();
      e.payload = j.at("payload").get<std::string>();
      if (text::digest(e.payload) != e.payload_digest) {
        throw Error(ErrorCode::FormatError, "journal line " + std::to_string(row) + ": payload digest mismatch");
      }
      out.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw Error(ErrorCode::FormatError, "journal line " + std::to_string(row) + ": " + ex.what());
    }
  }
  return out;
}

ReviewSession SessionJournal::load(std::string_view session_id) const {
  return replay_session(read(path_for(session_id)));
}

std::vector<std::string> SessionJournal::session_ids() const {
  std::vector<std::string> ids;
  for (const auto& de : std::filesystem::directory_iterator(dir_)) {
    if (de.path().extension() == ".jsonl") ids.push_back(de.path().stem().string());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace krail
