#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "krail/agents.hpp"
#include "krail/attributes.hpp"
#include "krail/graph.hpp"
#include "krail/llm.hpp"
#include "krail/resolver.hpp"

namespace krail {

enum class SessionStage { Created, Decomposed, Attributed, Resolved };
std::string_view stage_name(SessionStage s) noexcept;

enum class Actor { System, Expert };
std::string_view actor_name(Actor a) noexcept;

struct AuditEntry {
  std::string timestamp;  // UTC, ISO-8601 with milliseconds
  Actor actor = Actor::System;
  std::string action;
  std::string payload_digest;
  std::string payload;  // JSON text

  friend bool operator==(const AuditEntry&, const AuditEntry&) = default;
};

/// A case's lifecycle from input to resolved base HEP.
///
/// Legal moves: Created -> Decomposed -> Attributed -> Resolved, plus
/// Attributed -> Attributed (expert edit) and Resolved -> Attributed (reopen).
/// Ablation sessions skip decomposition: Created -> Attributed.
///
/// Every operation is recorded as an audit entry whose payload is enough to
/// re-apply it, so replaying the audit log rebuilds the session exactly.
struct ReviewSession {
  std::string session_id;
  CaseInput case_input;
  SessionStage stage = SessionStage::Created;
  std::optional<std::vector<AgentReport>> reports;
  std::optional<CandidateAttributeSet> candidates;
  std::optional<ResolvedAttributeSet> resolved_attrs;
  std::optional<HepResolution> resolution;
  ShotConfig shot_config;
  bool ablation = false;
  std::string template_hash;
  std::map<std::string, std::chrono::nanoseconds> timings;  // "decompose", "attribute", "resolve"
  std::vector<AuditEntry> audit_log;
};

// Transition predicates, shared by the operations, the service and tests.
bool can_decompose(const ReviewSession& s) noexcept;
bool can_attribute(const ReviewSession& s) noexcept;
bool can_edit(const ReviewSession& s) noexcept;
bool can_resolve(const ReviewSession& s) noexcept;
bool can_reopen(const ReviewSession& s) noexcept;

/// Empty when the stage and the optional fields agree.
std::vector<std::string> check_consistency(const ReviewSession& s);

/// Throws Error(InvalidCase). A fresh random id is used when `session_id` is empty.
ReviewSession create_session(const CaseInput& c, ShotConfig shots, bool ablation, std::string session_id = {});

/// Operations below either succeed, or throw leaving the session as it was.
/// The exception: model/provider failures during decompose, attribute and
/// resolve append a "*_failed" audit entry (with raw model text) before
/// rethrowing. Illegal transitions throw Error(IllegalTransition) and never
/// touch the session.
void advance_decompose(ReviewSession& s, Provider& provider, bool parallel_agents = false);

struct AttributeOptions {
  std::size_t max_context_entries = kDefaultContextEntries;
  std::optional<std::string> exclude_reference;  // few-shot leakage guard
};

void advance_attribute(ReviewSession& s, const KnowledgeGraph& graph, Provider& provider,
                       const AttributeOptions& options = {});

/// Partial edit; each present field overwrites one dimension.
struct AttributeEdits {
  std::optional<std::string> pif;
  std::optional<std::string> cfms;
  std::optional<std::string> task;
  std::optional<std::string> pif_measure;
  std::optional<std::string> other_pifs;

  bool empty() const noexcept { return !pif && !cfms && !task && !pif_measure && !other_pifs; }
};

/// Throws Error(IllegalTransition) or Error(MalformedEdit); validates every
/// field before applying any.
void apply_expert_edits(ReviewSession& s, const AttributeEdits& edits, Actor actor = Actor::Expert);

void advance_resolve(ReviewSession& s, const KnowledgeGraph& graph, const ScoreWeights& weights = {});

/// Resolved -> Attributed after the expert rejects a result.
void reopen_session(ReviewSession& s, Actor actor = Actor::Expert);

/// Re-applies one audit entry. Used by journal replay.
void apply_audit_entry(ReviewSession& s, const AuditEntry& entry);

/// Rebuilds a session from its audit log.
ReviewSession replay_session(const std::vector<AuditEntry>& log);

/// Full snapshot: case, stage, reports, candidates, attributes, resolution,
/// timings, audit log and the currently legal actions.
nlohmann::json session_snapshot(const ReviewSession& s);
/// Case, attributes, resolution and timings only.
nlohmann::json session_export(const ReviewSession& s);

/// One JSON record per line, one file per session: <dir>/<session_id>.jsonl.
class SessionJournal {
 public:
  explicit SessionJournal(std::filesystem::path dir);

  std::filesystem::path path_for(std::string_view session_id) const;
  /// Appends audit entries not yet written for this session.
  void sync(const ReviewSession& s);

  static std::vector<AuditEntry> read(const std::filesystem::path& file);
  ReviewSession load(std::string_view session_id) const;
  std::vector<std::string> session_ids() const;

 private:
  std::filesystem::path dir_;
  std::map<std::string, std::size_t, std::less<>> written_;
};

std::string now_timestamp();

}  // namespace krail
