#pragma once

#include <array>
#include <chrono>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "krail/idtable.hpp"
#include "krail/llm.hpp"

namespace krail {

struct CaseInput {
  std::string data_source_text;
  TableId table = TableId::ScenarioFamiliarity;
};

/// Throws Error(InvalidCase) when the text is blank after normalization.
void validate_case(const CaseInput& c);

/// The four decomposition agents, in run order.
enum class AgentKind { TaskAnalysis, ContextAnalysis, CognitiveActivities, TimeConstraints };

inline constexpr std::array<AgentKind, 4> kAllAgents = {
    AgentKind::TaskAnalysis, AgentKind::ContextAnalysis, AgentKind::CognitiveActivities,
    AgentKind::TimeConstraints};

std::string_view agent_name(AgentKind k) noexcept;  // "TaskAnalysis", ...
std::optional<AgentKind> parse_agent_name(std::string_view name);
PromptTag agent_prompt_tag(AgentKind k) noexcept;

/// Required section names (lowercase) in canonical order.
const std::vector<std::string>& agent_sections(AgentKind k);
/// "error_types_and_impacts" -> "ERROR_TYPES_AND_IMPACTS"
std::string section_header(std::string_view section);

struct AgentReport {
  AgentKind kind = AgentKind::TaskAnalysis;
  std::vector<std::pair<std::string, std::string>> sections;  // canonical order
  std::string raw_text;

  const std::string* section(std::string_view name) const;
  friend bool operator==(const AgentReport&, const AgentReport&) = default;
};

/// Raw template text for an agent, with a {{case_text}} placeholder.
std::string_view agent_template(AgentKind k);

std::string build_agent_prompt(AgentKind kind, const CaseInput& c);

/// Splits `HEADER:` delimited text. Throws Error(MissingSection | EmptySection)
/// with the raw text attached.
AgentReport parse_agent_report(AgentKind kind, std::string_view llm_text);

/// Renders a report in the same `HEADER:` format the parser reads.
std::string render_agent_report(const AgentReport& report);

struct Decomposition {
  std::vector<AgentReport> reports;  // canonical AgentKind order
  std::array<std::chrono::nanoseconds, 4> latencies{};
};

/// Runs all four agents. Errors are rethrown with stage() set to the failing
/// agent's name.
Decomposition run_decomposition(const CaseInput& c, Provider& provider, bool parallel = false);

/// Content hash over every prompt asset (agent templates and the attribute
/// output contract).
std::string prompt_template_set_hash();

}  // namespace krail
