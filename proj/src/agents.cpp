#include "krail/agents.hpp"

#include <future>
#include <map>
#include <algorithm>
#include <cctype>

#include "krail/error.hpp"
#include "krail/text.hpp"
#include "prompt_assets.hpp"

namespace krail {

void validate_case(const CaseInput& c) {
  if (text::normalize_newlines(c.data_source_text).empty() ||
      text::trim(c.data_source_text).empty()) {
    throw Error(ErrorCode::InvalidCase, "case data source text is empty");
  }
}

std::string_view agent_name(AgentKind k) noexcept {
  switch (k) {
    case AgentKind::TaskAnalysis: return "TaskAnalysis";
    case AgentKind::ContextAnalysis: return "ContextAnalysis";
    case AgentKind::CognitiveActivities: return "CognitiveActivities";
    case AgentKind::TimeConstraints: return "TimeConstraints";
  }
  return "?";
}

std::optional<AgentKind> parse_agent_name(std::string_view name) {
  for (AgentKind k : kAllAgents) {
    if (agent_name(k) == name) return k;
  }
  return std::nullopt;
}

PromptTag agent_prompt_tag(AgentKind k) noexcept {
  switch (k) {
    case AgentKind::TaskAnalysis: return PromptTag::AgentTask;
    case AgentKind::ContextAnalysis: return PromptTag::AgentContext;
    case AgentKind::CognitiveActivities: return PromptTag::AgentCognitive;
    case AgentKind::TimeConstraints: return PromptTag::AgentTime;
  }
  return PromptTag::AgentTask;
}

const std::vector<std::string>& agent_sections(AgentKind k) {
  static const std::vector<std::string> kTask = {"overview", "classification", "objectives",
                                                 "error_types_and_impacts", "complexity_level"};
  static const std::vector<std::string> kContext = {"background_conditions", "execution_support",
                                                    "initial_conditions", "error_measurement"};
  static const std::vector<std::string> kCognitive = {"cognitive_activities", "cognitive_demands",
                                                      "mental_processes"};
  static const std::vector<std::string> kTime = {"temporal_limitations", "deadlines",
                                                 "time_sensitive_conditions"};
  switch (k) {
    case AgentKind::TaskAnalysis: return kTask;
    case AgentKind::ContextAnalysis: return kContext;
    case AgentKind::CognitiveActivities: return kCognitive;
    case AgentKind::TimeConstraints: return kTime;
  }
  return kTask;
}

std::string section_header(std::string_view section) { return text::to_upper(section); }

const std::string* AgentReport::section(std::string_view name) const {
  for (const auto& [k, v] : sections) {
    if (k == name) return &v;
  }
  return nullptr;
}

std::string_view agent_template(AgentKind k) {
  switch (k) {
    case AgentKind::TaskAnalysis: return assets::kTaskAnalysisTemplate;
    case AgentKind::ContextAnalysis: return assets::kContextAnalysisTemplate;
    case AgentKind::CognitiveActivities: return assets::kCognitiveActivitiesTemplate;
    case AgentKind::TimeConstraints: return assets::kTimeConstraintsTemplate;
  }
  return {};
}

namespace {

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

// Accepts "HEADER:", "## HEADER:", "**HEADER:**" and "Header Name:" spellings.
std::optional<std::pair<std::string, std::string>> header_line(std::string_view line) {
  std::size_t i = 0;
  while (i < line.size() && (line[i] == '#' || line[i] == '*' || line[i] == '-' ||
                             std::isspace(static_cast<unsigned char>(line[i])))) {
    ++i;
  }
  const std::size_t colon = line.find(':', i);
  if (colon == std::string_view::npos || colon - i > 64) return std::nullopt;
  std::string_view name = line.substr(i, colon - i);
  while (!name.empty() && (name.back() == '*' || name.back() == ' ')) name.remove_suffix(1);
  if (name.empty() || !std::isalpha(static_cast<unsigned char>(name.front()))) return std::nullopt;
  std::string key;
  for (char c : name) {
    if (c == ' ' || c == '_') {
      key.push_back('_');
    } else if (std::isalpha(static_cast<unsigned char>(c))) {
      key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else {
      return std::nullopt;
    }
  }
  std::string_view rest = line.substr(colon + 1);
  while (!rest.empty() && (rest.front() == '*' || std::isspace(static_cast<unsigned char>(rest.front())))) {
    rest.remove_prefix(1);
  }
  return std::make_pair(std::move(key), std::string(rest));
}

}  // namespace

std::string build_agent_prompt(AgentKind kind, const CaseInput& c) {
  validate_case(c);
  std::string headers;
  for (const auto& s : agent_sections(kind)) headers += section_header(s) + ":\n";
  std::string prompt(agent_template(kind));
  replace_all(prompt, "{{section_headers}}", headers);
  replace_all(prompt, "{{case_text}}", text::normalize_newlines(c.data_source_text));
  return prompt;
}

AgentReport parse_agent_report(AgentKind kind, std::string_view llm_text) {
  const auto& required = agent_sections(kind);
  std::map<std::string, std::string> found;
  std::string* current = nullptr;

  for (const auto& line : text::split_lines(llm_text)) {
    if (auto h = header_line(line)) {
      if (std::find(required.begin(), required.end(), h->first) != required.end()) {
        current = &found[h->first];
        if (!current->empty()) current->push_back('\n');
        current->append(h->second);
        continue;
      }
    }
    if (current) {
      if (!current->empty()) current->push_back('\n');
      current->append(line);
    }
  }

  AgentReport report;
  report.kind = kind;
  report.raw_text = std::string(llm_text);
  for (const auto& name : required) {
    auto it = found.find(name);
    if (it == found.end()) {
      throw Error(ErrorCode::MissingSection,
                  std::string(agent_name(kind)) + " report is missing section " + section_header(name),
                  name, report.raw_text);
    }
    std::string body(text::trim(it->second));
    if (body.empty()) {
      throw Error(ErrorCode::EmptySection,
                  std::string(agent_name(kind)) + " report has empty section " + section_header(name), name,
                  report.raw_text);
    }
    report.sections.emplace_back(name, std::move(body));
  }
  return report;
}

std::string render_agent_report(const AgentReport& report) {
  std::string out;
  for (const auto& [name, body] : report.sections) {
    out += section_header(name) + ":\n" + body + "\n\n";
  }
  return out;
}

namespace {

AgentReport run_agent(AgentKind kind, const CaseInput& c, Provider& provider,
                      std::chrono::nanoseconds& latency) {
  try {
    CompletionRequest req;
    req.prompt_tag = agent_prompt_tag(kind);
    req.prompt = build_agent_prompt(kind, c);
    req.case_fingerprint = fingerprint_case(c.data_source_text);
    auto result = provider.complete(req);
    latency = result.latency;
    return parse_agent_report(kind, result.text);
  } catch (Error& e) {
    e.with_stage(std::string(agent_name(kind)));
    throw;
  }
}

}  // namespace

Decomposition run_decomposition(const CaseInput& c, Provider& provider, bool parallel) {
  validate_case(c);
  Decomposition out;
  out.reports.resize(kAllAgents.size());
  if (!parallel) {
    for (std::size_t i = 0; i < kAllAgents.size(); ++i) {
      out.reports[i] = run_agent(kAllAgents[i], c, provider, out.latencies[i]);
    }
    return out;
  }
  std::vector<std::future<AgentReport>> futures;
  for (std::size_t i = 0; i < kAllAgents.size(); ++i) {
    futures.push_back(std::async(std::launch::async, [&, i] {
      return run_agent(kAllAgents[i], c, provider, out.latencies[i]);
    }));
  }
  // Collect all before rethrowing so no task outlives this frame; the first
  // failure in canonical order wins.
  std::exception_ptr first_error;
  for (std::size_t i = 0; i < futures.size(); ++i) {
    try {
      out.reports[i] = futures[i].get();
    } catch (...) {
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

std::string prompt_template_set_hash() {
  std::string all;
  for (AgentKind k : kAllAgents) {
    all.append(agent_template(k));
    all.push_back('\0');
  }
  all.append(assets::kAttributeInstructions);
  all.push_back('\0');
  all.append(assets::kAttributeOutputContract);
  return text::digest(all);
}

}  // namespace krail
