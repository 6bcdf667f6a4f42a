#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "krail/agents.hpp"
#include "krail/graph.hpp"
#include "krail/idtable.hpp"
#include "krail/llm.hpp"
#include "krail/text.hpp"

namespace krail::testfx {

inline std::filesystem::path source_path(const std::string& rel) {
  return std::filesystem::path(KRAIL_SOURCE_DIR) / rel;
}

inline std::shared_ptr<const EntryStore> sample_store() {
  return std::make_shared<const EntryStore>(load_idtable_file(source_path("data/idtable_sf_sample.csv")));
}

inline std::shared_ptr<const KnowledgeGraph> sample_graph() {
  return std::make_shared<const KnowledgeGraph>(build_graph(sample_store()));
}

/// A well-formed reply for `kind`: every required header with one line.
inline std::string agent_reply(AgentKind kind, const std::string& flavor = "") {
  std::string out;
  for (const auto& s : agent_sections(kind)) out += section_header(s) + ":\n" + s + " notes " + flavor + "\n";
  return out;
}

inline std::string attribute_reply(const std::vector<std::string>& pif, const std::vector<std::string>& cfm,
                                   const std::vector<std::string>& task, const std::vector<std::string>& pif_measure,
                                   const std::vector<std::string>& other) {
  std::string out;
  auto block = [&](const char* header, const std::vector<std::string>& items) {
    out += std::string(header) + ":\n";
    for (std::size_t i = 0; i < items.size(); ++i) out += "RANK " + std::to_string(i + 1) + ": " + items[i] + "\n";
  };
  block("PIF", pif);
  block("CFM", cfm);
  block("TASK_AND_ERROR_MEASURE", task);
  block("PIF_MEASURE", pif_measure);
  block("OTHER_PIFS_AND_UNCERTAINTY", other);
  return out;
}

inline std::string railroad_reply() {
  return attribute_reply({"SF4", "SF0"}, {"D", "U"}, {"railroad operators start new workshift"},
                         {"New workshift, task not specified"}, {"Other PIF may exist"});
}

/// Agent replies plus one attribute reply for `case_text`.
inline MockFixture case_fixture(const std::string& case_text, const std::string& attribute_text,
                                bool with_agents = true) {
  MockFixture f;
  if (with_agents) {
    for (AgentKind k : kAllAgents) f.add_for_case(agent_prompt_tag(k), case_text, agent_reply(k, case_text.substr(0, 12)));
  }
  f.add_for_case(PromptTag::AttributeExtract, case_text, attribute_text);
  return f;
}

inline const std::string kRailroadCase =
    "A railroad crew starts a new workshift and nobody asks them to check the relay cabinet.";

}  // namespace krail::testfx
