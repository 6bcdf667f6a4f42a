#pragma once

#include <json.hpp>

#include "krail/agents.hpp"
#include "krail/attributes.hpp"
#include "krail/idtable.hpp"
#include "krail/resolver.hpp"

namespace krail::codec {

using json = nlohmann::json;

json to_json(const IdTableEntry& e);
json to_json(const AgentReport& r);
json to_json(const CandidateAttributeSet& c);
json to_json(const ResolvedAttributeSet& a);
json to_json(const ScoreBreakdown& s);
json to_json(const HepResolution& r);

HepResolution resolution_from_json(const json& j);
ResolvedAttributeSet resolved_attributes_from_json(const json& j);

}  // namespace krail::codec
