#include "krail/json_codec.hpp"

#include "krail/error.hpp"

namespace krail::codec {

json to_json(const IdTableEntry& e) {
  return {
      {"entry_id", e.entry_id},
      {"table", table_code(e.table)},
      {"pif", e.pif.to_string()},
      {"cfms", render_cfm_set(e.cfms)},
      {"error_rate", e.error_rate},
      {"error_rate_text", render_error_rate(e.error_rate)},
      {"task", e.task},
      {"error_measure", e.error_measure},
      {"pif_measure", e.pif_measure},
      {"other_pifs", e.other_pifs},
      {"uncertainty", e.uncertainty_note},
      {"reference", e.reference_id},
  };
}

json to_json(const AgentReport& r) {
  json sections = json::object();
  for (const auto& [k, v] : r.sections) sections[k] = v;
  return {{"kind", agent_name(r.kind)}, {"sections", sections}, {"raw_text", r.raw_text}};
}

json to_json(const CandidateAttributeSet& c) {
  json pif = json::array();
  for (const auto& p : c.pif) pif.push_back(p.to_string());
  json cfm = json::array();
  for (const auto& s : c.cfm) cfm.push_back(render_cfm_set(s));
  return {
      {"pif", pif},
      {"cfm", cfm},
      {"task_and_error_measure", c.task_and_error_measure},
      {"pif_measure", c.pif_measure},
      {"other_pifs_and_uncertainty", c.other_pifs_and_uncertainty},
      {"warnings", c.warnings},
  };
}

json to_json(const ResolvedAttributeSet& a) {
  json prov = json::object();
  for (Dimension d : kAllDimensions) prov[std::string(dimension_key(d))] = provenance_name(a.provenance_of(d));
  return {
      {"pif", a.pif.to_string()},
      {"cfm", render_cfm_set(a.cfms)},
      {"task_and_error_measure", a.task},
      {"pif_measure", a.pif_measure},
      {"other_pifs_and_uncertainty", a.other_pifs},
      {"provenance", prov},
  };
}

ResolvedAttributeSet resolved_attributes_from_json(const json& j) {
  ResolvedAttributeSet a;
  a.pif = parse_pif_code(j.at("pif").get<std::string>());
  auto cfms = parse_cfm_set(j.at("cfm").get<std::string>());
  if (!cfms) throw Error(ErrorCode::FormatError, "bad cfm set in resolved attributes");
  a.cfms = *cfms;
  a.task = j.at("task_and_error_measure").get<std::string>();
  a.pif_measure = j.at("pif_measure").get<std::string>();
  a.other_pifs = j.at("other_pifs_and_uncertainty").get<std::string>();
  if (j.contains("provenance")) {
    for (Dimension d : kAllDimensions) {
      const auto& p = j["provenance"].value(std::string(dimension_key(d)), std::string("ModelRank1"));
      a.provenance[static_cast<std::size_t>(d)] =
          p == "ExpertEdited" ? Provenance::ExpertEdited : Provenance::ModelRank1;
    }
  }
  return a;
}

json to_json(const ScoreBreakdown& s) {
  return {{"pif_term", s.pif_term},
          {"cfm_term", s.cfm_term},
          {"task_term", s.task_term},
          {"pif_measure_term", s.pif_measure_term},
          {"other_pifs_term", s.other_pifs_term},
          {"total", s.total}};
}

json to_json(const HepResolution& r) {
  json matches = json::array();
  for (std::size_t i = 0; i < r.ranked_matches.size(); ++i) {
    const auto& m = r.ranked_matches[i];
    matches.push_back({{"rank", i + 1},
                       {"entry_id", m.entry_id},
                       {"score", m.score},
                       {"error_rate", m.error_rate},
                       {"error_rate_text", render_error_rate(m.error_rate)},
                       {"breakdown", to_json(m.breakdown)}});
  }
  return {{"ranked_matches", matches},
          {"base_hep", r.base_hep},
          {"base_hep_text", render_error_rate(r.base_hep)}};
}

HepResolution resolution_from_json(const json& j) {
  HepResolution r;
  for (const auto& m : j.at("ranked_matches")) {
    RankedMatch rm;
    rm.entry_id = m.at("entry_id").get<std::string>();
    rm.score = m.at("score").get<double>();
    rm.error_rate = m.at("error_rate").get<double>();
    const auto& b = m.at("breakdown");
    rm.breakdown = {b.at("pif_term").get<double>(),         b.at("cfm_term").get<double>(),
                    b.at("task_term").get<double>(),        b.at("pif_measure_term").get<double>(),
                    b.at("other_pifs_term").get<double>(), b.at("total").get<double>()};
    r.ranked_matches.push_back(std::move(rm));
  }
  r.base_hep = j.at("base_hep").get<double>();
  return r;
}

}  // namespace krail::codec
