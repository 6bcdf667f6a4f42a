#include "krail/graph.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "krail/error.hpp"
#include "krail/text.hpp"

namespace krail {

std::string_view node_kind_name(NodeKind k) noexcept {
  switch (k) {
    case NodeKind::Table: return "table";
    case NodeKind::Pif: return "pif";
    case NodeKind::Cfm: return "cfm";
    case NodeKind::Entry: return "entry";
    case NodeKind::Reference: return "ref";
  }
  return "?";
}

std::string_view edge_label_name(EdgeLabel l) noexcept {
  switch (l) {
    case EdgeLabel::InTable: return "IN_TABLE";
    case EdgeLabel::HasPif: return "HAS_PIF";
    case EdgeLabel::HasCfm: return "HAS_CFM";
    case EdgeLabel::Cites: return "CITES";
  }
  return "?";
}

std::string node_id_for(NodeKind kind, std::string_view value) {
  return std::string(node_kind_name(kind)) + ":" + std::string(value);
}

namespace {
const std::vector<std::size_t> kNone;
}

KnowledgeGraph::KnowledgeGraph(std::shared_ptr<const EntryStore> store) : store_(std::move(store)) {
  if (!store_) store_ = std::make_shared<const EntryStore>();
  const auto& entries = store_->entries();

  std::map<std::string, GraphNode> nodes;
  auto add_node = [&](NodeKind kind, const std::string& value, std::size_t entry_index = 0) {
    auto id = node_id_for(kind, value);
    nodes.try_emplace(id, GraphNode{id, kind, value, entry_index});
    return id;
  };

  features_.reserve(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    const auto entry = add_node(NodeKind::Entry, e.entry_id, i);
    const auto table = add_node(NodeKind::Table, std::string(table_code(e.table)));
    const auto pif = add_node(NodeKind::Pif, e.pif.to_string());
    const auto ref = add_node(NodeKind::Reference, e.reference_id);
    edges_.push_back({entry, table, EdgeLabel::InTable});
    edges_.push_back({entry, pif, EdgeLabel::HasPif});
    for (Cfm c : e.cfms) {
      const auto cfm = add_node(NodeKind::Cfm, std::string(cfm_code(c)));
      edges_.push_back({entry, cfm, EdgeLabel::HasCfm});
    }
    edges_.push_back({entry, ref, EdgeLabel::Cites});

    features_.push_back({text::token_set(e.task_dimension_text()), text::token_set(e.pif_measure),
                         text::token_set(e.other_pifs_dimension_text())});
  }

  nodes_.reserve(nodes.size());
  for (auto& [id, n] : nodes) {
    node_index_.emplace(id, nodes_.size());
    nodes_.push_back(std::move(n));
  }

  std::sort(edges_.begin(), edges_.end(), [](const GraphEdge& a, const GraphEdge& b) {
    return std::tie(a.from, a.label, a.to) < std::tie(b.from, b.label, b.to);
  });

  ordered_.resize(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) ordered_[i] = i;
  auto by_id = [&](std::size_t a, std::size_t b) { return entries[a].entry_id < entries[b].entry_id; };
  std::sort(ordered_.begin(), ordered_.end(), by_id);

  // Edges are sorted by source entry id, so each incoming list comes out in
  // entry_id order.
  for (const auto& edge : edges_) {
    const auto* from = node(edge.from);
    incoming_[edge.to].push_back(from->entry_index);
  }
}

const GraphNode* KnowledgeGraph::node(std::string_view node_id) const {
  auto it = node_index_.find(node_id);
  return it == node_index_.end() ? nullptr : &nodes_[it->second];
}

std::size_t KnowledgeGraph::count(NodeKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [&](const GraphNode& n) { return n.kind == kind; }));
}

const std::vector<std::size_t>& KnowledgeGraph::entries_into(std::string_view node_id) const {
  auto it = incoming_.find(node_id);
  return it == incoming_.end() ? kNone : it->second;
}

const std::vector<std::size_t>& KnowledgeGraph::table_entries(TableId table) const {
  return entries_into(node_id_for(NodeKind::Table, table_code(table)));
}

std::vector<std::string> KnowledgeGraph::pif_nodes_with_major(const PifCode& code) const {
  std::vector<std::string> out;
  const std::string lo = node_id_for(NodeKind::Pif, code.prefix);
  for (auto it = node_index_.lower_bound(lo); it != node_index_.end(); ++it) {
    const auto& n = nodes_[it->second];
    if (n.kind != NodeKind::Pif || n.node_id.compare(0, lo.size(), lo) != 0) break;
    auto parsed = try_parse_pif_code(n.value);
    if (parsed && parsed->same_major(code)) out.push_back(n.node_id);
  }
  return out;
}

KnowledgeGraph build_graph(std::shared_ptr<const EntryStore> store) {
  return KnowledgeGraph(std::move(store));
}

KnowledgeGraph build_graph(const EntryStore& store) {
  return KnowledgeGraph(std::make_shared<const EntryStore>(store));
}

bool entry_matches(const KnowledgeGraph& graph, std::size_t i, const EntryFilter& f) {
  const auto& e = graph.store().entries()[i];
  if (f.table && e.table != *f.table) return false;
  if (f.pif) {
    if (f.pif_prefix_major_only ? !e.pif.same_major(*f.pif) : !(e.pif == *f.pif)) return false;
  }
  if (f.cfm && !e.cfms.contains(*f.cfm)) return false;
  if (!f.task_contains.empty()) {
    const auto& tokens = graph.features(i).task_tokens;
    for (const auto& raw : f.task_contains) {
      for (const auto& t : text::word_tokens(raw)) {
        if (!std::binary_search(tokens.begin(), tokens.end(), t)) return false;
      }
    }
  }
  return true;
}

std::vector<IdTableEntry> query_entries(const KnowledgeGraph& graph, const EntryFilter& filter) {
  // Seed from the narrowest node the filter names, then check the rest.
  std::vector<std::size_t> seeds;
  if (filter.pif && !filter.pif_prefix_major_only) {
    seeds = graph.entries_into(node_id_for(NodeKind::Pif, filter.pif->to_string()));
  } else if (filter.pif) {
    std::set<std::size_t> merged;
    for (const auto& id : graph.pif_nodes_with_major(*filter.pif)) {
      const auto& into = graph.entries_into(id);
      merged.insert(into.begin(), into.end());
    }
    seeds.assign(merged.begin(), merged.end());
  } else if (filter.cfm) {
    seeds = graph.entries_into(node_id_for(NodeKind::Cfm, cfm_code(*filter.cfm)));
  } else if (filter.table) {
    seeds = graph.table_entries(*filter.table);
  } else {
    seeds = graph.all_entries();
  }

  const auto& entries = graph.store().entries();
  std::vector<std::size_t> hits;
  for (std::size_t i : seeds) {
    if (entry_matches(graph, i, filter)) hits.push_back(i);
  }
  std::sort(hits.begin(), hits.end(),
            [&](std::size_t a, std::size_t b) { return entries[a].entry_id < entries[b].entry_id; });
  std::vector<IdTableEntry> out;
  out.reserve(hits.size());
  for (std::size_t i : hits) out.push_back(entries[i]);
  return out;
}

std::string serialize_graph_context(const KnowledgeGraph& graph, TableId table, std::size_t max_entries) {
  if (max_entries == 0) throw Error(ErrorCode::InvalidArgument, "max_entries must be at least 1");
  const auto& positions = graph.table_entries(table);
  if (positions.empty()) return std::string(kEmptyContextSentinel);

  const auto& entries = graph.store().entries();
  std::ostringstream out;
  out << "Knowledge graph context for table " << table_code(table) << " (" << table_title(table)
      << "). Each entry links a PIF and cognitive failure modes to a task and a base error rate.\n";
  const std::size_t n = std::min(max_entries, positions.size());
  for (std::size_t k = 0; k < n; ++k) {
    const auto& e = entries[positions[k]];
    out << "\nEntry " << e.entry_id << ": PIF " << e.pif.to_string() << " with CFM ";
    bool first = true;
    for (Cfm c : e.cfms) {
      out << (first ? "" : " or ") << cfm_code(c) << " (" << cfm_title(c) << ")";
      first = false;
    }
    out << " applies to the task \"" << e.task << "\"";
    if (!e.error_measure.empty()) out << " with error measure \"" << e.error_measure << "\"";
    out << ". PIF measure: \"" << e.pif_measure << "\".";
    if (!e.other_pifs.empty()) out << " Other PIFs: \"" << e.other_pifs << "\".";
    if (!e.uncertainty_note.empty()) out << " Uncertainty: \"" << e.uncertainty_note << "\".";
    out << " Base error rate " << render_error_rate(e.error_rate) << ", cited from " << e.reference_id
        << ".\n";
  }
  return out.str();
}

std::string export_triples(const KnowledgeGraph& graph) {
  std::vector<std::string> lines;
  lines.reserve(graph.edges().size());
  for (const auto& e : graph.edges()) {
    lines.push_back(e.from + "\t" + std::string(edge_label_name(e.label)) + "\t" + e.to);
  }
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

}  // namespace krail
