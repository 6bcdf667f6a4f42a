#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "krail/idtable.hpp"

namespace krail {

enum class NodeKind { Table, Pif, Cfm, Entry, Reference };
enum class EdgeLabel { InTable, HasPif, HasCfm, Cites };

std::string_view node_kind_name(NodeKind k) noexcept;
std::string_view edge_label_name(EdgeLabel l) noexcept;  // IN_TABLE, HAS_PIF, ...

struct GraphNode {
  std::string node_id;  // kind-prefixed, e.g. "pif:SF3.3", "entry:sf-001"
  NodeKind kind = NodeKind::Entry;
  std::string value;             // canonical code or key without the prefix
  std::size_t entry_index = 0;   // position in the store, Entry nodes only
};

struct GraphEdge {
  std::string from;
  std::string to;
  EdgeLabel label = EdgeLabel::InTable;

  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

struct EntryFilter {
  std::optional<TableId> table;
  std::optional<PifCode> pif;
  bool pif_prefix_major_only = false;  // SF3 matches SF3.3 when set
  std::optional<Cfm> cfm;
  std::vector<std::string> task_contains;  // every token must appear in the task dimension
};

/// Tokenized text dimensions, computed once per entry at build time.
struct EntryFeatures {
  std::vector<std::string> task_tokens;
  std::vector<std::string> pif_measure_tokens;
  std::vector<std::string> other_pifs_tokens;
};

/// Immutable typed graph over a store. Entries point at their table, PIF,
/// CFMs and reference; shared values share one node.
class KnowledgeGraph {
 public:
  explicit KnowledgeGraph(std::shared_ptr<const EntryStore> store);

  const EntryStore& store() const noexcept { return *store_; }
  std::shared_ptr<const EntryStore> store_ptr() const noexcept { return store_; }

  /// Sorted by node_id.
  const std::vector<GraphNode>& nodes() const noexcept { return nodes_; }
  /// Sorted by (from, label, to).
  const std::vector<GraphEdge>& edges() const noexcept { return edges_; }

  const GraphNode* node(std::string_view node_id) const;
  std::size_t count(NodeKind kind) const;

  /// Entry positions with an edge of `label` into `node_id`, ordered by entry_id.
  const std::vector<std::size_t>& entries_into(std::string_view node_id) const;
  /// Entry positions of `table` ordered by entry_id.
  const std::vector<std::size_t>& table_entries(TableId table) const;
  /// All entry positions ordered by entry_id.
  const std::vector<std::size_t>& all_entries() const noexcept { return ordered_; }

  const EntryFeatures& features(std::size_t entry_index) const { return features_[entry_index]; }

  /// Pif node values sharing a prefix and major number.
  std::vector<std::string> pif_nodes_with_major(const PifCode& code) const;

 private:
  std::shared_ptr<const EntryStore> store_;
  std::vector<GraphNode> nodes_;
  std::vector<GraphEdge> edges_;
  std::map<std::string, std::size_t, std::less<>> node_index_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> incoming_;
  std::vector<std::size_t> ordered_;
  std::vector<EntryFeatures> features_;
};

KnowledgeGraph build_graph(std::shared_ptr<const EntryStore> store);
KnowledgeGraph build_graph(const EntryStore& store);

std::string node_id_for(NodeKind kind, std::string_view value);

bool entry_matches(const KnowledgeGraph& graph, std::size_t entry_index, const EntryFilter& filter);

/// Entries satisfying every present filter field, ordered by entry_id.
std::vector<IdTableEntry> query_entries(const KnowledgeGraph& graph, const EntryFilter& filter);

inline constexpr std::size_t kDefaultContextEntries = 40;
inline constexpr std::string_view kEmptyContextSentinel = "No entries available for this table.";

/// Natural-language rendering of a table's entries for prompts. Deterministic.
std::string serialize_graph_context(const KnowledgeGraph& graph, TableId table,
                                    std::size_t max_entries = kDefaultContextEntries);

/// Debug dump: "from<TAB>label<TAB>to" per line, lexicographically sorted.
std::string export_triples(const KnowledgeGraph& graph);

}  // namespace krail
