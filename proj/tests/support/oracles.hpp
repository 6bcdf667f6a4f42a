#pragma once

// Brute-force reference implementations. They share no code with the
// library beyond the plain data types.

#include <set>
#include <string>
#include <vector>

#include "krail/graph.hpp"
#include "krail/idtable.hpp"
#include "krail/resolver.hpp"

namespace krail::oracle {

std::set<std::string> tokens(const std::string& s);
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);
double pif_term(const PifCode& entry, const PifCode& wanted);
double cfm_jaccard(const CfmSet& a, const CfmSet& b);

struct Scored {
  std::string entry_id;
  double score = 0.0;
  double rate = 0.0;
};

double score(const IdTableEntry& e, const ResolvedAttributeSet& a);

/// Scores every entry of `table`, sorts by (score desc, entry_id asc), keeps 5.
std::vector<Scored> resolve(const std::vector<IdTableEntry>& entries, TableId table, const ResolvedAttributeSet& a);

/// Linear scan over all entries, sorted by entry_id.
std::vector<std::string> query(const std::vector<IdTableEntry>& entries, const EntryFilter& f);

/// Token-sequence equality on lowercased alphanumeric runs, non-empty.
bool text_equal(const std::string& a, const std::string& b);

}  // namespace krail::oracle
