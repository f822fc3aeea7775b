#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dyncq/query.hpp"

namespace dyncq {

/// A witness that a query is not q-hierarchical: a variable pair breaking one
/// of the two defining conditions.
///
/// condition 1: atoms(a) and atoms(b) neither nested nor disjoint.
/// condition 2: atoms(a) strictly inside atoms(b), a free but b quantified.
struct QhViolation {
  std::string var_a;
  std::string var_b;
  int condition = 1;
};

/// Returns a violating pair, or nullopt when the query is q-hierarchical
/// (for every two variables the sets of atoms containing them are nested or
/// disjoint, and a free variable's atom set is never strictly inside a
/// quantified variable's atom set).
std::optional<QhViolation> find_qh_violation(const Query& q);

bool is_q_hierarchical(const Query& q);

/**
 * The evaluation tree of one connected q-hierarchical component: a rooted
 * tree over the component's variables such that every atom's variable set is
 * a path from the root, and the free variables form a connected prefix
 * containing the root. Nodes are indexed 0..n-1.
 */
struct QTree {
  Query component;

  std::vector<std::string> var;             // node -> variable name
  int root = 0;
  std::vector<int> parent;                  // node -> parent node, -1 at root
  std::vector<std::vector<int>> children;   // node -> ordered child nodes
  std::vector<std::vector<int>> path;       // node -> nodes on the root path, root first
  std::vector<bool> free;                   // node -> variable is free
  std::vector<std::vector<AtomId>> atoms_at;  // node -> atoms whose variable set equals the root path
  std::vector<int> output_order;            // free nodes in pre-order (the cursor's column order)

  int node_of(const std::string& v) const;
};

struct QTreeResult {
  std::optional<QTree> tree;
  std::optional<QhViolation> violation;  // set when no tree exists
};

/// Builds the evaluation tree of a connected query, or reports a violating
/// variable pair. Root choice prefers variables occurring in every atom that
/// are free; ties go to head order, then first occurrence in the query text.
QTreeResult build_qtree(const Query& component);

/// One tree per connected component, in component order; stops at the first
/// component without a tree.
struct QTreeForestResult {
  std::vector<QTree> trees;
  std::optional<QhViolation> violation;
};

QTreeForestResult build_qtree_forest(const Query& q);

/// The minimal retract of the query: repeatedly searches for an endomorphism
/// that fixes the head variables and whose image omits at least one atom, and
/// restricts the query to the image. Candidate maps are tried in lexicographic
/// order over variable assignments, so the result is deterministic.
Query homomorphic_core(const Query& q);

/// True when some variable bijection maps one query onto the other, matching
/// heads positionally and atom sets exactly.
bool queries_isomorphic(const Query& a, const Query& b);

enum class Verdict { Tractable, ConditionallyHard, Open };

const char* to_string(Verdict v);

/// Complexity classification of the three dynamic tasks for a query.
struct Classification {
  bool q_hierarchical = false;
  std::optional<QhViolation> witness;  // set when not q-hierarchical

  Query core;
  bool core_q_hierarchical = false;

  Verdict boolean_verdict = Verdict::Open;      // answering the existential closure
  Verdict counting_verdict = Verdict::Open;     // maintaining the result count
  Verdict enumeration_verdict = Verdict::Open;  // constant-delay enumeration
};

Classification classify(const Query& q);

}  // namespace dyncq
