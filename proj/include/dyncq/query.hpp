#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace dyncq {

using AtomId = std::size_t;

/// Error raised by the text-format parsers (queries, fact files, update streams).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Relation symbol -> arity. Arities are at least 1.
struct Schema {
  std::map<std::string, std::size_t> relations;

  bool contains(const std::string& rel) const { return relations.count(rel) != 0; }
  std::size_t arity(const std::string& rel) const;

  bool operator==(const Schema& other) const { return relations == other.relations; }
};

/// One body atom: a relation symbol applied to variables (repeats allowed).
struct Atom {
  std::string relation;
  std::vector<std::string> vars;

  bool operator==(const Atom& other) const {
    return relation == other.relation && vars == other.vars;
  }
};

/**
 * A conjunctive query: a head tuple of output variables and a list of body
 * atoms. Variables not in the head are existentially quantified.
 *
 * Construction validates: nonempty body, distinct head variables, every head
 * variable used in the body, consistent arity per relation symbol.
 */
class Query {
 public:
  Query(std::vector<std::string> head, std::vector<Atom> atoms);

  const std::vector<std::string>& head() const { return head_; }
  const std::vector<Atom>& atoms() const { return atoms_; }

  /// All variables, head tuple first, then body variables by first occurrence.
  const std::vector<std::string>& variables() const { return variables_; }

  bool is_free(const std::string& var) const { return free_.count(var) != 0; }
  bool is_boolean() const { return head_.empty(); }

  /// Index of a variable in variables(); throws std::out_of_range if unknown.
  std::size_t var_index(const std::string& var) const;

  /// Schema inferred from the body atoms.
  const Schema& schema() const { return schema_; }

  bool operator==(const Query& other) const {
    return head_ == other.head_ && atoms_ == other.atoms_;
  }

 private:
  std::vector<std::string> head_;
  std::vector<Atom> atoms_;
  std::vector<std::string> variables_;
  std::map<std::string, std::size_t> var_index_;
  std::set<std::string> free_;
  Schema schema_;
};

/// Parses the query text format, e.g. "Q(x,y) :- E(x,y), T(y)."
/// "%" starts a line comment. Throws ParseError on malformed input.
Query parse_query(const std::string& text);

/// Same, but atom arities must match the given schema.
Query parse_query(const std::string& text, const Schema& schema);

/// Renders a query back to the text format; parse(serialize(q)) == q.
std::string serialize_query(const Query& q);

/// Variable -> the set of body atoms (by position) the variable occurs in.
std::map<std::string, std::set<AtomId>> atoms_index(const Query& q);

/// Atom positions grouped into connected components (atoms are connected when
/// they share a variable). Components ordered by their first atom.
std::vector<std::vector<AtomId>> component_partition(const Query& q);

/// The components as stand-alone queries: each keeps its atoms in the original
/// order and the head variables it owns in the original head order.
std::vector<Query> connected_components(const Query& q);

/// True when no relation symbol occurs in two different atoms.
bool self_join_free(const Query& q);

}  // namespace dyncq
