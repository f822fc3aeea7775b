#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dyncq/query.hpp"

namespace dyncq {

using ConstId = std::uint32_t;
using Tuple = std::vector<ConstId>;

struct TupleHash {
  std::size_t operator()(const Tuple& t) const {
    std::size_t h = 1469598103934665603ull;
    for (ConstId c : t) {
      h ^= c;
      h *= 1099511628211ull;
    }
    return h;
  }
};

/// Bidirectional map between constant tokens and dense integer ids.
class Interner {
 public:
  ConstId intern(std::string_view token);
  std::optional<ConstId> lookup(std::string_view token) const;
  const std::string& token(ConstId id) const { return tokens_.at(id); }
  std::size_t size() const { return tokens_.size(); }

 private:
  std::unordered_map<std::string, ConstId> ids_;
  std::vector<std::string> tokens_;
};

/// A single-tuple insert or delete against one relation.
struct UpdateCommand {
  enum class Kind { Insert, Delete };

  Kind kind = Kind::Insert;
  std::string relation;
  std::vector<std::string> tuple;

  bool operator==(const UpdateCommand& other) const {
    return kind == other.kind && relation == other.relation && tuple == other.tuple;
  }
};

/**
 * A finite relational database under set semantics. Constants are interned to
 * dense ids; per relation the facts are kept in insertion order (used when a
 * snapshot is replayed fact by fact).
 */
class Database {
 public:
  explicit Database(Schema schema);

  const Schema& schema() const { return schema_; }
  const Interner& constants() const { return interner_; }

  /// Returns false (and changes nothing) when the fact is already present.
  bool insert(const std::string& relation, const std::vector<std::string>& tuple);
  /// Returns false (and changes nothing) when the fact is absent.
  bool erase(const std::string& relation, const std::vector<std::string>& tuple);
  /// Dispatches on the command kind; returns whether the database changed.
  bool apply(const UpdateCommand& cmd);

  bool contains(const std::string& relation, const std::vector<std::string>& tuple) const;

  /// Facts of one relation in insertion order.
  const std::vector<Tuple>& facts(const std::string& relation) const;

  /// Total number of stored facts.
  std::size_t cardinality() const;

  /// Constants occurring in at least one current fact.
  std::set<ConstId> active_domain() const;

  std::vector<std::string> tokens_of(const Tuple& t) const;

 private:
  struct Relation {
    std::vector<Tuple> rows;
    std::unordered_set<Tuple, TupleHash> index;
  };

  Relation& relation_checked(const std::string& relation, std::size_t arity);
  const Relation& relation_checked(const std::string& relation, std::size_t arity) const;

  Schema schema_;
  Interner interner_;
  std::unordered_map<std::string, Relation> relations_;
};

/// Parses a fact file: one fact per line, "R c1 ... cr", "%" comments.
/// Arities must match the schema. Throws ParseError.
Database parse_database(const std::string& text, const Schema& schema);

/// Renders all facts, one per line, in insertion order.
std::string serialize_database(const Database& db);

}  // namespace dyncq
