#include "dyncq/database.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace dyncq {

ConstId Interner::intern(std::string_view token) {
  auto it = ids_.find(std::string(token));
  if (it != ids_.end()) return it->second;
  ConstId id = static_cast<ConstId>(tokens_.size());
  tokens_.emplace_back(token);
  ids_.emplace(tokens_.back(), id);
  return id;
}

std::optional<ConstId> Interner::lookup(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

Database::Database(Schema schema) : schema_(std::move(schema)) {
  for (const auto& [rel, arity] : schema_.relations) {
    (void)arity;
    relations_.emplace(rel, Relation{});
  }
}

Database::Relation& Database::relation_checked(const std::string& relation, std::size_t arity) {
  auto it = relations_.find(relation);
  if (it == relations_.end()) throw std::invalid_argument("unknown relation: " + relation);
  if (schema_.arity(relation) != arity)
    throw std::invalid_argument("arity mismatch for " + relation + ": got " +
                                std::to_string(arity) + ", schema says " +
                                std::to_string(schema_.arity(relation)));
  return it->second;
}

const Database::Relation& Database::relation_checked(const std::string& relation,
                                                     std::size_t arity) const {
  return const_cast<Database*>(this)->relation_checked(relation, arity);
}

bool Database::insert(const std::string& relation, const std::vector<std::string>& tuple) {
  Relation& rel = relation_checked(relation, tuple.size());
  Tuple t;
  t.reserve(tuple.size());
  for (const auto& tok : tuple) t.push_back(interner_.intern(tok));
  if (!rel.index.insert(t).second) return false;
  rel.rows.push_back(std::move(t));
  return true;
}

bool Database::erase(const std::string& relation, const std::vector<std::string>& tuple) {
  Relation& rel = relation_checked(relation, tuple.size());
  Tuple t;
  t.reserve(tuple.size());
  for (const auto& tok : tuple) {
    auto id = interner_.lookup(tok);
    if (!id) return false;  // token never seen, so the fact is absent
    t.push_back(*id);
  }
  if (rel.index.erase(t) == 0) return false;
  rel.rows.erase(std::find(rel.rows.begin(), rel.rows.end(), t));
  return true;
}

bool Database::apply(const UpdateCommand& cmd) {
  return cmd.kind == UpdateCommand::Kind::Insert ? insert(cmd.relation, cmd.tuple)
                                                 : erase(cmd.relation, cmd.tuple);
}

bool Database::contains(const std::string& relation, const std::vector<std::string>& tuple) const {
  const Relation& rel = relation_checked(relation, tuple.size());
  Tuple t;
  t.reserve(tuple.size());
  for (const auto& tok : tuple) {
    auto id = interner_.lookup(tok);
    if (!id) return false;
    t.push_back(*id);
  }
  return rel.index.count(t) != 0;
}

const std::vector<Tuple>& Database::facts(const std::string& relation) const {
  auto it = relations_.find(relation);
  if (it == relations_.end()) throw std::invalid_argument("unknown relation: " + relation);
  return it->second.rows;
}

std::size_t Database::cardinality() const {
  std::size_t n = 0;
  for (const auto& [rel, data] : relations_) {
    (void)rel;
    n += data.rows.size();
  }
  return n;
}

std::set<ConstId> Database::active_domain() const {
  std::set<ConstId> adom;
  for (const auto& [rel, data] : relations_) {
    (void)rel;
    for (const Tuple& t : data.rows) adom.insert(t.begin(), t.end());
  }
  return adom;
}

std::vector<std::string> Database::tokens_of(const Tuple& t) const {
  std::vector<std::string> out;
  out.reserve(t.size());
  for (ConstId c : t) out.push_back(interner_.token(c));
  return out;
}

namespace {

// Splits one line into whitespace-separated tokens, dropping "%" comments.
// Tokens must be names or integers.
std::vector<std::string> line_tokens(const std::string& line, std::size_t lineno) {
  std::vector<std::string> toks;
  std::string cur;
  for (char c : line) {
    if (c == '%') break;
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) toks.push_back(std::move(cur)), cur.clear();
      continue;
    }
    cur.push_back(c);
  }
  if (!cur.empty()) toks.push_back(std::move(cur));
  for (const auto& t : toks) {
    bool name = std::isalpha(static_cast<unsigned char>(t[0])) != 0;
    for (char c : t) {
      bool ok = name ? (std::isalnum(static_cast<unsigned char>(c)) || c == '_')
                     : std::isdigit(static_cast<unsigned char>(c)) != 0;
      if (!ok) throw ParseError("malformed token '" + t + "'", lineno);
    }
  }
  return toks;
}

}  // namespace

Database parse_database(const std::string& text, const Schema& schema) {
  Database db(schema);
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::vector<std::string> toks = line_tokens(line, lineno);
    if (toks.empty()) continue;
    const std::string& rel = toks[0];
    if (!schema.contains(rel)) throw ParseError("relation not in schema: " + rel, lineno);
    std::vector<std::string> tuple(toks.begin() + 1, toks.end());
    if (tuple.size() != schema.arity(rel))
      throw ParseError("arity mismatch for " + rel, lineno);
    db.insert(rel, tuple);  // duplicates collapse under set semantics
  }
  return db;
}

std::string serialize_database(const Database& db) {
  std::ostringstream out;
  for (const auto& [rel, arity] : db.schema().relations) {
    (void)arity;
    for (const Tuple& t : db.facts(rel)) {
      out << rel;
      for (ConstId c : t) out << ' ' << db.constants().token(c);
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace dyncq
