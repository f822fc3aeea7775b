#include "dyncq/query.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <sstream>

namespace dyncq {

std::size_t Schema::arity(const std::string& rel) const {
  auto it = relations.find(rel);
  if (it == relations.end()) throw std::invalid_argument("unknown relation: " + rel);
  return it->second;
}

Query::Query(std::vector<std::string> head, std::vector<Atom> atoms)
    : head_(std::move(head)), atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw std::invalid_argument("query body is empty");

  for (const auto& v : head_) {
    if (!var_index_.emplace(v, variables_.size()).second)
      throw std::invalid_argument("duplicate head variable: " + v);
    variables_.push_back(v);
    free_.insert(v);
  }

  std::set<std::string> body_vars;
  for (const auto& atom : atoms_) {
    if (atom.vars.empty()) throw std::invalid_argument("atom with no arguments: " + atom.relation);
    auto [it, fresh] = schema_.relations.emplace(atom.relation, atom.vars.size());
    if (!fresh && it->second != atom.vars.size())
      throw std::invalid_argument("relation " + atom.relation + " used with arities " +
                                  std::to_string(it->second) + " and " +
                                  std::to_string(atom.vars.size()));
    for (const auto& v : atom.vars) {
      body_vars.insert(v);
      if (var_index_.emplace(v, variables_.size()).second) variables_.push_back(v);
    }
  }

  for (const auto& v : head_)
    if (body_vars.count(v) == 0)
      throw std::invalid_argument("head variable not in body: " + v);
}

std::size_t Query::var_index(const std::string& var) const {
  auto it = var_index_.find(var);
  if (it == var_index_.end()) throw std::out_of_range("unknown variable: " + var);
  return it->second;
}

namespace {

struct Token {
  enum class Kind { Name, Integer, LParen, RParen, Comma, Turnstile, Dot, End };
  Kind kind;
  std::string text;
  std::size_t line;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) {}

  Token next() {
    skip_space();
    if (pos_ >= text_.size()) return {Token::Kind::End, "", line_};
    char c = text_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                     text_[pos_] == '_'))
        ++pos_;
      return {Token::Kind::Name, text_.substr(start, pos_ - start), line_};
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      return {Token::Kind::Integer, text_.substr(start, pos_ - start), line_};
    }
    ++pos_;
    switch (c) {
      case '(': return {Token::Kind::LParen, "(", line_};
      case ')': return {Token::Kind::RParen, ")", line_};
      case ',': return {Token::Kind::Comma, ",", line_};
      case '.': return {Token::Kind::Dot, ".", line_};
      case ':':
        if (pos_ < text_.size() && text_[pos_] == '-') {
          ++pos_;
          return {Token::Kind::Turnstile, ":-", line_};
        }
        throw ParseError("expected ':-'", line_);
      default: throw ParseError(std::string("unexpected character '") + c + "'", line_);
    }
  }

 private:
  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '%') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (c == '\n') {
        ++line_;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

class QueryParser {
 public:
  explicit QueryParser(const std::string& text) : lexer_(text) { advance(); }

  Query parse() {
    expect(Token::Kind::Name, "query name");
    std::vector<Token> head_tokens = parse_args(/*allow_empty=*/true, "head");
    std::set<std::string> head_seen;
    for (const Token& t : head_tokens)
      if (!head_seen.insert(t.text).second)
        throw ParseError("duplicate head variable: " + t.text, t.line);

    expect(Token::Kind::Turnstile, "':-'");
    std::vector<Atom> atoms;
    std::map<std::string, std::size_t> arities;
    std::set<std::string> body_vars;
    while (true) {
      Token rel = expect(Token::Kind::Name, "relation symbol");
      std::vector<Token> args = parse_args(/*allow_empty=*/false, "atom");
      auto [it, fresh] = arities.emplace(rel.text, args.size());
      if (!fresh && it->second != args.size())
        throw ParseError("relation " + rel.text + " used with arities " +
                             std::to_string(it->second) + " and " + std::to_string(args.size()),
                         rel.line);
      Atom atom{rel.text, {}};
      for (const Token& t : args) {
        atom.vars.push_back(t.text);
        body_vars.insert(t.text);
      }
      atoms.push_back(std::move(atom));
      if (cur_.kind == Token::Kind::Comma) {
        advance();
        continue;
      }
      break;
    }
    expect(Token::Kind::Dot, "'.'");
    if (cur_.kind != Token::Kind::End)
      throw ParseError("trailing input after the final '.'", cur_.line);

    std::vector<std::string> head;
    for (const Token& t : head_tokens) {
      if (body_vars.count(t.text) == 0)
        throw ParseError("head variable not in body: " + t.text, t.line);
      head.push_back(t.text);
    }
    try {
      return Query(std::move(head), std::move(atoms));
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), 1);
    }
  }

 private:
  std::vector<Token> parse_args(bool allow_empty, const char* where) {
    expect(Token::Kind::LParen, "'('");
    std::vector<Token> args;
    if (cur_.kind == Token::Kind::RParen && allow_empty) {
      advance();
      return args;
    }
    while (true) {
      if (cur_.kind == Token::Kind::Integer)
        throw ParseError(std::string("constant in ") + where + " position: " + cur_.text,
                         cur_.line);
      args.push_back(expect(Token::Kind::Name, "variable"));
      if (cur_.kind == Token::Kind::Comma) {
        advance();
        continue;
      }
      expect(Token::Kind::RParen, "')'");
      return args;
    }
  }

  Token expect(Token::Kind kind, const char* what) {
    if (cur_.kind != kind)
      throw ParseError(std::string("expected ") + what +
                           (cur_.text.empty() ? "" : ", got '" + cur_.text + "'"),
                       cur_.line);
    Token t = cur_;
    advance();
    return t;
  }

  void advance() { cur_ = lexer_.next(); }

  Lexer lexer_;
  Token cur_{Token::Kind::End, "", 1};
};

}  // namespace

Query parse_query(const std::string& text) { return QueryParser(text).parse(); }

Query parse_query(const std::string& text, const Schema& schema) {
  Query q = parse_query(text);
  for (const auto& [rel, arity] : q.schema().relations) {
    if (!schema.contains(rel)) throw ParseError("relation not in schema: " + rel, 1);
    if (schema.arity(rel) != arity)
      throw ParseError("arity of " + rel + " does not match the schema", 1);
  }
  return q;
}

std::string serialize_query(const Query& q) {
  std::ostringstream out;
  out << "Q(";
  for (std::size_t i = 0; i < q.head().size(); ++i) {
    if (i) out << ",";
    out << q.head()[i];
  }
  out << ") :- ";
  for (std::size_t i = 0; i < q.atoms().size(); ++i) {
    if (i) out << ", ";
    const Atom& a = q.atoms()[i];
    out << a.relation << "(";
    for (std::size_t j = 0; j < a.vars.size(); ++j) {
      if (j) out << ",";
      out << a.vars[j];
    }
    out << ")";
  }
  out << ".";
  return out.str();
}

std::map<std::string, std::set<AtomId>> atoms_index(const Query& q) {
  std::map<std::string, std::set<AtomId>> index;
  for (const auto& v : q.variables()) index[v];  // every variable gets an entry
  for (AtomId i = 0; i < q.atoms().size(); ++i)
    for (const auto& v : q.atoms()[i].vars) index[v].insert(i);
  return index;
}

std::vector<std::vector<AtomId>> component_partition(const Query& q) {
  // Union-find over variables; atoms join the component of their variables.
  std::vector<std::size_t> up(q.variables().size());
  std::iota(up.begin(), up.end(), 0);
  auto find = [&](std::size_t x) {
    while (up[x] != x) x = up[x] = up[up[x]];
    return x;
  };
  for (const auto& atom : q.atoms()) {
    std::size_t lead = q.var_index(atom.vars[0]);
    for (const auto& v : atom.vars) up[find(q.var_index(v))] = find(lead);
  }

  std::map<std::size_t, std::size_t> component_of_root;  // root var -> output slot
  std::vector<std::vector<AtomId>> parts;
  for (AtomId i = 0; i < q.atoms().size(); ++i) {
    std::size_t root = find(q.var_index(q.atoms()[i].vars[0]));
    auto [it, fresh] = component_of_root.emplace(root, parts.size());
    if (fresh) parts.emplace_back();
    parts[it->second].push_back(i);
  }
  return parts;
}

std::vector<Query> connected_components(const Query& q) {
  std::vector<Query> out;
  for (const auto& part : component_partition(q)) {
    std::set<std::string> vars;
    std::vector<Atom> atoms;
    for (AtomId id : part) {
      atoms.push_back(q.atoms()[id]);
      for (const auto& v : q.atoms()[id].vars) vars.insert(v);
    }
    std::vector<std::string> head;
    for (const auto& v : q.head())
      if (vars.count(v)) head.push_back(v);
    out.emplace_back(std::move(head), std::move(atoms));
  }
  return out;
}

bool self_join_free(const Query& q) {
  std::set<std::string> seen;
  for (const auto& atom : q.atoms())
    if (!seen.insert(atom.relation).second) return false;
  return true;
}

}  // namespace dyncq
