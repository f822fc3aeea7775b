#include "dyncq/workload.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

namespace dyncq {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 0x632be59bd9b4e019ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

namespace {

// Self-contained splitmix64 stream; keeps generated workloads identical
// across standard libraries.
struct Rng {
  std::uint64_t state;

  explicit Rng(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t below(std::uint64_t n) { return n ? next() % n : 0; }

  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }
};

std::vector<std::string> split_tokens(const std::string& line) {
  std::vector<std::string> toks;
  std::string cur;
  for (char c : line) {
    if (c == '%') break;
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) {
        toks.push_back(cur);
        cur.clear();
      }
      continue;
    }
    cur.push_back(c);
  }
  if (!cur.empty()) toks.push_back(cur);
  return toks;
}

bool valid_constant(const std::string& t) {
  if (t.empty()) return false;
  if (std::isalpha(static_cast<unsigned char>(t[0]))) {
    for (char c : t)
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return true;
  }
  for (char c : t)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

bool valid_relation(const std::string& t) {
  return valid_constant(t) && std::isalpha(static_cast<unsigned char>(t[0]));
}

}  // namespace

Stream parse_stream(const std::string& text) {
  Stream stream;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::vector<std::string> toks = split_tokens(line);
    if (toks.empty()) continue;
    const std::string& op = toks[0];
    if (op == "+" || op == "-") {
      if (toks.size() < 3)
        throw ParseError("update command needs a relation and constants", lineno);
      if (!valid_relation(toks[1]))
        throw ParseError("malformed relation symbol '" + toks[1] + "'", lineno);
      for (std::size_t i = 2; i < toks.size(); ++i)
        if (!valid_constant(toks[i]))
          throw ParseError("malformed constant '" + toks[i] + "'", lineno);
      UpdateCommand cmd;
      cmd.kind = op == "+" ? UpdateCommand::Kind::Insert : UpdateCommand::Kind::Delete;
      cmd.relation = toks[1];
      cmd.tuple.assign(toks.begin() + 2, toks.end());
      stream.emplace_back(std::move(cmd));
    } else if (op == "?") {
      if (toks.size() != 2) throw ParseError("probe needs exactly one kind", lineno);
      if (toks[1] == "count")
        stream.emplace_back(Probe{ProbeKind::Count});
      else if (toks[1] == "answer")
        stream.emplace_back(Probe{ProbeKind::Answer});
      else if (toks[1] == "enum")
        stream.emplace_back(Probe{ProbeKind::Enum});
      else
        throw ParseError("unknown probe kind '" + toks[1] + "'", lineno);
    } else {
      throw ParseError("expected '+', '-' or '?', got '" + op + "'", lineno);
    }
  }
  return stream;
}

std::string serialize_stream(const Stream& s) {
  std::ostringstream out;
  for (const StreamCommand& cmd : s) {
    if (const auto* upd = std::get_if<UpdateCommand>(&cmd)) {
      out << (upd->kind == UpdateCommand::Kind::Insert ? "+" : "-") << ' ' << upd->relation;
      for (const auto& c : upd->tuple) out << ' ' << c;
      out << '\n';
    } else {
      switch (std::get<Probe>(cmd).kind) {
        case ProbeKind::Count: out << "? count\n"; break;
        case ProbeKind::Answer: out << "? answer\n"; break;
        case ProbeKind::Enum: out << "? enum\n"; break;
      }
    }
  }
  return out.str();
}

std::string serialize_answers(const std::vector<ExpectedAnswer>& answers) {
  std::ostringstream out;
  for (const ExpectedAnswer& a : answers) {
    switch (a.kind) {
      case ProbeKind::Count: out << a.count << '\n'; break;
      case ProbeKind::Answer: out << (a.answer ? "yes" : "no") << '\n'; break;
      case ProbeKind::Enum:
        for (const auto& tuple : a.tuples) {
          for (std::size_t i = 0; i < tuple.size(); ++i) {
            if (i) out << ' ';
            out << tuple[i];
          }
          out << '\n';
        }
        out << "#\n";
        break;
    }
  }
  return out.str();
}

OuMvInstance random_oumv(std::size_t n, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x4d56));  // "MV"
  OuMvInstance inst;
  inst.n = n;
  inst.m.assign(n, std::vector<bool>(n, false));
  for (auto& row : inst.m)
    for (std::size_t j = 0; j < n; ++j) row[j] = rng.below(2) == 1;
  for (std::size_t t = 0; t < n; ++t) {
    std::vector<bool> u(n), v(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = rng.below(2) == 1;
    for (std::size_t j = 0; j < n; ++j) v[j] = rng.below(2) == 1;
    inst.rounds.emplace_back(std::move(u), std::move(v));
  }
  return inst;
}

namespace {

struct OuMvRoles {
  std::size_t x = 0, y = 0;          // variable indices in q.variables()
  AtomId left = 0, joint = 0, right = 0;  // atoms carrying u, M and v
};

OuMvRoles find_roles(const Query& q) {
  const auto& vars = q.variables();
  for (std::size_t x = 0; x < vars.size(); ++x) {
    for (std::size_t y = 0; y < vars.size(); ++y) {
      if (x == y) continue;
      std::optional<AtomId> left, joint, right;
      for (AtomId a = 0; a < q.atoms().size(); ++a) {
        const auto& av = q.atoms()[a].vars;
        bool has_x = std::find(av.begin(), av.end(), vars[x]) != av.end();
        bool has_y = std::find(av.begin(), av.end(), vars[y]) != av.end();
        if (has_x && has_y && !joint) joint = a;
        else if (has_x && !has_y && !left) left = a;
        else if (has_y && !has_x && !right) right = a;
      }
      if (left && joint && right) return {x, y, *left, *joint, *right};
    }
  }
  throw std::invalid_argument(
      "query lacks the matrix-vector atom pattern (one atom with only the row "
      "variable, one with both, one with only the column variable)");
}

}  // namespace

GeneratedWorkload gen_oumv(const OuMvInstance& inst) {
  return gen_oumv(parse_query("Q() :- S(x), E(x,y), T(y)."), inst);
}

GeneratedWorkload gen_oumv(const Query& q, const OuMvInstance& inst) {
  const OuMvRoles roles = find_roles(q);
  const auto& vars = q.variables();
  const std::size_t n = inst.n;

  // Token of a variable under the (i, j) embedding: the row variable becomes
  // a<i>, the column variable b<j>, every other variable a fixed c<s>.
  std::map<std::string, std::string> fixed;
  std::size_t s = 0;
  for (std::size_t v = 0; v < vars.size(); ++v)
    if (v != roles.x && v != roles.y) fixed[vars[v]] = "c" + std::to_string(++s);
  auto token = [&](const std::string& var, std::size_t i, std::size_t j) {
    if (var == vars[roles.x]) return "a" + std::to_string(i);
    if (var == vars[roles.y]) return "b" + std::to_string(j);
    return fixed.at(var);
  };
  auto fact = [&](AtomId a, std::size_t i, std::size_t j) {
    const Atom& atom = q.atoms()[a];
    UpdateCommand cmd;
    cmd.kind = UpdateCommand::Kind::Insert;
    cmd.relation = atom.relation;
    for (const auto& v : atom.vars) cmd.tuple.push_back(token(v, i, j));
    return cmd;
  };

  GeneratedWorkload out{q, {}, {}};

  // Base state: the joint atom encodes the matrix, both vector encodings
  // start all-zero, and every undesignated atom is filled for all i, j.
  std::set<std::pair<std::string, std::vector<std::string>>> seen;
  auto emit_insert = [&](UpdateCommand cmd) {
    if (seen.emplace(cmd.relation, cmd.tuple).second) out.stream.emplace_back(std::move(cmd));
  };
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= n; ++j) {
      if (inst.m[i - 1][j - 1]) emit_insert(fact(roles.joint, i, j));
      for (AtomId a = 0; a < q.atoms().size(); ++a)
        if (a != roles.left && a != roles.joint && a != roles.right) emit_insert(fact(a, i, j));
    }

  std::vector<bool> u(n, false), v(n, false);
  for (const auto& [ut, vt] : inst.rounds) {
    for (std::size_t i = 1; i <= n; ++i)
      if (u[i - 1] != ut[i - 1]) {
        UpdateCommand cmd = fact(roles.left, i, 1);
        cmd.kind = ut[i - 1] ? UpdateCommand::Kind::Insert : UpdateCommand::Kind::Delete;
        out.stream.emplace_back(std::move(cmd));
      }
    for (std::size_t j = 1; j <= n; ++j)
      if (v[j - 1] != vt[j - 1]) {
        UpdateCommand cmd = fact(roles.right, 1, j);
        cmd.kind = vt[j - 1] ? UpdateCommand::Kind::Insert : UpdateCommand::Kind::Delete;
        out.stream.emplace_back(std::move(cmd));
      }
    u = ut;
    v = vt;
    out.stream.emplace_back(Probe{ProbeKind::Answer});

    bool hit = false;
    for (std::size_t i = 0; i < n && !hit; ++i)
      for (std::size_t j = 0; j < n && !hit; ++j) hit = u[i] && inst.m[i][j] && v[j];
    ExpectedAnswer expected;
    expected.kind = ProbeKind::Answer;
    expected.answer = hit;
    out.expected.push_back(std::move(expected));
  }
  return out;
}

OVInstance random_ov(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x4f56));  // "OV"
  OVInstance inst;
  inst.n = n;
  inst.d = d;
  inst.u.assign(n, std::vector<bool>(d, false));
  inst.v.assign(n, std::vector<bool>(d, false));
  for (auto& row : inst.u)
    for (std::size_t j = 0; j < d; ++j) row[j] = rng.below(2) == 1;
  for (auto& row : inst.v)
    for (std::size_t j = 0; j < d; ++j) row[j] = rng.below(2) == 1;
  return inst;
}

GeneratedWorkload gen_ov(const OVInstance& inst) {
  GeneratedWorkload out{parse_query("Q(x) :- E(x,y), T(y)."), {}, {}};

  for (std::size_t i = 1; i <= inst.n; ++i)
    for (std::size_t j = 1; j <= inst.d; ++j)
      if (inst.u[i - 1][j - 1]) {
        UpdateCommand cmd{UpdateCommand::Kind::Insert, "E",
                          {"a" + std::to_string(i), "b" + std::to_string(j)}};
        out.stream.emplace_back(std::move(cmd));
      }

  std::vector<bool> current(inst.d, false);  // the T encoding between rounds
  for (const auto& probe_vec : inst.v) {
    for (std::size_t j = 1; j <= inst.d; ++j)
      if (current[j - 1] != probe_vec[j - 1]) {
        UpdateCommand cmd{probe_vec[j - 1] ? UpdateCommand::Kind::Insert
                                           : UpdateCommand::Kind::Delete,
                          "T",
                          {"b" + std::to_string(j)}};
        out.stream.emplace_back(std::move(cmd));
      }
    current = probe_vec;
    out.stream.emplace_back(Probe{ProbeKind::Count});

    std::uint64_t matches = 0;
    for (const auto& stored : inst.u) {
      bool overlap = false;
      for (std::size_t j = 0; j < inst.d && !overlap; ++j) overlap = stored[j] && probe_vec[j];
      if (overlap) ++matches;
    }
    ExpectedAnswer expected;
    expected.kind = ProbeKind::Count;
    expected.count = matches;
    out.expected.push_back(std::move(expected));
  }
  return out;
}

namespace {

struct TreeShape {
  std::size_t vars = 0;
  std::vector<std::size_t> parent;      // parent[i] < i, parent[0] unused
  std::vector<bool> free;               // connected prefix containing the root
  std::vector<std::vector<std::size_t>> paths;  // per atom: the covered root path
};

TreeShape random_tree_shape(Rng& rng, std::size_t max_vars, std::size_t atom_budget) {
  TreeShape shape;
  shape.vars = 1 + rng.below(max_vars);
  shape.parent.assign(shape.vars, 0);
  for (std::size_t i = 1; i < shape.vars; ++i) shape.parent[i] = rng.below(i);

  std::vector<std::vector<std::size_t>> children(shape.vars);
  for (std::size_t i = 1; i < shape.vars; ++i) children[shape.parent[i]].push_back(i);

  // Trim leaf branches until the leaves fit into the atom budget.
  std::vector<bool> alive(shape.vars, true);
  auto leaves = [&]() {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < shape.vars; ++i) {
      if (!alive[i]) continue;
      bool leaf = true;
      for (std::size_t c : children[i])
        if (alive[c]) leaf = false;
      if (leaf) out.push_back(i);
    }
    return out;
  };
  while (leaves().size() > atom_budget) {
    auto ls = leaves();
    alive[ls[rng.below(ls.size())]] = false;
  }

  // Compact the surviving nodes, keeping the parent-before-child numbering.
  std::vector<std::size_t> new_id(shape.vars, 0);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < shape.vars; ++i)
    if (alive[i]) new_id[i] = kept++;
  TreeShape out;
  out.vars = kept;
  out.parent.assign(kept, 0);
  for (std::size_t i = 1; i < shape.vars; ++i)
    if (alive[i]) out.parent[new_id[i]] = new_id[shape.parent[i]];

  // Free variables: a randomly grown connected prefix containing the root.
  std::size_t target = rng.below(kept + 1);
  out.free.assign(kept, false);
  std::size_t grown = 0;
  if (target > 0) {
    out.free[0] = true;
    grown = 1;
    while (grown < target) {
      std::vector<std::size_t> fringe;
      for (std::size_t i = 1; i < kept; ++i)
        if (!out.free[i] && out.free[out.parent[i]]) fringe.push_back(i);
      if (fringe.empty()) break;
      out.free[fringe[rng.below(fringe.size())]] = true;
      ++grown;
    }
  }

  // Atoms cover every leaf's root path, plus random extra paths.
  std::vector<std::vector<std::size_t>> kids(kept);
  for (std::size_t i = 1; i < kept; ++i) kids[out.parent[i]].push_back(i);
  auto path_of = [&](std::size_t node) {
    std::vector<std::size_t> path;
    for (std::size_t at = node;; at = out.parent[at]) {
      path.push_back(at);
      if (at == 0) break;
    }
    std::reverse(path.begin(), path.end());
    return path;
  };
  for (std::size_t i = 0; i < kept; ++i)
    if (kids[i].empty()) out.paths.push_back(path_of(i));
  std::size_t extra = rng.below(atom_budget - out.paths.size() + 1);
  for (std::size_t e = 0; e < extra; ++e) out.paths.push_back(path_of(rng.below(kept)));
  return out;
}

}  // namespace

GeneratedCase gen_random_qh(std::uint64_t seed, const RandomQhParams& params) {
  Rng rng(mix_seed(seed, 0x7168));  // "qh"

  const bool two_components =
      params.max_vars >= 2 && params.max_atoms >= 2 && rng.unit() < params.second_component_rate;

  std::vector<TreeShape> shapes;
  if (two_components) {
    std::size_t vars_a = 1 + rng.below(params.max_vars - 1);
    std::size_t vars_b = std::max<std::size_t>(1, params.max_vars - vars_a);
    std::size_t atoms_a = 1 + rng.below(params.max_atoms - 1);
    std::size_t atoms_b = std::max<std::size_t>(1, params.max_atoms - atoms_a);
    shapes.push_back(random_tree_shape(rng, vars_a, atoms_a));
    shapes.push_back(random_tree_shape(rng, vars_b, atoms_b));
  } else {
    shapes.push_back(random_tree_shape(rng, params.max_vars, params.max_atoms));
  }

  // Materialize atoms: each path becomes an atom; arity may pad with repeats.
  std::vector<Atom> atoms;
  std::vector<std::string> free_vars;
  std::size_t var_base = 0;
  std::map<std::size_t, std::vector<std::string>> symbols_by_arity;
  std::size_t symbol_counter = 0;
  for (const TreeShape& shape : shapes) {
    auto var_name = [&](std::size_t node) { return "v" + std::to_string(var_base + node); };
    for (std::size_t i = 0; i < shape.vars; ++i)
      if (shape.free[i]) free_vars.push_back(var_name(i));
    for (const auto& path : shape.paths) {
      std::vector<std::string> tuple;
      for (std::size_t node : path) tuple.push_back(var_name(node));
      std::size_t arity = path.size();
      if (params.max_arity > arity) arity += rng.below(params.max_arity - path.size() + 1);
      while (tuple.size() < arity) tuple.push_back(var_name(path[rng.below(path.size())]));
      rng.shuffle(tuple);

      auto& pool = symbols_by_arity[arity];
      std::string rel;
      if (!pool.empty() && rng.unit() < 0.3) {
        rel = pool[rng.below(pool.size())];  // introduce a self-join
      } else {
        rel = "R" + std::to_string(symbol_counter++);
        pool.push_back(rel);
      }
      atoms.push_back({rel, std::move(tuple)});
    }
    var_base += shape.vars;
  }
  rng.shuffle(free_vars);
  Query query(std::move(free_vars), std::move(atoms));

  // Update stream with interleaved probes; deletes pick live facts only.
  Stream stream;
  std::vector<std::string> rels;
  for (const auto& [rel, arity] : query.schema().relations) {
    (void)arity;
    rels.push_back(rel);
  }
  std::vector<std::pair<std::string, std::vector<std::string>>> live;
  std::set<std::pair<std::string, std::vector<std::string>>> live_index;
  auto random_insert = [&]() {
    const std::string& rel = rels[rng.below(rels.size())];
    std::vector<std::string> tuple;
    for (std::size_t i = 0; i < query.schema().arity(rel); ++i)
      tuple.push_back(std::to_string(rng.below(params.domain_size)));
    if (live_index.emplace(rel, tuple).second) live.emplace_back(rel, tuple);
    stream.emplace_back(UpdateCommand{UpdateCommand::Kind::Insert, rel, std::move(tuple)});
  };
  auto emit_probe = [&]() {
    std::uint64_t pick = rng.below(5);
    ProbeKind kind = pick < 2 ? ProbeKind::Count : pick < 3 ? ProbeKind::Answer : ProbeKind::Enum;
    stream.emplace_back(Probe{kind});
  };

  std::size_t updates = 0, since_probe = 0;
  while (updates < params.stream_len) {
    if (since_probe >= params.max_probe_gap || rng.unit() < params.probe_rate) {
      emit_probe();
      since_probe = 0;
      continue;
    }
    ++since_probe;
    ++updates;
    if (!live.empty() && rng.unit() >= params.insert_bias) {
      std::size_t pick = rng.below(live.size());
      auto [rel, tuple] = live[pick];
      live[pick] = live.back();
      live.pop_back();
      live_index.erase({rel, tuple});
      stream.emplace_back(UpdateCommand{UpdateCommand::Kind::Delete, rel, std::move(tuple)});
    } else {
      random_insert();
    }
  }
  stream.emplace_back(Probe{ProbeKind::Count});
  stream.emplace_back(Probe{ProbeKind::Answer});
  stream.emplace_back(Probe{ProbeKind::Enum});

  return {std::move(query), std::move(stream)};
}

Stream gen_scaled_stream(const Query& q, std::size_t domain_size, std::uint64_t seed) {
  Rng rng(mix_seed(seed, domain_size));
  Stream stream;
  std::vector<std::string> rels;
  for (const auto& [rel, arity] : q.schema().relations) {
    (void)arity;
    rels.push_back(rel);
  }

  // Structural prefix on reserved constants: forces full item creation,
  // linking, unlinking and cascade deletion at every size, so the worst-case
  // step counts are size-independent by construction.
  auto uniform_tuple = [&](const std::string& rel, const std::string& token) {
    return std::vector<std::string>(q.schema().arity(rel), token);
  };
  for (const auto& rel : rels) {
    stream.emplace_back(UpdateCommand{UpdateCommand::Kind::Insert, rel, uniform_tuple(rel, "w0")});
    stream.emplace_back(UpdateCommand{UpdateCommand::Kind::Insert, rel, uniform_tuple(rel, "w1")});
  }
  stream.emplace_back(Probe{ProbeKind::Enum});
  stream.emplace_back(Probe{ProbeKind::Count});
  stream.emplace_back(Probe{ProbeKind::Answer});
  for (const auto& rel : rels) {
    stream.emplace_back(UpdateCommand{UpdateCommand::Kind::Delete, rel, uniform_tuple(rel, "w1")});
    stream.emplace_back(UpdateCommand{UpdateCommand::Kind::Delete, rel, uniform_tuple(rel, "w0")});
  }
  stream.emplace_back(Probe{ProbeKind::Enum});  // empty result: immediate end

  // Random body: inserts biased three to one, deletes of live facts, probes
  // on fixed periods.
  std::vector<std::pair<std::string, std::vector<std::string>>> live;
  std::set<std::pair<std::string, std::vector<std::string>>> live_index;
  const std::size_t body = 4 * domain_size;
  const std::size_t count_period = std::max<std::size_t>(25, domain_size / 20);
  const std::size_t enum_period = std::max<std::size_t>(50, domain_size / 10);
  for (std::size_t t = 0; t < body; ++t) {
    if ((t + 1) % count_period == 0) stream.emplace_back(Probe{ProbeKind::Count});
    if ((t + 1) % enum_period == 0) stream.emplace_back(Probe{ProbeKind::Enum});
    if (!live.empty() && rng.unit() >= 0.75) {
      std::size_t pick = rng.below(live.size());
      auto [rel, tuple] = live[pick];
      live[pick] = live.back();
      live.pop_back();
      live_index.erase({rel, tuple});
      stream.emplace_back(UpdateCommand{UpdateCommand::Kind::Delete, rel, std::move(tuple)});
    } else {
      const std::string& rel = rels[rng.below(rels.size())];
      std::vector<std::string> tuple;
      for (std::size_t i = 0; i < q.schema().arity(rel); ++i)
        tuple.push_back(std::to_string(rng.below(domain_size)));
      if (live_index.emplace(rel, tuple).second) live.emplace_back(rel, tuple);
      stream.emplace_back(UpdateCommand{UpdateCommand::Kind::Insert, rel, std::move(tuple)});
    }
  }
  stream.emplace_back(Probe{ProbeKind::Count});
  stream.emplace_back(Probe{ProbeKind::Enum});
  stream.emplace_back(Probe{ProbeKind::Answer});
  return stream;
}

}  // namespace dyncq
