#include "dyncq/analysis.hpp"

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <set>

namespace dyncq {

namespace {

// Atom sets as bitmasks over atom positions (queries stay small).
std::vector<std::uint64_t> atom_masks(const Query& q) {
  if (q.atoms().size() > 64)
    throw std::invalid_argument("more than 64 atoms are not supported");
  std::vector<std::uint64_t> mask(q.variables().size(), 0);
  for (AtomId i = 0; i < q.atoms().size(); ++i)
    for (const auto& v : q.atoms()[i].vars) mask[q.var_index(v)] |= 1ull << i;
  return mask;
}

}  // namespace

std::optional<QhViolation> find_qh_violation(const Query& q) {
  const auto mask = atom_masks(q);
  const auto& vars = q.variables();
  for (std::size_t a = 0; a < vars.size(); ++a) {
    for (std::size_t b = a + 1; b < vars.size(); ++b) {
      std::uint64_t ma = mask[a], mb = mask[b], common = ma & mb;
      if (common != 0 && common != ma && common != mb)
        return QhViolation{vars[a], vars[b], 1};
      if (ma != mb && common == ma && q.is_free(vars[a]) && !q.is_free(vars[b]))
        return QhViolation{vars[a], vars[b], 2};
      if (ma != mb && common == mb && q.is_free(vars[b]) && !q.is_free(vars[a]))
        return QhViolation{vars[b], vars[a], 2};
    }
  }
  return std::nullopt;
}

bool is_q_hierarchical(const Query& q) { return !find_qh_violation(q).has_value(); }

int QTree::node_of(const std::string& v) const {
  for (std::size_t i = 0; i < var.size(); ++i)
    if (var[i] == v) return static_cast<int>(i);
  throw std::out_of_range("variable not in tree: " + v);
}

namespace {

// Recursive construction: pick a variable occurring in every atom of the
// piece (free ones take precedence; ties go to head order, then first
// occurrence in the query text), strip it, and recurse on the connected
// sub-pieces. Fails exactly when the component is not q-hierarchical.
struct TreeBuilder {
  const Query& q;
  QTree& tree;
  std::vector<std::set<std::size_t>> remaining;  // per atom: unstripped variables

  // Returns the node id of the sub-piece's root, or -1 when stuck.
  int build(const std::vector<AtomId>& piece, int parent) {
    std::set<std::size_t> piece_vars;
    for (AtomId a : piece) piece_vars.insert(remaining[a].begin(), remaining[a].end());

    bool any_free = false;
    for (std::size_t v : piece_vars)
      if (q.is_free(q.variables()[v])) any_free = true;

    // Candidates: variables contained in every atom of the piece. Variable
    // indices already encode head order before body-occurrence order.
    int chosen = -1;
    for (std::size_t v : piece_vars) {
      if (any_free && !q.is_free(q.variables()[v])) continue;
      bool in_all = true;
      for (AtomId a : piece)
        if (remaining[a].count(v) == 0) {
          in_all = false;
          break;
        }
      if (in_all) {
        chosen = static_cast<int>(v);
        break;  // piece_vars iterates in ascending index order
      }
    }
    if (chosen < 0) return -1;

    int node = static_cast<int>(tree.var.size());
    tree.var.push_back(q.variables()[chosen]);
    tree.parent.push_back(parent);
    tree.children.emplace_back();
    tree.free.push_back(q.is_free(q.variables()[chosen]));
    tree.atoms_at.emplace_back();
    tree.path.emplace_back();
    if (parent >= 0) tree.path[node] = tree.path[parent];
    tree.path[node].push_back(node);

    std::vector<AtomId> open;
    for (AtomId a : piece) {
      remaining[a].erase(chosen);
      if (remaining[a].empty())
        tree.atoms_at[node].push_back(a);
      else
        open.push_back(a);
    }

    // Partition the open atoms into connected sub-pieces by shared variables.
    std::map<std::size_t, std::size_t> var_group;
    std::vector<std::size_t> up;
    auto find = [&](std::size_t x) {
      while (up[x] != x) x = up[x] = up[up[x]];
      return x;
    };
    std::vector<std::vector<AtomId>> groups;
    for (AtomId a : open) {
      std::size_t lead = static_cast<std::size_t>(-1);
      for (std::size_t v : remaining[a]) {
        auto [it, fresh] = var_group.emplace(v, up.size());
        if (fresh) {
          up.push_back(it->second);
        }
        if (lead == static_cast<std::size_t>(-1))
          lead = find(it->second);
        else
          up[find(it->second)] = lead = find(lead);
      }
    }
    std::map<std::size_t, std::size_t> group_slot;
    for (AtomId a : open) {
      std::size_t root = find(var_group.at(*remaining[a].begin()));
      auto [it, fresh] = group_slot.emplace(root, groups.size());
      if (fresh) groups.emplace_back();
      groups[it->second].push_back(a);
    }

    std::vector<std::pair<std::size_t, int>> kids;  // (root variable index, node)
    for (const auto& group : groups) {
      int child = build(group, node);
      if (child < 0) return -1;
      kids.emplace_back(q.var_index(tree.var[child]), child);
    }
    std::sort(kids.begin(), kids.end());  // by first occurrence of the child root
    for (const auto& [idx, child] : kids) {
      (void)idx;
      tree.children[node].push_back(child);
    }
    return node;
  }
};

}  // namespace

QTreeResult build_qtree(const Query& component) {
  QTreeResult result;
  QTree tree{component, {}, 0, {}, {}, {}, {}, {}, {}};

  TreeBuilder builder{component, tree, {}};
  builder.remaining.resize(component.atoms().size());
  std::vector<AtomId> all(component.atoms().size());
  std::iota(all.begin(), all.end(), 0);
  for (AtomId a : all)
    for (const auto& v : component.atoms()[a].vars)
      builder.remaining[a].insert(component.var_index(v));

  int root = builder.build(all, -1);
  if (root < 0) {
    result.violation = find_qh_violation(component);
    assert(result.violation.has_value());
    return result;
  }
  tree.root = root;
  assert(root == 0);

  // Pre-order over the free prefix gives the cursor's column order.
  std::vector<int> stack;
  if (tree.free[tree.root]) stack.push_back(tree.root);
  while (!stack.empty()) {
    int node = stack.back();
    stack.pop_back();
    tree.output_order.push_back(node);
    const auto& ch = tree.children[node];
    for (auto it = ch.rbegin(); it != ch.rend(); ++it)
      if (tree.free[*it]) stack.push_back(*it);
  }

  result.tree = std::move(tree);
  return result;
}

QTreeForestResult build_qtree_forest(const Query& q) {
  QTreeForestResult result;
  for (const Query& comp : connected_components(q)) {
    QTreeResult one = build_qtree(comp);
    if (!one.tree) {
      result.violation = one.violation;
      return result;
    }
    result.trees.push_back(std::move(*one.tree));
  }
  return result;
}

namespace {

// Key identifying a syntactic atom: relation plus variable indices.
using AtomKey = std::pair<std::string, std::vector<std::size_t>>;

AtomKey key_of(const Query& q, const Atom& atom) {
  std::vector<std::size_t> vars;
  vars.reserve(atom.vars.size());
  for (const auto& v : atom.vars) vars.push_back(q.var_index(v));
  return {atom.relation, std::move(vars)};
}

// Searches, in lexicographic order over assignments of the non-head
// variables, for an endomorphism fixing the head whose image omits at least
// one atom position. Returns the surviving atom positions, or empty.
std::vector<AtomId> find_retraction(const Query& q) {
  const std::size_t nvars = q.variables().size();
  std::vector<std::size_t> image(nvars);
  std::vector<bool> fixed(nvars, false);
  for (const auto& v : q.head()) {
    std::size_t i = q.var_index(v);
    image[i] = i;
    fixed[i] = true;
  }
  std::vector<std::size_t> open;  // variables to assign, in occurrence order
  for (std::size_t i = 0; i < nvars; ++i)
    if (!fixed[i]) open.push_back(i);

  std::map<AtomKey, AtomId> canon;  // syntactic atom -> first position
  std::vector<AtomKey> keys;
  for (AtomId i = 0; i < q.atoms().size(); ++i) {
    keys.push_back(key_of(q, q.atoms()[i]));
    canon.emplace(keys.back(), i);
  }

  // Atoms checkable once their last-assigned variable is mapped.
  auto atom_ready_after = [&](AtomId a, std::size_t depth) {
    for (std::size_t v : keys[a].second)
      if (!fixed[v]) {
        bool assigned = false;
        for (std::size_t d = 0; d < depth; ++d)
          if (open[d] == v) assigned = true;
        if (!assigned) return false;
      }
    return true;
  };

  std::vector<AtomId> survivors;
  std::function<bool(std::size_t)> descend = [&](std::size_t depth) -> bool {
    if (depth == open.size()) {
      std::set<AtomId> hit;
      for (AtomId a = 0; a < q.atoms().size(); ++a) {
        AtomKey mapped = keys[a];
        for (auto& v : mapped.second) v = image[v];
        auto it = canon.find(mapped);
        if (it == canon.end()) return false;  // not a homomorphism
        hit.insert(it->second);
      }
      if (hit.size() == q.atoms().size()) return false;  // image omits nothing
      survivors.assign(hit.begin(), hit.end());
      return true;
    }
    for (std::size_t target = 0; target < nvars; ++target) {
      image[open[depth]] = target;
      bool viable = true;
      for (AtomId a = 0; a < q.atoms().size() && viable; ++a) {
        if (!atom_ready_after(a, depth + 1)) continue;
        AtomKey mapped = keys[a];
        for (auto& v : mapped.second) v = image[v];
        if (canon.find(mapped) == canon.end()) viable = false;
      }
      if (viable && descend(depth + 1)) return true;
    }
    return false;
  };

  if (descend(0)) return survivors;
  return {};
}

}  // namespace

Query homomorphic_core(const Query& q) {
  Query current = q;
  while (true) {
    std::vector<AtomId> survivors = find_retraction(current);
    if (survivors.empty()) return current;
    std::vector<Atom> atoms;
    for (AtomId a : survivors) atoms.push_back(current.atoms()[a]);
    current = Query(current.head(), std::move(atoms));
  }
}

bool queries_isomorphic(const Query& a, const Query& b) {
  if (a.head().size() != b.head().size()) return false;
  if (a.atoms().size() != b.atoms().size()) return false;
  if (a.variables().size() != b.variables().size()) return false;

  const std::size_t n = a.variables().size();
  std::vector<int> to_b(n, -1);
  std::vector<bool> used(b.variables().size(), false);
  for (std::size_t i = 0; i < a.head().size(); ++i) {
    std::size_t va = a.var_index(a.head()[i]);
    std::size_t vb = b.var_index(b.head()[i]);
    if (to_b[va] >= 0 && static_cast<std::size_t>(to_b[va]) != vb) return false;
    if (to_b[va] < 0) {
      if (used[vb]) return false;
      to_b[va] = static_cast<int>(vb);
      used[vb] = true;
    }
  }

  std::multiset<AtomKey> b_atoms;
  for (const Atom& atom : b.atoms()) b_atoms.insert(key_of(b, atom));

  std::function<bool(std::size_t)> match = [&](std::size_t v) -> bool {
    while (v < n && to_b[v] >= 0) ++v;
    if (v == n) {
      std::multiset<AtomKey> mapped;
      for (const Atom& atom : a.atoms()) {
        AtomKey k = key_of(a, atom);
        for (auto& idx : k.second) idx = static_cast<std::size_t>(to_b[idx]);
        mapped.insert(std::move(k));
      }
      return mapped == b_atoms;
    }
    for (std::size_t t = 0; t < b.variables().size(); ++t) {
      if (used[t]) continue;
      to_b[v] = static_cast<int>(t);
      used[t] = true;
      if (match(v + 1)) return true;
      to_b[v] = -1;
      used[t] = false;
    }
    return false;
  };
  return match(0);
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Tractable: return "Tractable";
    case Verdict::ConditionallyHard: return "ConditionallyHard";
    case Verdict::Open: return "Open";
  }
  return "Open";
}

Classification classify(const Query& q) {
  Classification c{.q_hierarchical = false,
                   .witness = find_qh_violation(q),
                   .core = homomorphic_core(q)};
  c.q_hierarchical = !c.witness.has_value();
  c.core_q_hierarchical = is_q_hierarchical(c.core);

  // Answering the existential closure depends only on the closure's core.
  Query closure({}, q.atoms());
  bool boolean_core_qh = is_q_hierarchical(homomorphic_core(closure));
  c.boolean_verdict = boolean_core_qh ? Verdict::Tractable : Verdict::ConditionallyHard;

  c.counting_verdict = c.core_q_hierarchical ? Verdict::Tractable : Verdict::ConditionallyHard;

  if (c.core_q_hierarchical)
    c.enumeration_verdict = Verdict::Tractable;
  else if (self_join_free(q))
    c.enumeration_verdict = Verdict::ConditionallyHard;
  else
    c.enumeration_verdict = Verdict::Open;

  return c;
}

}  // namespace dyncq
