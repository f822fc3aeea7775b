#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dyncq/analysis.hpp"
#include "dyncq/engine.hpp"
#include "dyncq/oracle.hpp"

namespace dyncq_test {

// Recomputes every stored quantity of the engine's structure from first
// principles (via the reference evaluator) and returns the discrepancies.
// An empty result means the stored state is exact: item presence, weights,
// free weights, list membership, child sum registers and root registers.
inline std::vector<std::string> structure_errors(const dyncq::Engine& engine) {
  using namespace dyncq;
  std::vector<std::string> errors;
  auto fail = [&](const std::string& where, const std::string& what) {
    errors.push_back(where + ": " + what);
  };
  auto str = [](const std::vector<std::string>& key) {
    std::string out = "[";
    for (std::size_t i = 0; i < key.size(); ++i) out += (i ? " " : "") + key[i];
    return out + "]";
  };

  const Database db = engine.current_facts();
  const StructureSnapshot snap = engine.snapshot();
  const std::vector<Query> comps = connected_components(engine.core());
  const std::set<std::string> free_vars(engine.core().head().begin(),
                                        engine.core().head().end());

  if (comps.size() != snap.components.size()) {
    fail("structure", "component count mismatch");
    return errors;
  }

  for (std::size_t ci = 0; ci < comps.size(); ++ci) {
    const Query& comp = comps[ci];
    const ComponentSnapshot& cs = snap.components[ci];
    QTreeResult tr = build_qtree(comp);
    if (!tr.tree) {
      fail("structure", "component without an evaluation tree");
      return errors;
    }
    const QTree& t = *tr.tree;
    if (cs.nodes.size() != t.var.size()) {
      fail(serialize_query(comp), "node count mismatch");
      continue;
    }
    std::map<std::string, const NodeSnapshot*> by_var;
    for (const NodeSnapshot& ns : cs.nodes) by_var[ns.var] = &ns;

    struct NodeFacts {
      std::set<std::vector<std::string>> present;
      std::map<std::vector<std::string>, std::uint64_t> weight;      // fit only
      std::map<std::vector<std::string>, std::uint64_t> free_weight;  // fit only
    };
    std::vector<NodeFacts> truth(t.var.size());

    for (std::size_t v = 0; v < t.var.size(); ++v) {
      std::vector<std::string> path_vars;
      for (int n : t.path[v]) path_vars.push_back(t.var[n]);

      std::vector<Atom> covering;  // atoms whose variable set contains v
      std::set<std::string> span(path_vars.begin(), path_vars.end());
      for (const Atom& atom : comp.atoms()) {
        if (std::find(atom.vars.begin(), atom.vars.end(), t.var[v]) == atom.vars.end()) continue;
        covering.push_back(atom);
        span.insert(atom.vars.begin(), atom.vars.end());
      }

      // An item exists iff one covering atom alone has a matching fact.
      for (const Atom& atom : covering) {
        Query one(path_vars, {atom});
        for (const auto& row : eval_naive(one, db)) truth[v].present.insert(row);
      }

      // Weight: satisfying assignments over all variables of the covering
      // atoms, grouped by the path prefix; free weight counts the distinct
      // projections onto the free variables.
      std::vector<std::string> head = path_vars;
      for (const auto& var : t.var)
        if (span.count(var) && std::find(head.begin(), head.end(), var) == head.end())
          head.push_back(var);
      Query sub(head, covering);
      std::vector<std::size_t> free_cols;
      for (std::size_t c = 0; c < head.size(); ++c)
        if (free_vars.count(head[c])) free_cols.push_back(c);
      std::map<std::vector<std::string>, std::set<std::vector<std::string>>> projections;
      for (const auto& row : eval_naive(sub, db)) {
        std::vector<std::string> prefix(row.begin(), row.begin() + path_vars.size());
        ++truth[v].weight[prefix];
        if (t.free[v]) {
          std::vector<std::string> proj;
          for (std::size_t c : free_cols) proj.push_back(row[c]);
          projections[prefix].insert(std::move(proj));
        }
      }
      for (const auto& [prefix, projs] : projections)
        truth[v].free_weight[prefix] = projs.size();
    }

    auto lookup = [](const std::map<std::vector<std::string>, std::uint64_t>& m,
                     const std::vector<std::string>& key) -> std::uint64_t {
      auto it = m.find(key);
      return it == m.end() ? 0 : it->second;
    };

    for (std::size_t v = 0; v < t.var.size(); ++v) {
      const std::string where = serialize_query(comp) + " node " + t.var[v];
      const NodeSnapshot& ns = *by_var.at(t.var[v]);

      std::vector<std::string> want_children;
      for (int c : t.children[v]) want_children.push_back(t.var[c]);
      if (ns.children != want_children) fail(where, "child order mismatch");
      if (ns.free != t.free[v]) fail(where, "free flag mismatch");

      std::set<std::vector<std::string>> stored;
      for (const ItemState& item : ns.items) stored.insert(item.path_values);
      if (stored != truth[v].present) {
        fail(where, "item set mismatch: stored " + std::to_string(stored.size()) +
                        ", expected " + std::to_string(truth[v].present.size()));
        continue;
      }

      for (const ItemState& item : ns.items) {
        const std::string at = where + " item " + str(item.path_values);
        const std::uint64_t want_w = lookup(truth[v].weight, item.path_values);
        if (item.weight != want_w)
          fail(at, "weight " + std::to_string(item.weight) + " != " + std::to_string(want_w));
        if (item.listed != (want_w > 0)) fail(at, "fit/list membership mismatch");
        if (t.free[v]) {
          const std::uint64_t want_fw = lookup(truth[v].free_weight, item.path_values);
          if (!item.free_weight)
            fail(at, "missing free weight");
          else if (*item.free_weight != want_fw)
            fail(at, "free weight " + std::to_string(*item.free_weight) + " != " +
                         std::to_string(want_fw));
        }

        for (std::size_t slot = 0; slot < t.children[v].size(); ++slot) {
          const int u = t.children[v][slot];
          std::uint64_t want_sum = 0, want_free = 0;
          for (const auto& [key, w] : truth[u].weight) {
            if (!std::equal(item.path_values.begin(), item.path_values.end(), key.begin()))
              continue;
            want_sum += w;
            if (t.free[u]) want_free += lookup(truth[u].free_weight, key);
          }
          if (item.child_weight_sums[slot] != want_sum)
            fail(at, "child sum for " + t.var[u] + " is " +
                         std::to_string(item.child_weight_sums[slot]) + " != " +
                         std::to_string(want_sum));
          if (item.child_free_sums[slot] != want_free)
            fail(at, "child free sum for " + t.var[u] + " is " +
                         std::to_string(item.child_free_sums[slot]) + " != " +
                         std::to_string(want_free));
        }
      }
    }

    // Root registers and the start list itself.
    std::uint64_t want_start = 0, want_start_free = 0;
    std::set<std::string> want_fit_roots;
    for (const auto& [key, w] : truth[t.root].weight) {
      want_start += w;
      want_fit_roots.insert(key[0]);
    }
    for (const auto& [key, fw] : truth[t.root].free_weight) want_start_free += fw;
    const std::string where = serialize_query(comp);
    if (cs.root_weight_sum != want_start)
      fail(where, "start weight sum " + std::to_string(cs.root_weight_sum) + " != " +
                      std::to_string(want_start));
    if (cs.has_free != t.free[t.root]) fail(where, "free component flag mismatch");
    if (cs.has_free && cs.root_free_sum != want_start_free)
      fail(where, "start free sum " + std::to_string(cs.root_free_sum) + " != " +
                      std::to_string(want_start_free));
    std::set<std::string> listed_roots(cs.root_list.begin(), cs.root_list.end());
    if (listed_roots.size() != cs.root_list.size())
      fail(where, "duplicate entries in the start list");
    if (listed_roots != want_fit_roots) fail(where, "start list membership mismatch");
  }
  return errors;
}

}  // namespace dyncq_test
