#include "dyncq/oracle.hpp"

#include <functional>

namespace dyncq {

namespace {

constexpr ConstId kUnbound = static_cast<ConstId>(-1);

// Backtracks over the atoms in query order: each atom scans its relation's
// facts and extends the partial valuation where the bound positions agree.
// Calls emit on every total valuation; emit returning false stops the search.
bool search(const Query& q, const Database& db, std::size_t atom_idx,
            std::vector<ConstId>& binding, const std::function<bool()>& emit) {
  if (atom_idx == q.atoms().size()) return emit();

  const Atom& atom = q.atoms()[atom_idx];
  std::vector<std::size_t> positions;
  positions.reserve(atom.vars.size());
  for (const auto& v : atom.vars) positions.push_back(q.var_index(v));

  for (const Tuple& fact : db.facts(atom.relation)) {
    bool ok = true;
    std::vector<std::size_t> bound_here;
    for (std::size_t p = 0; p < positions.size() && ok; ++p) {
      ConstId& slot = binding[positions[p]];
      if (slot == kUnbound) {
        slot = fact[p];
        bound_here.push_back(positions[p]);
      } else if (slot != fact[p]) {
        ok = false;
      }
    }
    bool keep_going = !ok || search(q, db, atom_idx + 1, binding, emit);
    for (std::size_t p : bound_here) binding[p] = kUnbound;
    if (!keep_going) return false;
  }
  return true;
}

TupleSet eval_one(const Query& q, const Database& db) {
  TupleSet result;
  std::vector<ConstId> binding(q.variables().size(), kUnbound);
  search(q, db, 0, binding, [&]() {
    std::vector<std::string> row;
    row.reserve(q.head().size());
    for (const auto& v : q.head()) row.push_back(db.constants().token(binding[q.var_index(v)]));
    result.insert(std::move(row));
    return true;
  });
  return result;
}

bool satisfiable(const Query& q, const Database& db) {
  bool found = false;
  std::vector<ConstId> binding(q.variables().size(), kUnbound);
  search(q, db, 0, binding, [&]() {
    found = true;
    return false;  // stop at the first witness
  });
  return found;
}

}  // namespace

TupleSet eval_naive(const Query& q, const Database& db) { return eval_one(q, db); }

std::uint64_t count_naive(const Query& q, const Database& db) {
  // Components share no variables, so the component counts multiply; this
  // avoids materializing cross products.
  std::uint64_t product = 1;
  for (const Query& comp : connected_components(q)) {
    if (comp.is_boolean()) {
      if (!satisfiable(comp, db)) return 0;
    } else {
      product *= static_cast<std::uint64_t>(eval_one(comp, db).size());
      if (product == 0) return 0;
    }
  }
  return product;
}

bool answer_naive(const Query& q, const Database& db) {
  for (const Query& comp : connected_components(q))
    if (!satisfiable(comp, db)) return false;
  return true;
}

}  // namespace dyncq
