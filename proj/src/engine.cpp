#include "dyncq/engine.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>

namespace dyncq {

namespace {

std::string describe(const Classification& c) {
  std::ostringstream out;
  out << "query core is not q-hierarchical; incremental maintenance is inadmissible";
  if (c.witness)
    out << " (variables " << c.witness->var_a << ", " << c.witness->var_b << " break condition "
        << c.witness->condition << ")";
  return out.str();
}

}  // namespace

CoreNotQHierarchical::CoreNotQHierarchical(Classification c)
    : std::runtime_error(describe(c)), classification_(std::move(c)) {}

Engine::Engine(const Query& q) : query_(q), core_(homomorphic_core(q)), schema_(q.schema()) {
  if (!is_q_hierarchical(core_)) throw CoreNotQHierarchical(classify(q));
  for (const auto& [rel, arity] : schema_.relations) {
    (void)arity;
    facts_.emplace(rel, StoredRelation{});
  }
  build_structure();
}

void Engine::build_structure() {
  const auto parts = component_partition(core_);

  // Assemble each component query and remember its atoms' core positions.
  std::vector<Query> comp_queries;
  for (const auto& part : parts) {
    std::set<std::string> vars;
    std::vector<Atom> atoms;
    for (AtomId id : part) {
      atoms.push_back(core_.atoms()[id]);
      for (const auto& v : core_.atoms()[id].vars) vars.insert(v);
    }
    std::vector<std::string> head;
    for (const auto& v : core_.head())
      if (vars.count(v)) head.push_back(v);
    comp_queries.emplace_back(std::move(head), std::move(atoms));
  }

  std::map<std::string, std::pair<int, int>> free_column;  // var -> (component, column)
  std::vector<std::vector<WalkPlan>> plans_per_comp(parts.size());

  for (std::size_t ci = 0; ci < parts.size(); ++ci) {
    const Query& cq = comp_queries[ci];
    QTreeResult built = build_qtree(cq);
    assert(built.tree.has_value());  // the core is q-hierarchical
    const QTree& tree = *built.tree;

    Component comp;
    comp.root = tree.root;
    comp.has_free = !tree.output_order.empty();
    comp.nodes.resize(tree.var.size());
    for (std::size_t ni = 0; ni < tree.var.size(); ++ni) {
      NodeInfo& node = comp.nodes[ni];
      node.var = tree.var[ni];
      node.parent = tree.parent[ni];
      node.free = tree.free[ni];
      node.children = tree.children[ni];
      for (int child : node.children) {
        comp.nodes[child].slot_in_parent = static_cast<int>(node.child_free.size());
        node.child_free.push_back(tree.free[child]);
      }
      // Atoms whose variable set covers this node, i.e. whose path runs
      // through it; their counters live on this node's items.
      for (std::size_t local = 0; local < cq.atoms().size(); ++local) {
        const auto& vars = cq.atoms()[local].vars;
        if (std::find(vars.begin(), vars.end(), node.var) != vars.end())
          node.tracked_atoms.push_back(parts[ci][local]);
      }
      for (AtomId local : tree.atoms_at[ni]) {
        AtomId core_id = parts[ci][local];
        auto it = std::find(node.tracked_atoms.begin(), node.tracked_atoms.end(), core_id);
        assert(it != node.tracked_atoms.end());
        node.represented_slots.push_back(
            static_cast<int>(std::distance(node.tracked_atoms.begin(), it)));
      }
    }

    comp.output_nodes = tree.output_order;
    comp.output_parent_pos.assign(comp.output_nodes.size(), -1);
    comp.output_parent_slot.assign(comp.output_nodes.size(), -1);
    for (std::size_t col = 1; col < comp.output_nodes.size(); ++col) {
      int node = comp.output_nodes[col];
      int parent = tree.parent[node];
      auto pos = std::find(comp.output_nodes.begin(), comp.output_nodes.end(), parent);
      assert(pos != comp.output_nodes.end());
      comp.output_parent_pos[col] = static_cast<int>(std::distance(comp.output_nodes.begin(), pos));
      comp.output_parent_slot[col] = comp.nodes[node].slot_in_parent;
    }
    for (std::size_t col = 0; col < comp.output_nodes.size(); ++col)
      free_column[comp.nodes[comp.output_nodes[col]].var] = {static_cast<int>(ci),
                                                             static_cast<int>(col)};

    // One maintenance pass per atom: the nodes along the atom's path, this
    // atom's counter slot at each of them, the tuple position feeding each
    // node's constant, and the equal-constant guard for repeated variables.
    for (std::size_t local = 0; local < cq.atoms().size(); ++local) {
      const Atom& atom = cq.atoms()[local];
      AtomId core_id = parts[ci][local];
      int rep = -1;
      for (std::size_t ni = 0; ni < tree.var.size() && rep < 0; ++ni)
        for (AtomId at : tree.atoms_at[ni])
          if (at == local) {
            rep = static_cast<int>(ni);
            break;
          }
      assert(rep >= 0);

      WalkPlan plan;
      plan.component = static_cast<int>(ci);
      plan.atom = core_id;
      plan.path_nodes = tree.path[rep];
      for (int ni : plan.path_nodes) {
        const NodeInfo& node = comp.nodes[ni];
        auto slot = std::find(node.tracked_atoms.begin(), node.tracked_atoms.end(), core_id);
        plan.tracked_slot.push_back(
            static_cast<int>(std::distance(node.tracked_atoms.begin(), slot)));
        auto pos = std::find(atom.vars.begin(), atom.vars.end(), node.var);
        plan.value_pos.push_back(static_cast<int>(std::distance(atom.vars.begin(), pos)));
      }
      for (std::size_t p = 0; p < atom.vars.size(); ++p) {
        auto first = std::find(atom.vars.begin(), atom.vars.begin() + p, atom.vars[p]);
        std::size_t f = static_cast<std::size_t>(std::distance(atom.vars.begin(), first));
        if (f != p) plan.guard.emplace_back(static_cast<int>(f), static_cast<int>(p));
      }
      plans_per_comp[ci].push_back(std::move(plan));
    }

    comps_.push_back(std::move(comp));
  }

  // Register the passes in core atom order so replays are deterministic.
  std::vector<const WalkPlan*> by_atom(core_.atoms().size(), nullptr);
  for (const auto& comp_plans : plans_per_comp)
    for (const WalkPlan& plan : comp_plans) by_atom[plan.atom] = &plan;
  for (AtomId a = 0; a < core_.atoms().size(); ++a)
    plans_[core_.atoms()[a].relation].push_back(*by_atom[a]);

  head_source_.clear();
  for (const auto& v : core_.head()) head_source_.push_back(free_column.at(v));
}

ApplyResult Engine::insert(const std::string& relation, const std::vector<std::string>& tuple) {
  return apply_tokens(UpdateCommand::Kind::Insert, relation, tuple);
}

ApplyResult Engine::erase(const std::string& relation, const std::vector<std::string>& tuple) {
  return apply_tokens(UpdateCommand::Kind::Delete, relation, tuple);
}

ApplyResult Engine::apply(const UpdateCommand& cmd) {
  return apply_tokens(cmd.kind, cmd.relation, cmd.tuple);
}

ApplyResult Engine::apply_tokens(UpdateCommand::Kind kind, const std::string& relation,
                                 const std::vector<std::string>& tuple) {
  auto rel_it = facts_.find(relation);
  if (rel_it == facts_.end()) throw std::invalid_argument("unknown relation: " + relation);
  if (tuple.size() != schema_.arity(relation))
    throw std::invalid_argument("arity mismatch for " + relation);

  const bool inserting = kind == UpdateCommand::Kind::Insert;
  Tuple ids;
  ids.reserve(tuple.size());
  if (inserting) {
    for (const auto& tok : tuple) ids.push_back(interner_.intern(tok));
    if (!rel_it->second.index.insert(ids).second) return {false};
  } else {
    for (const auto& tok : tuple) {
      auto id = interner_.lookup(tok);
      if (!id) return {false};
      ids.push_back(*id);
    }
    if (rel_it->second.index.erase(ids) == 0) return {false};
  }

  ++version_;
  auto plan_it = plans_.find(relation);
  if (plan_it != plans_.end()) {
    for (const WalkPlan& plan : plan_it->second) {
      bool pattern_ok = true;
      for (const auto& [s, t] : plan.guard)
        if (ids[s] != ids[t]) {
          pattern_ok = false;
          break;
        }
      if (pattern_ok) run_walk(plan, ids, inserting);
    }
  }
  return {true};
}

Engine::ListRef Engine::parent_list(Component& comp, const WalkPlan& plan, std::size_t depth,
                                    const std::vector<Item*>& path_items) {
  if (depth == 0)
    return {&comp.start_head, &comp.start_weight_sum, &comp.start_free_sum};
  Item* parent = path_items[depth - 1];
  int slot = comp.nodes[plan.path_nodes[depth]].slot_in_parent;
  Item::ChildList& list = parent->child[slot];
  return {&list.head, &list.weight_sum, &list.free_sum};
}

void Engine::link_front(ListRef list, Item* item) {
  ++steps_;
  item->prev = nullptr;
  item->next = *list.head;
  if (*list.head) (*list.head)->prev = item;
  *list.head = item;
  item->listed = true;
}

void Engine::unlink(ListRef list, Item* item) {
  ++steps_;
  if (item->prev)
    item->prev->next = item->next;
  else
    *list.head = item->next;
  if (item->next) item->next->prev = item->prev;
  item->prev = item->next = nullptr;
  item->listed = false;
}

void Engine::run_walk(const WalkPlan& plan, const Tuple& tuple, bool inserting) {
  Component& comp = comps_[plan.component];
  const std::size_t depth = plan.path_nodes.size();

  // Locate (and on insert, create) the item on every level of the path.
  std::vector<Item*> path_items(depth);
  Tuple key;
  key.reserve(depth);
  for (std::size_t j = 0; j < depth; ++j) {
    key.push_back(tuple[plan.value_pos[j]]);
    NodeInfo& node = comp.nodes[plan.path_nodes[j]];
    ++steps_;
    if (inserting) {
      auto [it, fresh] = node.items.try_emplace(key, nullptr);
      if (fresh) {
        it->second = std::make_unique<Item>();
        it->second->path = key;
        it->second->count.assign(node.tracked_atoms.size(), 0);
        it->second->child.resize(node.children.size());
      }
      path_items[j] = it->second.get();
    } else {
      path_items[j] = node.items.at(key).get();  // deletes target existing expansions
    }
  }

  // Walk bottom-up: adjust the counter, recompute the weights, fix the list
  // membership, and roll the deltas into the parent's registers.
  for (std::size_t j = depth; j-- > 0;) {
    Item* item = path_items[j];
    NodeInfo& node = comp.nodes[plan.path_nodes[j]];

    if (inserting)
      ++item->count[plan.tracked_slot[j]];
    else
      --item->count[plan.tracked_slot[j]];

    const std::uint64_t w_old = item->weight;
    const std::uint64_t fw_old = item->free_weight;
    std::uint64_t w = 1;
    for (int slot : node.represented_slots) w *= item->count[slot];
    for (const auto& list : item->child) w *= list.weight_sum;
    std::uint64_t fw = 0;
    if (node.free && w != 0) {
      fw = 1;
      for (std::size_t c = 0; c < node.children.size(); ++c)
        if (node.child_free[c]) fw *= item->child[c].free_sum;
    }
    item->weight = w;
    item->free_weight = fw;
    ++steps_;

    ListRef list = parent_list(comp, plan, j, path_items);
    if (w > 0 && !item->listed)
      link_front(list, item);
    else if (w == 0 && item->listed)
      unlink(list, item);
    // Unsigned wrap makes the delta arithmetic exact for true sums.
    *list.weight_sum += w - w_old;
    if (node.free) *list.free_sum += fw - fw_old;

    if (!inserting) {
      bool present = false;
      for (std::uint64_t c : item->count)
        if (c) {
          present = true;
          break;
        }
      if (!present) {
        assert(!item->listed);
        ++steps_;
        node.items.erase(Tuple(key.begin(), key.begin() + j + 1));
      }
    }
  }
}

void Engine::load(const Database& db) {
  for (const auto& [rel, arity] : db.schema().relations) {
    (void)arity;
    for (const Tuple& fact : db.facts(rel)) apply_tokens(UpdateCommand::Kind::Insert, rel, db.tokens_of(fact));
  }
}

std::uint64_t Engine::count() const {
  std::uint64_t product = 1;
  for (const Component& comp : comps_) {
    if (comp.has_free)
      product *= comp.start_free_sum;
    else if (comp.start_weight_sum == 0)
      product = 0;
    if (product == 0) return 0;
  }
  return product;
}

bool Engine::answer() const {
  for (const Component& comp : comps_)
    if (comp.start_weight_sum == 0) return false;
  return true;
}

Cursor Engine::open_cursor() { return Cursor(this); }

Inspection Engine::inspect(const std::string& var,
                           const std::vector<std::string>& path_values) const {
  for (const Component& comp : comps_) {
    for (const NodeInfo& node : comp.nodes) {
      if (node.var != var) continue;
      Inspection info;
      Tuple key;
      key.reserve(path_values.size());
      for (const auto& tok : path_values) {
        auto id = interner_.lookup(tok);
        if (!id) return info;  // constant never seen: no such item
        key.push_back(*id);
      }
      auto it = node.items.find(key);
      if (it == node.items.end()) return info;
      info.exists = true;
      info.weight = it->second->weight;
      if (node.free) info.free_weight = it->second->free_weight;
      for (std::size_t s = 0; s < node.tracked_atoms.size(); ++s)
        info.counters[node.tracked_atoms[s]] = it->second->count[s];
      return info;
    }
  }
  throw std::out_of_range("variable not in the maintained core: " + var);
}

StructureSnapshot Engine::snapshot() const {
  StructureSnapshot snap;
  for (const Component& comp : comps_) {
    ComponentSnapshot cs;
    cs.root_weight_sum = comp.start_weight_sum;
    cs.root_free_sum = comp.start_free_sum;
    cs.has_free = comp.has_free;
    for (const Item* it = comp.start_head; it; it = it->next)
      cs.root_list.push_back(interner_.token(it->path.back()));

    // Emit nodes in pre-order of the tree.
    std::vector<int> stack{comp.root};
    while (!stack.empty()) {
      int ni = stack.back();
      stack.pop_back();
      const NodeInfo& node = comp.nodes[ni];
      for (auto it = node.children.rbegin(); it != node.children.rend(); ++it)
        stack.push_back(*it);

      NodeSnapshot ns;
      ns.var = node.var;
      ns.free = node.free;
      for (int child : node.children) ns.children.push_back(comp.nodes[child].var);
      for (const auto& [key, item] : node.items) {
        ItemState s;
        for (ConstId c : key) s.path_values.push_back(interner_.token(c));
        for (std::size_t slot = 0; slot < node.tracked_atoms.size(); ++slot)
          s.counters[node.tracked_atoms[slot]] = item->count[slot];
        s.weight = item->weight;
        if (node.free) s.free_weight = item->free_weight;
        s.listed = item->listed;
        for (const auto& list : item->child) {
          s.child_weight_sums.push_back(list.weight_sum);
          s.child_free_sums.push_back(list.free_sum);
        }
        ns.items.push_back(std::move(s));
      }
      std::sort(ns.items.begin(), ns.items.end(),
                [](const ItemState& a, const ItemState& b) { return a.path_values < b.path_values; });
      cs.nodes.push_back(std::move(ns));
    }
    snap.components.push_back(std::move(cs));
  }
  return snap;
}

Database Engine::current_facts() const {
  Database db(schema_);
  for (const auto& [rel, arity] : schema_.relations) {
    (void)arity;
    std::vector<std::vector<std::string>> rows;
    for (const Tuple& t : facts_.at(rel).index) {
      std::vector<std::string> toks;
      toks.reserve(t.size());
      for (ConstId c : t) toks.push_back(interner_.token(c));
      rows.push_back(std::move(toks));
    }
    std::sort(rows.begin(), rows.end());
    for (const auto& row : rows) db.insert(rel, row);
  }
  return db;
}

Cursor::Cursor(Engine* engine) : engine_(engine), version_(engine->version_) {
  for (const auto& comp : engine_->comps_)
    if (comp.start_weight_sum == 0) {
      done_ = true;  // some component is empty, so the result is empty
      return;
    }
  for (std::size_t ci = 0; ci < engine_->comps_.size(); ++ci) {
    if (!engine_->comps_[ci].has_free) continue;
    ComponentCursor cc;
    cc.component = static_cast<int>(ci);
    prime_component(cc);
    comps_.push_back(std::move(cc));
  }
  if (comps_.empty()) empty_head_pending_ = true;
}

void Cursor::prime_component(ComponentCursor& cc) {
  const Engine::Component& comp = engine_->comps_[cc.component];
  cc.items.assign(comp.output_nodes.size(), nullptr);
  cc.items[0] = comp.start_head;
  ++engine_->steps_;
  for (std::size_t col = 1; col < cc.items.size(); ++col) {
    const detail::Item* parent = cc.items[comp.output_parent_pos[col]];
    cc.items[col] = parent->child[comp.output_parent_slot[col]].head;
    ++engine_->steps_;
    assert(cc.items[col] != nullptr);  // fit parents have fit children
  }
}

bool Cursor::advance_component(ComponentCursor& cc) {
  const Engine::Component& comp = engine_->comps_[cc.component];
  for (std::size_t col = cc.items.size(); col-- > 0;) {
    ++engine_->steps_;
    if (cc.items[col]->next == nullptr) continue;
    cc.items[col] = cc.items[col]->next;
    ++engine_->steps_;
    for (std::size_t later = col + 1; later < cc.items.size(); ++later) {
      const detail::Item* parent = cc.items[comp.output_parent_pos[later]];
      cc.items[later] = parent->child[comp.output_parent_slot[later]].head;
      ++engine_->steps_;
    }
    return true;
  }
  return false;
}

Cursor::Yield Cursor::assemble() {
  Yield y;
  y.status = Status::Tuple;
  y.values.resize(engine_->head_source_.size());
  for (std::size_t pos = 0; pos < engine_->head_source_.size(); ++pos) {
    auto [comp_id, col] = engine_->head_source_[pos];
    const ComponentCursor* cc = nullptr;
    for (const auto& candidate : comps_)
      if (candidate.component == comp_id) {
        cc = &candidate;
        break;
      }
    assert(cc != nullptr);
    ++engine_->steps_;
    y.values[pos] = engine_->interner_.token(cc->items[col]->path.back());
  }
  return y;
}

Cursor::Yield Cursor::next() {
  if (engine_->version_ != version_) return {Status::Stale, {}};
  if (done_) return {Status::End, {}};
  if (empty_head_pending_) {
    if (!primed_) {
      primed_ = true;
      return {Status::Tuple, {}};
    }
    done_ = true;
    return {Status::End, {}};
  }
  if (!primed_) {
    primed_ = true;
    return assemble();
  }
  for (std::size_t ci = comps_.size(); ci-- > 0;) {
    if (advance_component(comps_[ci])) {
      for (std::size_t later = ci + 1; later < comps_.size(); ++later)
        prime_component(comps_[later]);
      return assemble();
    }
  }
  done_ = true;
  return {Status::End, {}};
}

std::vector<std::vector<std::string>> enumerate_all(Engine& engine) {
  std::vector<std::vector<std::string>> out;
  Cursor cursor = engine.open_cursor();
  while (true) {
    Cursor::Yield y = cursor.next();
    if (y.status != Cursor::Status::Tuple) break;
    out.push_back(std::move(y.values));
  }
  return out;
}

}  // namespace dyncq
