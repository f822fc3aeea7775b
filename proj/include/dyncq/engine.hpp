#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dyncq/analysis.hpp"
#include "dyncq/database.hpp"
#include "dyncq/query.hpp"

namespace dyncq {

/// Raised by Engine construction when the query's homomorphic core is not
/// q-hierarchical; carries the full classification for diagnostics.
class CoreNotQHierarchical : public std::runtime_error {
 public:
  explicit CoreNotQHierarchical(Classification c);

  const Classification& classification() const { return classification_; }

 private:
  Classification classification_;
};

struct ApplyResult {
  bool applied = false;  // false: duplicate insert or absent delete, a no-op
};

namespace detail {

/// One stored item: the state attached to an assignment of constants to the
/// root path of a tree node.
struct Item {
  Tuple path;                        // constants root..node
  std::vector<std::uint64_t> count;  // per-atom expansion counters
  std::uint64_t weight = 0;          // completions into the node's subtree
  std::uint64_t free_weight = 0;     // distinct free-variable completions

  // Fit (weight > 0) items of each child, as doubly linked lists with
  // running sum registers; aligned with the node's child order.
  struct ChildList {
    Item* head = nullptr;
    std::uint64_t weight_sum = 0;
    std::uint64_t free_sum = 0;
  };
  std::vector<ChildList> child;

  Item* prev = nullptr;
  Item* next = nullptr;
  bool listed = false;
};

}  // namespace detail

/// White-box view of one stored item, for tests and the inspect() hook.
struct ItemState {
  std::vector<std::string> path_values;          // constants on the root path, own value last
  std::map<AtomId, std::uint64_t> counters;      // per-atom expansion counts (core atom ids)
  std::uint64_t weight = 0;
  std::optional<std::uint64_t> free_weight;      // only for free nodes
  bool listed = false;                           // member of its parent's list
  std::vector<std::uint64_t> child_weight_sums;  // register per child, tree child order
  std::vector<std::uint64_t> child_free_sums;    // same, free projections (free children)
};

struct NodeSnapshot {
  std::string var;
  bool free = false;
  std::vector<std::string> children;  // child variables in tree order
  std::vector<ItemState> items;       // sorted by path_values
};

struct ComponentSnapshot {
  std::vector<NodeSnapshot> nodes;     // tree pre-order
  std::uint64_t root_weight_sum = 0;   // sum register of the root list
  std::uint64_t root_free_sum = 0;     // free projection register (free components)
  bool has_free = false;
  std::vector<std::string> root_list;  // root values in list order (fit roots)
};

struct StructureSnapshot {
  std::vector<ComponentSnapshot> components;
};

struct Inspection {
  bool exists = false;
  std::map<AtomId, std::uint64_t> counters;
  std::uint64_t weight = 0;
  std::optional<std::uint64_t> free_weight;
};

class Engine;

/**
 * Enumeration cursor over the current result. Walks the fit-item lists of the
 * free subtree of every component, combining components as a cross product.
 * Any applied update invalidates the cursor.
 */
class Cursor {
 public:
  enum class Status { Tuple, End, Stale };

  struct Yield {
    Status status = Status::End;
    std::vector<std::string> values;  // set when status == Tuple, in head order
  };

  /// Constant work between calls (instrumented on the engine step counter).
  Yield next();

 private:
  friend class Engine;

  struct ComponentCursor {
    int component = 0;
    std::vector<const detail::Item*> items;  // current item per output column
  };

  explicit Cursor(Engine* engine);

  void prime_component(ComponentCursor& cc);
  bool advance_component(ComponentCursor& cc);
  Yield assemble();

  Engine* engine_ = nullptr;
  std::uint64_t version_ = 0;
  bool done_ = false;
  bool primed_ = false;
  bool empty_head_pending_ = false;
  std::vector<ComponentCursor> comps_;
};

/**
 * Incrementally maintained evaluation structure for queries whose homomorphic
 * core is q-hierarchical. A single-tuple insert or delete costs time bounded
 * by the query alone; the result count is read off a register, and results
 * stream with constant delay between tuples.
 */
class Engine {
 public:
  /// Throws CoreNotQHierarchical when the query is inadmissible.
  explicit Engine(const Query& q);

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  const Query& query() const { return query_; }
  const Query& core() const { return core_; }
  const Schema& schema() const { return schema_; }

  /// Replays every fact of the database as an insert, in stored order.
  void load(const Database& db);

  ApplyResult apply(const UpdateCommand& cmd);
  ApplyResult insert(const std::string& relation, const std::vector<std::string>& tuple);
  ApplyResult erase(const std::string& relation, const std::vector<std::string>& tuple);

  /// Number of result tuples; product over components of the root register.
  std::uint64_t count() const;

  /// Whether the result is nonempty; every component's root list must be fit.
  bool answer() const;

  Cursor open_cursor();

  /// Testing hook: the stored state of one item, addressed by its node's
  /// variable and the constants along the root path. Throws std::out_of_range
  /// for a variable not in the core.
  Inspection inspect(const std::string& var, const std::vector<std::string>& path_values) const;

  /// Testing hook: the full stored state, deterministically ordered.
  StructureSnapshot snapshot() const;

  /// A copy of the current facts (all relations of the query's schema).
  Database current_facts() const;

  std::uint64_t version() const { return version_; }

  /// Instrumentation: incremented on every item access and list-link step.
  std::uint64_t steps() const { return steps_; }

 private:
  friend class Cursor;

  using Item = detail::Item;

  struct ListRef {
    Item** head;
    std::uint64_t* weight_sum;
    std::uint64_t* free_sum;
  };

  struct NodeInfo {
    std::string var;
    int parent = -1;
    int slot_in_parent = -1;  // index into the parent's child lists
    bool free = false;
    std::vector<int> children;          // node ids, tree order
    std::vector<bool> child_free;       // aligned with children
    std::vector<AtomId> tracked_atoms;  // core atoms whose variable set covers this node
    std::vector<int> represented_slots;  // tracked slots whose variable set equals the path
    std::unordered_map<Tuple, std::unique_ptr<Item>, TupleHash> items;
  };

  struct Component {
    std::vector<NodeInfo> nodes;  // indexed by tree node id
    int root = 0;
    bool has_free = false;
    Item* start_head = nullptr;
    std::uint64_t start_weight_sum = 0;
    std::uint64_t start_free_sum = 0;
    std::vector<int> output_nodes;        // free nodes, pre-order
    std::vector<int> output_parent_pos;   // per output column > 0: parent's column
    std::vector<int> output_parent_slot;  // per output column > 0: child slot at the parent
  };

  // One maintenance pass per core atom, precomputed at construction.
  struct WalkPlan {
    int component = 0;
    AtomId atom = 0;
    std::vector<int> path_nodes;             // node ids, root first
    std::vector<int> tracked_slot;           // per path node: this atom's counter slot
    std::vector<int> value_pos;              // per path node: tuple position giving its constant
    std::vector<std::pair<int, int>> guard;  // tuple positions that must carry equal constants
  };

  struct StoredRelation {
    std::unordered_set<Tuple, TupleHash> index;
  };

  void build_structure();
  void run_walk(const WalkPlan& plan, const Tuple& tuple, bool inserting);
  ListRef parent_list(Component& comp, const WalkPlan& plan, std::size_t depth,
                      const std::vector<Item*>& path_items);
  void link_front(ListRef list, Item* item);
  void unlink(ListRef list, Item* item);
  ApplyResult apply_tokens(UpdateCommand::Kind kind, const std::string& relation,
                           const std::vector<std::string>& tuple);

  Query query_;
  Query core_;
  Schema schema_;
  Interner interner_;
  std::unordered_map<std::string, StoredRelation> facts_;

  std::vector<Component> comps_;
  std::unordered_map<std::string, std::vector<WalkPlan>> plans_;  // relation -> passes
  // Head position -> (component, output column) for tuple assembly.
  std::vector<std::pair<int, int>> head_source_;

  std::uint64_t version_ = 0;
  mutable std::uint64_t steps_ = 0;
};

/// Drains a fresh cursor; convenience for tests and the CLI.
std::vector<std::vector<std::string>> enumerate_all(Engine& engine);

}  // namespace dyncq
