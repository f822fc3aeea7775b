#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <optional>
#include <set>

#include "dyncq/engine.hpp"
#include "dyncq/oracle.hpp"
#include "dyncq/workload.hpp"
#include "support/structure_check.hpp"
#include "support/worked_example.hpp"

using namespace dyncq;
using dyncq_test::kWorkedFacts;
using dyncq_test::kWorkedQuery;

namespace {

std::set<std::vector<std::string>> tuple_set(Engine& engine) {
  auto rows = enumerate_all(engine);
  return {rows.begin(), rows.end()};
}

}  // namespace

TEST_CASE("worked example: counts, results and weights through an update cycle") {
  Query q = parse_query(kWorkedQuery);
  Engine engine(q);
  engine.load(parse_database(kWorkedFacts, q.schema()));

  CHECK(engine.count() == 23);
  CHECK(engine.answer());
  CHECK(tuple_set(engine) == dyncq_test::worked_result());

  CHECK(engine.inspect("x", {"a"}).weight == 14);
  CHECK(engine.inspect("x", {"b"}).weight == 9);

  // present but unfit: three R facts and one S fact share the prefix, the
  // matching E fact is missing
  Inspection unfit = engine.inspect("y", {"b", "p"});
  CHECK(unfit.exists);
  CHECK(unfit.weight == 0);
  CHECK(unfit.counters.at(0) == 3);  // R(x,y,z) expansions
  CHECK(unfit.counters.at(1) == 3);  // R(x,y,z2) expansions
  CHECK(unfit.counters.at(2) == 0);  // E(x,y)
  CHECK(unfit.counters.at(4) == 1);  // S(x,y,z)

  CHECK(engine.insert("E", {"b", "p"}).applied);
  CHECK(engine.count() == 38);
  CHECK(engine.inspect("x", {"b"}).weight == 24);

  CHECK(engine.erase("E", {"b", "p"}).applied);
  CHECK(engine.count() == 23);
  CHECK(engine.inspect("x", {"b"}).weight == 9);
  CHECK(tuple_set(engine) == dyncq_test::worked_result());
}

TEST_CASE("worked example: every stored register is exact") {
  Query q = parse_query(kWorkedQuery);
  Engine engine(q);
  engine.load(parse_database(kWorkedFacts, q.schema()));
  CHECK(dyncq_test::structure_errors(engine) == std::vector<std::string>{});

  engine.insert("E", {"b", "p"});
  CHECK(dyncq_test::structure_errors(engine) == std::vector<std::string>{});

  engine.erase("E", {"b", "p"});
  CHECK(dyncq_test::structure_errors(engine) == std::vector<std::string>{});
}

TEST_CASE("tearing down the worked example empties the structure") {
  Query q = parse_query(kWorkedQuery);
  Engine engine(q);
  engine.load(parse_database(kWorkedFacts, q.schema()));
  Database db = parse_database(kWorkedFacts, q.schema());
  for (const auto& [rel, arity] : q.schema().relations) {
    (void)arity;
    for (const Tuple& fact : db.facts(rel)) CHECK(engine.erase(rel, db.tokens_of(fact)).applied);
  }
  CHECK(engine.count() == 0);
  CHECK_FALSE(engine.answer());
  StructureSnapshot snap = engine.snapshot();
  for (const auto& comp : snap.components) {
    CHECK(comp.root_weight_sum == 0);
    for (const auto& node : comp.nodes) CHECK(node.items.empty());
  }
  CHECK(dyncq_test::structure_errors(engine) == std::vector<std::string>{});
}

TEST_CASE("construction rejects queries whose core is not tree-shaped") {
  CHECK_THROWS_AS(Engine(parse_query("Q() :- S(x), E(x,y), T(y).")), CoreNotQHierarchical);
  CHECK_THROWS_AS(Engine(parse_query("Q(x) :- E(x,y), T(y).")), CoreNotQHierarchical);
  try {
    Engine engine(parse_query("Q(x) :- E(x,y), T(y)."));
  } catch (const CoreNotQHierarchical& e) {
    CHECK_FALSE(e.classification().core_q_hierarchical);
    CHECK(e.classification().witness.has_value());
  }
}

TEST_CASE("a reducible query is maintained through its core") {
  // the quantified x,y part folds onto the reflexive z component
  Engine engine(parse_query("Q() :- S(x), E(x,y), T(y), S(z), E(z,z), T(z)."));
  CHECK(engine.core().atoms().size() == 3);
  engine.insert("S", {"a"});
  engine.insert("T", {"a"});
  CHECK_FALSE(engine.answer());
  engine.insert("E", {"a", "a"});
  CHECK(engine.answer());
  CHECK(engine.count() == 1);

  // facts only reachable through dropped atoms do not change the answer
  engine.insert("E", {"a", "b"});
  engine.insert("T", {"b"});
  CHECK(engine.count() == 1);
  CHECK(dyncq_test::structure_errors(engine) == std::vector<std::string>{});
}

TEST_CASE("duplicate inserts and absent deletes are no-ops") {
  Engine engine(parse_query("Q(x) :- E(x,y), S(x)."));
  CHECK(engine.insert("E", {"a", "b"}).applied);
  std::uint64_t version = engine.version();
  CHECK_FALSE(engine.insert("E", {"a", "b"}).applied);
  CHECK_FALSE(engine.erase("E", {"q", "q"}).applied);
  CHECK_FALSE(engine.erase("S", {"a"}).applied);
  CHECK(engine.version() == version);  // no-ops do not invalidate cursors

  engine.insert("S", {"a"});
  CHECK(engine.count() == 1);
  engine.insert("E", {"a", "b"});
  CHECK(engine.count() == 1);
}

TEST_CASE("unknown relations and arity mismatches are rejected") {
  Engine engine(parse_query("Q(x) :- E(x,y)."));
  CHECK_THROWS_AS(engine.insert("W", {"a"}), std::invalid_argument);
  CHECK_THROWS_AS(engine.insert("E", {"a"}), std::invalid_argument);
  CHECK_THROWS_AS(engine.insert("E", {"a", "b", "c"}), std::invalid_argument);
}

TEST_CASE("count and answer multiply and gate across components") {
  Engine engine(parse_query("Q(x, v) :- E(x), R(u, v), W(v)."));
  engine.insert("E", {"a"});
  engine.insert("E", {"b"});
  CHECK(engine.count() == 0);
  CHECK_FALSE(engine.answer());

  engine.insert("R", {"p", "1"});
  CHECK(engine.count() == 0);  // W(1) still missing
  engine.insert("W", {"1"});
  CHECK(engine.count() == 2);
  CHECK(engine.answer());

  engine.insert("R", {"q", "1"});
  CHECK(engine.count() == 2);  // a second witness for v=1 adds no result
  engine.insert("W", {"2"});
  CHECK(engine.count() == 2);  // v=2 has no R row yet
  engine.insert("R", {"q", "2"});
  CHECK(engine.count() == 4);
  CHECK(tuple_set(engine) == std::set<std::vector<std::string>>{
                                 {"a", "1"}, {"a", "2"}, {"b", "1"}, {"b", "2"}});
  CHECK(dyncq_test::structure_errors(engine) == std::vector<std::string>{});

  engine.erase("W", {"1"});
  CHECK(engine.count() == 2);
  CHECK(tuple_set(engine) == std::set<std::vector<std::string>>{{"a", "2"}, {"b", "2"}});
  engine.erase("R", {"q", "2"});
  CHECK(engine.count() == 0);  // v=2 lost its only R witness
  CHECK_FALSE(engine.answer());
  CHECK(dyncq_test::structure_errors(engine) == std::vector<std::string>{});
}

TEST_CASE("boolean component gates enumeration of the free part") {
  Engine engine(parse_query("Q(x) :- E(x), R(u, v)."));
  engine.insert("E", {"a"});
  CHECK(tuple_set(engine).empty());
  engine.insert("R", {"p", "q"});
  CHECK(tuple_set(engine) == std::set<std::vector<std::string>>{{"a"}});
}

TEST_CASE("boolean query enumerates a single empty tuple when true") {
  Engine engine(parse_query("Q() :- E(x, y)."));
  {
    Cursor cursor = engine.open_cursor();
    CHECK(cursor.next().status == Cursor::Status::End);
  }
  engine.insert("E", {"a", "b"});
  Cursor cursor = engine.open_cursor();
  Cursor::Yield first = cursor.next();
  CHECK(first.status == Cursor::Status::Tuple);
  CHECK(first.values.empty());
  CHECK(cursor.next().status == Cursor::Status::End);
  CHECK(cursor.next().status == Cursor::Status::End);
}

TEST_CASE("cursors turn stale on the first applied update") {
  Engine engine(parse_query("Q(x) :- E(x, y)."));
  engine.insert("E", {"a", "b"});
  engine.insert("E", {"c", "d"});

  Cursor cursor = engine.open_cursor();
  CHECK(cursor.next().status == Cursor::Status::Tuple);
  CHECK_FALSE(engine.insert("E", {"a", "b"}).applied);           // no-op keeps it live
  CHECK(cursor.next().status == Cursor::Status::Tuple);
  CHECK(engine.insert("E", {"e", "f"}).applied);
  CHECK(cursor.next().status == Cursor::Status::Stale);
  CHECK(cursor.next().status == Cursor::Status::Stale);  // stays stale

  Cursor fresh = engine.open_cursor();
  engine.erase("E", {"e", "f"});
  CHECK(fresh.next().status == Cursor::Status::Stale);  // stale even before first yield
}

TEST_CASE("enumeration yields each result exactly once in cursor order") {
  Engine engine(parse_query("Q(x, y) :- E(x, y), S(x)."));
  for (const char* x : {"a", "b"})
    for (const char* y : {"1", "2", "3"}) engine.insert("E", {x, y});
  engine.insert("S", {"a"});
  engine.insert("S", {"b"});

  auto rows = enumerate_all(engine);
  CHECK(rows.size() == 6);
  std::set<std::vector<std::string>> dedup(rows.begin(), rows.end());
  CHECK(dedup.size() == 6);
  CHECK(dedup == tuple_set(engine));
  CHECK(engine.count() == 6);
}

TEST_CASE("quantified tail variables collapse into the free weight") {
  Engine engine(parse_query("Q(x) :- E(x, y)."));
  engine.insert("E", {"a", "1"});
  engine.insert("E", {"a", "2"});
  engine.insert("E", {"b", "1"});
  CHECK(engine.count() == 2);  // distinct x values, not fact count
  CHECK(engine.inspect("x", {"a"}).weight == 2);
  CHECK(engine.inspect("x", {"a"}).free_weight == std::optional<std::uint64_t>(1));
  CHECK(tuple_set(engine) == std::set<std::vector<std::string>>{{"a"}, {"b"}});
  CHECK(dyncq_test::structure_errors(engine) == std::vector<std::string>{});
}

TEST_CASE("inspect rejects unknown variables and reports missing items") {
  Engine engine(parse_query("Q(x) :- E(x, y)."));
  CHECK_THROWS_AS(engine.inspect("nope", {"a"}), std::out_of_range);
  CHECK_FALSE(engine.inspect("x", {"a"}).exists);
  engine.insert("E", {"a", "b"});
  CHECK(engine.inspect("x", {"a"}).exists);
  CHECK(engine.inspect("y", {"a", "b"}).exists);
  CHECK_FALSE(engine.inspect("y", {"a", "zzz"}).exists);
}

TEST_CASE("current facts round-trip through load") {
  Query q = parse_query(kWorkedQuery);
  Engine engine(q);
  engine.load(parse_database(kWorkedFacts, q.schema()));
  Database facts = engine.current_facts();
  CHECK(facts.cardinality() == 20);

  Engine replay(q);
  replay.load(facts);
  CHECK(replay.count() == 23);
  CHECK(serialize_database(replay.current_facts()) == serialize_database(facts));
}

TEST_CASE("repeated variables in atoms filter non-diagonal facts") {
  Engine engine(parse_query("Q(x) :- E(x, x), S(x, y)."));
  engine.insert("E", {"a", "b"});  // off-diagonal, must not count
  engine.insert("S", {"a", "1"});
  CHECK(engine.count() == 0);
  engine.insert("E", {"a", "a"});
  CHECK(engine.count() == 1);
  engine.erase("E", {"a", "b"});  // removing the off-diagonal fact changes nothing
  CHECK(engine.count() == 1);
  CHECK(dyncq_test::structure_errors(engine) == std::vector<std::string>{});
}

TEST_CASE("step counter grows with work done, not database size") {
  Engine engine(parse_query("Q(x, y) :- E(x, y), S(x)."));
  std::uint64_t worst = 0;
  for (int i = 0; i < 200; ++i) {
    std::uint64_t before = engine.steps();
    engine.insert("E", {"k" + std::to_string(i % 20), "v" + std::to_string(i)});
    worst = std::max(worst, engine.steps() - before);
  }
  std::uint64_t small_worst = worst;
  for (int i = 0; i < 5000; ++i) {
    std::uint64_t before = engine.steps();
    engine.insert("E", {"K" + std::to_string(i % 500), "V" + std::to_string(i)});
    worst = std::max(worst, engine.steps() - before);
  }
  CHECK(worst == small_worst);  // per-update step cost does not scale with size
}

TEST_CASE("random streams agree with recomputation and keep registers exact") {
  RandomQhParams params;
  params.stream_len = 120;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    GeneratedCase gen = gen_random_qh(mix_seed(99, seed), params);
    CAPTURE(serialize_query(gen.query));
    Engine engine(gen.query);
    Database db(gen.query.schema());
    std::size_t applied = 0;
    for (const StreamCommand& cmd : gen.stream) {
      if (const auto* upd = std::get_if<UpdateCommand>(&cmd)) {
        CHECK(engine.apply(*upd).applied == db.apply(*upd));
        if (++applied % 40 == 0)
          CHECK(dyncq_test::structure_errors(engine) == std::vector<std::string>{});
        continue;
      }
      switch (std::get<Probe>(cmd).kind) {
        case ProbeKind::Count: CHECK(engine.count() == count_naive(gen.query, db)); break;
        case ProbeKind::Answer: CHECK(engine.answer() == answer_naive(gen.query, db)); break;
        case ProbeKind::Enum: CHECK(tuple_set(engine) == eval_naive(gen.query, db)); break;
      }
    }
  }
}
