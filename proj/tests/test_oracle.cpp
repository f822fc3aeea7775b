#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dyncq/oracle.hpp"

using namespace dyncq;

namespace {

Database db_of(const Query& q, const std::string& text) {
  return parse_database(text, q.schema());
}

}  // namespace

TEST_CASE("single-atom projection") {
  Query q = parse_query("Q(x) :- E(x,y).");
  Database db = db_of(q, "E a b\nE a c\nE b a\n");
  CHECK(eval_naive(q, db) == TupleSet{{"a"}, {"b"}});
  CHECK(count_naive(q, db) == 2);
  CHECK(answer_naive(q, db));
}

TEST_CASE("join with repeated variable") {
  Query q = parse_query("Q(x) :- E(x,x).");
  Database db = db_of(q, "E a a\nE a b\nE c c\n");
  CHECK(eval_naive(q, db) == TupleSet{{"a"}, {"c"}});
}

TEST_CASE("two-atom join respects shared variables") {
  Query q = parse_query("Q(x,y) :- E(x,y), T(y).");
  Database db = db_of(q, "E a b\nE a c\nE b b\nT b\n");
  CHECK(eval_naive(q, db) == TupleSet{{"a", "b"}, {"b", "b"}});
  CHECK(count_naive(q, db) == 2);
}

TEST_CASE("empty relation yields empty result") {
  Query q = parse_query("Q(x) :- E(x,y), T(y).");
  Database db = db_of(q, "E a b\n");
  CHECK(eval_naive(q, db).empty());
  CHECK(count_naive(q, db) == 0);
  CHECK_FALSE(answer_naive(q, db));
}

TEST_CASE("boolean query yields one empty tuple when satisfiable") {
  Query q = parse_query("Q() :- E(x,y).");
  Database db = db_of(q, "E a b\n");
  CHECK(eval_naive(q, db) == TupleSet{{}});
  CHECK(count_naive(q, db) == 1);
  CHECK(answer_naive(q, db));
  CHECK(eval_naive(q, db_of(q, "")).empty());
}

TEST_CASE("count multiplies over disconnected components") {
  Query q = parse_query("Q(x, u) :- E(x), R(u).");
  Database db = db_of(q, "E a\nE b\nE c\nR p\nR q\n");
  CHECK(count_naive(q, db) == 6);
  CHECK(eval_naive(q, db).size() == 6);
}

TEST_CASE("boolean component gates a free component") {
  Query q = parse_query("Q(x) :- E(x), R(u,v).");
  Database with = db_of(q, "E a\nE b\nR p q\n");
  CHECK(count_naive(q, with) == 2);
  CHECK(eval_naive(q, with) == TupleSet{{"a"}, {"b"}});

  Database without = db_of(q, "E a\nE b\n");
  CHECK(count_naive(q, without) == 0);
  CHECK(eval_naive(q, without).empty());
  CHECK_FALSE(answer_naive(q, without));
}

TEST_CASE("quantified variables are projected away") {
  Query q = parse_query("Q(x) :- E(x,y), T(y).");
  Database db = db_of(q, "E a b\nE a c\nT b\nT c\n");
  CHECK(eval_naive(q, db) == TupleSet{{"a"}});
  CHECK(count_naive(q, db) == 1);
}

TEST_CASE("head order controls tuple layout") {
  Query q = parse_query("Q(y, x) :- E(x,y).");
  Database db = db_of(q, "E a b\n");
  CHECK(eval_naive(q, db) == TupleSet{{"b", "a"}});
}

TEST_CASE("database updates flow through evaluation") {
  Query q = parse_query("Q(x) :- E(x,y).");
  Database db = db_of(q, "E a b\n");
  CHECK(db.apply({UpdateCommand::Kind::Insert, "E", {"c", "d"}}));
  CHECK_FALSE(db.apply({UpdateCommand::Kind::Insert, "E", {"c", "d"}}));  // duplicate
  CHECK(eval_naive(q, db) == TupleSet{{"a"}, {"c"}});
  CHECK(db.apply({UpdateCommand::Kind::Delete, "E", {"a", "b"}}));
  CHECK_FALSE(db.apply({UpdateCommand::Kind::Delete, "E", {"a", "b"}}));  // absent
  CHECK(eval_naive(q, db) == TupleSet{{"c"}});
}
