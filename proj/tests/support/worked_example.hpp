#pragma once

#include <set>
#include <string>
#include <vector>

namespace dyncq_test {

// Shared golden fixture: a five-variable query with a self-join, a base
// database of 20 facts, and the full result it produces. The fixture also
// lives in tests/data/ (worked.cq, worked_base.db) for the command-line tests.
inline const char* kWorkedQuery =
    "Q(x, y, z, y2, z2) :- R(x, y, z), R(x, y, z2), E(x, y), E(x, y2), S(x, y, z).";

inline const char* kWorkedFacts =
    "R a e a\nR a e b\nR a e c\nR a f c\n"
    "R b g a\nR b g b\nR b g c\nR b p a\nR b p b\nR b p c\n"
    "E a e\nE a f\nE b d\nE b g\nE b h\n"
    "S a e a\nS a e b\nS a f c\nS b g b\nS b p a\n";

// All 23 result tuples of the base state, in head order (x, y, z, y2, z2).
inline const std::set<std::vector<std::string>>& worked_result() {
  static const std::set<std::vector<std::string>> rows = {
      {"a", "e", "a", "e", "a"}, {"a", "e", "a", "f", "a"}, {"a", "e", "a", "e", "b"},
      {"a", "e", "a", "f", "b"}, {"a", "e", "a", "e", "c"}, {"a", "e", "a", "f", "c"},
      {"a", "e", "b", "e", "a"}, {"a", "e", "b", "f", "a"}, {"a", "e", "b", "e", "b"},
      {"a", "e", "b", "f", "b"}, {"a", "e", "b", "e", "c"}, {"a", "e", "b", "f", "c"},
      {"a", "f", "c", "e", "c"}, {"a", "f", "c", "f", "c"}, {"b", "g", "b", "d", "a"},
      {"b", "g", "b", "g", "a"}, {"b", "g", "b", "h", "a"}, {"b", "g", "b", "d", "b"},
      {"b", "g", "b", "g", "b"}, {"b", "g", "b", "h", "b"}, {"b", "g", "b", "d", "c"},
      {"b", "g", "b", "g", "c"}, {"b", "g", "b", "h", "c"}};
  return rows;
}

}  // namespace dyncq_test
