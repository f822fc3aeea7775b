#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "dyncq/database.hpp"
#include "dyncq/query.hpp"

namespace dyncq {

using TupleSet = std::set<std::vector<std::string>>;

/// Reference evaluator: backtracks over the atoms in query order with early
/// pruning and returns the set of head tuples (as constant tokens). Intended
/// as the trusted-but-slow baseline, recomputed from scratch on every call.
TupleSet eval_naive(const Query& q, const Database& db);

/// |eval_naive(q, db)|, computed per connected component (the component
/// counts multiply), so large cross products are never materialized.
std::uint64_t count_naive(const Query& q, const Database& db);

/// Whether the query has any answer; per component, all must be satisfiable.
bool answer_naive(const Query& q, const Database& db);

}  // namespace dyncq
