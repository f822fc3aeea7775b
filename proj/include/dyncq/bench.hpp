#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dyncq/query.hpp"
#include "dyncq/workload.hpp"

namespace dyncq {

enum class BenchMode { Engine, OracleRecompute };

/// Latency / step-count distribution of one measurement phase.
struct PhaseStats {
  std::size_t samples = 0;
  std::uint64_t wall_ns_median = 0;
  std::uint64_t wall_ns_max = 0;
  // Step metrics are engine-only (instrumented structural operations).
  bool has_steps = false;
  std::uint64_t steps_median = 0;
  std::uint64_t steps_max = 0;
};

struct SizeReport {
  std::size_t size = 0;       // workload scale label
  std::size_t adom = 0;       // active-domain size at end of replay
  std::size_t cardinality = 0;  // stored facts at end of replay
  std::uint64_t preprocess_ns = 0;
  PhaseStats update;      // per-apply latency (first 10% excluded as warm-up)
  PhaseStats count;       // count-probe latency
  PhaseStats answer;      // answer-probe latency
  PhaseStats enum_delay;  // gap between consecutive enumeration yields
};

struct BenchReport {
  BenchMode mode = BenchMode::Engine;
  std::vector<SizeReport> sizes;
};

/// Replays each (size, stream) pair and measures update latency and probe
/// latency; in Engine mode also the instrumented step counts. Streams start
/// from an empty database. Throws CoreNotQHierarchical in Engine mode for
/// inadmissible queries.
BenchReport run_bench(const Query& q, const std::vector<std::pair<std::size_t, Stream>>& workloads,
                      BenchMode mode);

/// CSV rows "phase,size,metric,value". The prefix is prepended to every
/// phase label (used to merge baseline rows into one table).
std::string to_csv(const BenchReport& report, const std::string& phase_prefix = "",
                   bool with_header = true);

}  // namespace dyncq
