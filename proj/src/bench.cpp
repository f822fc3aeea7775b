#include "dyncq/bench.hpp"

#include <algorithm>
#include <chrono>
#include <optional>
#include <sstream>

#include "dyncq/engine.hpp"
#include "dyncq/oracle.hpp"

namespace dyncq {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t elapsed_ns(Clock::time_point from, Clock::time_point to) {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(to - from).count());
}

struct Samples {
  std::vector<std::uint64_t> wall;
  std::vector<std::uint64_t> steps;
};

std::uint64_t median_of(std::vector<std::uint64_t> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

PhaseStats stats_of(const Samples& s, bool has_steps) {
  PhaseStats st;
  st.samples = s.wall.size();
  st.wall_ns_median = median_of(s.wall);
  st.wall_ns_max = s.wall.empty() ? 0 : *std::max_element(s.wall.begin(), s.wall.end());
  st.has_steps = has_steps;
  if (has_steps) {
    st.steps_median = median_of(s.steps);
    st.steps_max = s.steps.empty() ? 0 : *std::max_element(s.steps.begin(), s.steps.end());
  }
  return st;
}

void drop_warmup(Samples& s) {
  std::size_t cut = s.wall.size() / 10;
  s.wall.erase(s.wall.begin(), s.wall.begin() + cut);
  if (!s.steps.empty()) s.steps.erase(s.steps.begin(), s.steps.begin() + cut);
}

SizeReport run_engine_once(const Query& q, std::size_t size, const Stream& stream) {
  SizeReport rep;
  rep.size = size;

  auto t0 = Clock::now();
  std::optional<Engine> engine;
  engine.emplace(q);
  rep.preprocess_ns = elapsed_ns(t0, Clock::now());

  Samples update, count, answer, delay;
  for (const StreamCommand& cmd : stream) {
    if (const auto* upd = std::get_if<UpdateCommand>(&cmd)) {
      std::uint64_t s0 = engine->steps();
      auto w0 = Clock::now();
      engine->apply(*upd);
      update.wall.push_back(elapsed_ns(w0, Clock::now()));
      update.steps.push_back(engine->steps() - s0);
      continue;
    }
    switch (std::get<Probe>(cmd).kind) {
      case ProbeKind::Count: {
        std::uint64_t s0 = engine->steps();
        auto w0 = Clock::now();
        volatile std::uint64_t sink = engine->count();
        (void)sink;
        count.wall.push_back(elapsed_ns(w0, Clock::now()));
        count.steps.push_back(engine->steps() - s0);
        break;
      }
      case ProbeKind::Answer: {
        std::uint64_t s0 = engine->steps();
        auto w0 = Clock::now();
        volatile bool sink = engine->answer();
        (void)sink;
        answer.wall.push_back(elapsed_ns(w0, Clock::now()));
        answer.steps.push_back(engine->steps() - s0);
        break;
      }
      case ProbeKind::Enum: {
        // Delay = gap between consecutive yields, including the first yield
        // after opening and the final end-of-results step.
        Cursor cur = engine->open_cursor();
        std::uint64_t s0 = engine->steps();
        auto w0 = Clock::now();
        for (;;) {
          Cursor::Yield y = cur.next();
          auto w1 = Clock::now();
          std::uint64_t s1 = engine->steps();
          delay.wall.push_back(elapsed_ns(w0, w1));
          delay.steps.push_back(s1 - s0);
          w0 = w1;
          s0 = s1;
          if (y.status != Cursor::Status::Tuple) break;
        }
        break;
      }
    }
  }

  Database facts = engine->current_facts();
  rep.adom = facts.active_domain().size();
  rep.cardinality = facts.cardinality();

  drop_warmup(update);
  rep.update = stats_of(update, true);
  rep.count = stats_of(count, true);
  rep.answer = stats_of(answer, true);
  rep.enum_delay = stats_of(delay, true);
  return rep;
}

SizeReport run_oracle_once(const Query& q, std::size_t size, const Stream& stream) {
  SizeReport rep;
  rep.size = size;

  auto t0 = Clock::now();
  Database db(q.schema());
  rep.preprocess_ns = elapsed_ns(t0, Clock::now());

  Samples update, count, answer, delay;
  for (const StreamCommand& cmd : stream) {
    if (const auto* upd = std::get_if<UpdateCommand>(&cmd)) {
      auto w0 = Clock::now();
      db.apply(*upd);
      update.wall.push_back(elapsed_ns(w0, Clock::now()));
      continue;
    }
    switch (std::get<Probe>(cmd).kind) {
      case ProbeKind::Count: {
        auto w0 = Clock::now();
        volatile std::uint64_t sink = count_naive(q, db);
        (void)sink;
        count.wall.push_back(elapsed_ns(w0, Clock::now()));
        break;
      }
      case ProbeKind::Answer: {
        auto w0 = Clock::now();
        volatile bool sink = answer_naive(q, db);
        (void)sink;
        answer.wall.push_back(elapsed_ns(w0, Clock::now()));
        break;
      }
      case ProbeKind::Enum: {
        // Recomputation has no incremental yields; charge the whole
        // evaluation as a single delay sample.
        auto w0 = Clock::now();
        TupleSet out = eval_naive(q, db);
        (void)out;
        delay.wall.push_back(elapsed_ns(w0, Clock::now()));
        break;
      }
    }
  }

  rep.adom = db.active_domain().size();
  rep.cardinality = db.cardinality();

  drop_warmup(update);
  rep.update = stats_of(update, false);
  rep.count = stats_of(count, false);
  rep.answer = stats_of(answer, false);
  rep.enum_delay = stats_of(delay, false);
  return rep;
}

void csv_phase(std::ostringstream& out, const std::string& prefix, const char* phase,
               std::size_t size, const PhaseStats& st) {
  out << prefix << phase << ',' << size << ",samples," << st.samples << '\n';
  out << prefix << phase << ',' << size << ",wall_ns_median," << st.wall_ns_median << '\n';
  out << prefix << phase << ',' << size << ",wall_ns_max," << st.wall_ns_max << '\n';
  if (st.has_steps) {
    out << prefix << phase << ',' << size << ",steps_median," << st.steps_median << '\n';
    out << prefix << phase << ',' << size << ",steps_max," << st.steps_max << '\n';
  }
}

}  // namespace

BenchReport run_bench(const Query& q, const std::vector<std::pair<std::size_t, Stream>>& workloads,
                      BenchMode mode) {
  BenchReport report;
  report.mode = mode;
  for (const auto& [size, stream] : workloads)
    report.sizes.push_back(mode == BenchMode::Engine ? run_engine_once(q, size, stream)
                                                     : run_oracle_once(q, size, stream));
  return report;
}

std::string to_csv(const BenchReport& report, const std::string& phase_prefix,
                   bool with_header) {
  std::ostringstream out;
  if (with_header) out << "phase,size,metric,value\n";
  for (const SizeReport& rep : report.sizes) {
    out << phase_prefix << "preprocess," << rep.size << ",wall_ns," << rep.preprocess_ns << '\n';
    out << phase_prefix << "database," << rep.size << ",active_domain," << rep.adom << '\n';
    out << phase_prefix << "database," << rep.size << ",cardinality," << rep.cardinality << '\n';
    csv_phase(out, phase_prefix, "update", rep.size, rep.update);
    csv_phase(out, phase_prefix, "count", rep.size, rep.count);
    csv_phase(out, phase_prefix, "answer", rep.size, rep.answer);
    csv_phase(out, phase_prefix, "enum_delay", rep.size, rep.enum_delay);
  }
  return out.str();
}

}  // namespace dyncq
