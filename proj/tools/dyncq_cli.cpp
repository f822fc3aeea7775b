#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dyncq/analysis.hpp"
#include "dyncq/bench.hpp"
#include "dyncq/engine.hpp"
#include "dyncq/oracle.hpp"
#include "dyncq/workload.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitMismatch = 1;    // differential check failed
constexpr int kExitBadInput = 2;    // unreadable / unparsable input
constexpr int kExitInadmissible = 3;  // query outside the maintainable class

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void print_tuples(std::ostream& out, const std::vector<std::vector<std::string>>& tuples) {
  for (const auto& tuple : tuples) {
    for (std::size_t i = 0; i < tuple.size(); ++i) {
      if (i) out << ' ';
      out << tuple[i];
    }
    out << '\n';
  }
  out << "#\n";
}

std::vector<std::vector<std::string>> sorted(dyncq::TupleSet set) {
  return {set.begin(), set.end()};
}

std::vector<std::vector<std::string>> sorted_enumeration(dyncq::Engine& engine) {
  std::vector<std::vector<std::string>> out = dyncq::enumerate_all(engine);
  std::sort(out.begin(), out.end());
  return out;
}

std::string tuples_text(const std::vector<std::vector<std::string>>& tuples) {
  std::ostringstream out;
  print_tuples(out, tuples);
  return out.str();
}

int cmd_classify(const std::string& query_path) {
  dyncq::Query q = dyncq::parse_query(slurp(query_path));
  dyncq::Classification c = dyncq::classify(q);

  std::cout << "query: " << dyncq::serialize_query(q) << '\n';
  std::cout << "q-hierarchical: " << (c.q_hierarchical ? "yes" : "no") << '\n';
  if (!c.q_hierarchical && c.witness) {
    std::cout << "  violated by variables '" << c.witness->var_a << "' and '" << c.witness->var_b
              << "' (condition " << c.witness->condition << ")\n";
  }
  std::cout << "core: " << dyncq::serialize_query(c.core) << '\n';
  std::cout << "core q-hierarchical: " << (c.core_q_hierarchical ? "yes" : "no") << '\n';
  std::cout << "self-join-free: " << (dyncq::self_join_free(q) ? "yes" : "no") << '\n';
  std::cout << "verdicts boolean=" << dyncq::to_string(c.boolean_verdict)
            << " counting=" << dyncq::to_string(c.counting_verdict)
            << " enumeration=" << dyncq::to_string(c.enumeration_verdict) << '\n';
  return kExitOk;
}

int cmd_run(const std::string& query_path, const std::string& stream_path,
            const std::string& snapshot_path, bool use_oracle, bool verify) {
  dyncq::Query q = dyncq::parse_query(slurp(query_path));
  dyncq::Stream stream = dyncq::parse_stream(slurp(stream_path));

  std::optional<dyncq::Engine> engine;
  std::optional<dyncq::Database> db;  // oracle state (also used by --verify)
  if (!use_oracle) engine.emplace(q);
  if (use_oracle || verify) db.emplace(q.schema());
  if (!snapshot_path.empty()) {
    dyncq::Database snap = dyncq::parse_database(slurp(snapshot_path), q.schema());
    if (engine) engine->load(snap);
    if (db)
      for (const auto& [rel, arity] : q.schema().relations) {
        (void)arity;
        for (const dyncq::Tuple& row : snap.facts(rel)) db->insert(rel, snap.tokens_of(row));
      }
  }

  std::size_t probe_no = 0;
  for (const dyncq::StreamCommand& cmd : stream) {
    if (const auto* upd = std::get_if<dyncq::UpdateCommand>(&cmd)) {
      if (engine) engine->apply(*upd);
      if (db) db->apply(*upd);
      continue;
    }
    ++probe_no;
    switch (std::get<dyncq::Probe>(cmd).kind) {
      case dyncq::ProbeKind::Count: {
        std::uint64_t got = engine ? engine->count() : dyncq::count_naive(q, *db);
        std::cout << got << '\n';
        if (verify) {
          std::uint64_t want = dyncq::count_naive(q, *db);
          if (got != want) {
            std::cerr << "probe " << probe_no << " (count): engine " << got << ", oracle " << want
                      << '\n';
            return kExitMismatch;
          }
        }
        break;
      }
      case dyncq::ProbeKind::Answer: {
        bool got = engine ? engine->answer() : dyncq::answer_naive(q, *db);
        std::cout << (got ? "yes" : "no") << '\n';
        if (verify) {
          bool want = dyncq::answer_naive(q, *db);
          if (got != want) {
            std::cerr << "probe " << probe_no << " (answer): engine " << (got ? "yes" : "no")
                      << ", oracle " << (want ? "yes" : "no") << '\n';
            return kExitMismatch;
          }
        }
        break;
      }
      case dyncq::ProbeKind::Enum: {
        std::vector<std::vector<std::string>> got =
            engine ? sorted_enumeration(*engine) : sorted(dyncq::eval_naive(q, *db));
        print_tuples(std::cout, got);
        if (verify) {
          std::vector<std::vector<std::string>> want = sorted(dyncq::eval_naive(q, *db));
          if (got != want) {
            std::cerr << "probe " << probe_no << " (enum): engine returned " << got.size()
                      << " tuples, oracle " << want.size() << ":\nengine:\n"
                      << tuples_text(got) << "oracle:\n"
                      << tuples_text(want);
            return kExitMismatch;
          }
        }
        break;
      }
    }
  }
  return kExitOk;
}

int cmd_bench(const std::string& query_path, const std::vector<std::size_t>& sizes,
              std::uint64_t seed, bool baseline) {
  dyncq::Query q = dyncq::parse_query(slurp(query_path));
  std::vector<std::pair<std::size_t, dyncq::Stream>> workloads;
  for (std::size_t size : sizes)
    workloads.emplace_back(size, dyncq::gen_scaled_stream(q, size, seed));

  dyncq::BenchReport engine_report = dyncq::run_bench(q, workloads, dyncq::BenchMode::Engine);
  std::cout << dyncq::to_csv(engine_report);
  if (baseline) {
    dyncq::BenchReport oracle_report =
        dyncq::run_bench(q, workloads, dyncq::BenchMode::OracleRecompute);
    std::cout << dyncq::to_csv(oracle_report, "baseline_", false);
  }
  return kExitOk;
}

int cmd_fuzz(std::size_t runs, std::uint64_t seed, std::size_t max_vars) {
  dyncq::RandomQhParams params;
  params.max_vars = max_vars;
  std::uint64_t probes_checked = 0;
  for (std::size_t run = 0; run < runs; ++run) {
    std::uint64_t case_seed = dyncq::mix_seed(seed, run);
    dyncq::GeneratedCase gen = dyncq::gen_random_qh(case_seed, params);
    dyncq::Engine engine(gen.query);
    dyncq::Database db(gen.query.schema());

    std::size_t probe_no = 0;
    for (const dyncq::StreamCommand& cmd : gen.stream) {
      if (const auto* upd = std::get_if<dyncq::UpdateCommand>(&cmd)) {
        bool a = engine.apply(*upd).applied;
        bool b = db.apply(*upd);
        if (a != b) {
          std::cout << "counterexample at run " << run << " (seed " << case_seed
                    << "): update applied=" << a << " but oracle applied=" << b << '\n'
                    << "query: " << dyncq::serialize_query(gen.query) << '\n'
                    << "stream:\n"
                    << dyncq::serialize_stream(gen.stream);
          return kExitMismatch;
        }
        continue;
      }
      ++probe_no;
      ++probes_checked;
      std::string mismatch;
      switch (std::get<dyncq::Probe>(cmd).kind) {
        case dyncq::ProbeKind::Count: {
          std::uint64_t got = engine.count(), want = dyncq::count_naive(gen.query, db);
          if (got != want)
            mismatch = "count: engine " + std::to_string(got) + ", oracle " + std::to_string(want);
          break;
        }
        case dyncq::ProbeKind::Answer: {
          bool got = engine.answer(), want = dyncq::answer_naive(gen.query, db);
          if (got != want)
            mismatch = std::string("answer: engine ") + (got ? "yes" : "no") + ", oracle " +
                       (want ? "yes" : "no");
          break;
        }
        case dyncq::ProbeKind::Enum: {
          auto got = sorted_enumeration(engine);
          auto want = sorted(dyncq::eval_naive(gen.query, db));
          if (got != want)
            mismatch = "enum:\nengine:\n" + tuples_text(got) + "oracle:\n" + tuples_text(want);
          break;
        }
      }
      if (!mismatch.empty()) {
        std::cout << "counterexample at run " << run << " (seed " << case_seed << "), probe "
                  << probe_no << ", " << mismatch << '\n'
                  << "query: " << dyncq::serialize_query(gen.query) << '\n'
                  << "stream:\n"
                  << dyncq::serialize_stream(gen.stream);
        return kExitMismatch;
      }
    }
  }
  std::cout << "fuzz: " << runs << " runs, " << probes_checked << " probes, all agreed\n";
  return kExitOk;
}

int cmd_demo() {
  const dyncq::Query q = dyncq::parse_query(
      "Q(x, y, z, y2, z2) :- R(x, y, z), R(x, y, z2), E(x, y), E(x, y2), S(x, y, z).");
  const char* facts =
      "R a e a\nR a e b\nR a e c\nR a f c\n"
      "R b g a\nR b g b\nR b g c\nR b p a\nR b p b\nR b p c\n"
      "E a e\nE a f\nE b d\nE b g\nE b h\n"
      "S a e a\nS a e b\nS a f c\nS b g b\nS b p a\n";

  dyncq::Engine engine(q);
  engine.load(dyncq::parse_database(facts, q.schema()));
  std::cout << "maintaining " << dyncq::serialize_query(q) << '\n';
  std::cout << "count " << engine.count() << '\n';
  std::cout << "insert E(b, p)\n";
  engine.insert("E", {"b", "p"});
  std::cout << "count " << engine.count() << '\n';
  std::cout << "delete E(b, p)\n";
  engine.erase("E", {"b", "p"});
  std::cout << "count " << engine.count() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"incremental conjunctive-query evaluation under single-tuple updates"};
  app.require_subcommand(1);

  std::string query_path, stream_path, snapshot_path;
  bool use_oracle = false, verify = false, baseline = false;
  std::vector<std::size_t> sizes{100, 1000};
  std::uint64_t seed = 7;
  std::size_t runs = 100, max_vars = 6;

  CLI::App* classify = app.add_subcommand("classify", "analyze a query file");
  classify->add_option("query", query_path, "query file")->required();

  CLI::App* run = app.add_subcommand("run", "replay an update stream, printing probe results");
  run->add_option("query", query_path, "query file")->required();
  run->add_option("stream", stream_path, "update/probe stream file")->required();
  run->add_option("--snapshot", snapshot_path, "facts file loaded before the stream");
  run->add_flag("--oracle", use_oracle, "answer probes by recomputation instead");
  run->add_flag("--verify", verify, "answer with the engine and cross-check by recomputation");
  run->get_option("--oracle")->excludes(run->get_option("--verify"));

  CLI::App* bench = app.add_subcommand("bench", "measure update/probe cost on scaled workloads");
  bench->add_option("query", query_path, "query file")->required();
  bench->add_option("--sizes", sizes, "workload scales")->delimiter(',');
  bench->add_option("--seed", seed, "workload seed");
  bench->add_flag("--baseline", baseline, "also measure full recomputation");

  CLI::App* fuzz = app.add_subcommand("fuzz", "differential-test random queries and streams");
  fuzz->add_option("--runs", runs, "number of generated cases");
  fuzz->add_option("--seed", seed, "base seed");
  fuzz->add_option("--max-vars", max_vars, "variable budget per case");

  CLI::App* demo = app.add_subcommand("demo", "maintain a worked example with live counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitBadInput;
  }

  try {
    if (classify->parsed()) return cmd_classify(query_path);
    if (run->parsed()) return cmd_run(query_path, stream_path, snapshot_path, use_oracle, verify);
    if (bench->parsed()) return cmd_bench(query_path, sizes, seed, baseline);
    if (fuzz->parsed()) return cmd_fuzz(runs, seed, max_vars);
    if (demo->parsed()) return cmd_demo();
  } catch (const dyncq::CoreNotQHierarchical& e) {
    std::cerr << "inadmissible query: " << e.what() << '\n';
    return kExitInadmissible;
  } catch (const dyncq::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInput;
  }
  return kExitOk;
}
