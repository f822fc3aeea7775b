#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "dyncq/database.hpp"
#include "dyncq/query.hpp"

namespace dyncq {

enum class ProbeKind { Count, Answer, Enum };

struct Probe {
  ProbeKind kind = ProbeKind::Count;

  bool operator==(const Probe& other) const { return kind == other.kind; }
};

using StreamCommand = std::variant<UpdateCommand, Probe>;

using Stream = std::vector<StreamCommand>;

/// Parses the update-stream format: "+ R c1 ... cr", "- R c1 ... cr",
/// "? count" / "? answer" / "? enum"; "%" comments. Throws ParseError.
Stream parse_stream(const std::string& text);

/// Renders a stream back to the text format; parse(serialize(s)) == s.
std::string serialize_stream(const Stream& s);

/// The expected answer of one probe, aligned with the probe's kind.
struct ExpectedAnswer {
  ProbeKind kind = ProbeKind::Count;
  std::uint64_t count = 0;
  bool answer = false;
  std::vector<std::vector<std::string>> tuples;  // sorted
};

/// Renders expected answers in the sidecar format the `run` subcommand
/// prints: an integer per count probe, yes/no per answer probe, and a sorted
/// tuple block terminated by "#" per enumeration probe.
std::string serialize_answers(const std::vector<ExpectedAnswer>& answers);

/// A stream paired with ground-truth probe answers.
struct GeneratedWorkload {
  Query query;
  Stream stream;
  std::vector<ExpectedAnswer> expected;  // one per probe, in stream order
};

/**
 * Matrix-vector workload: a Boolean n x n bit matrix with n rounds of vector
 * pairs. Encoded against a query with variables x, y and designated atoms
 * containing {x}, {x,y} and {y}: facts a_i feed the x-side atom while u[i]=1,
 * b_j the y-side while v[j]=1, (a_i, b_j) the joint atom while m[i][j]=1, and
 * every other atom is filled for all i, j. Each round rewrites the vector
 * encodings and asks one answer probe, whose truth is u^T M v over AND/OR.
 */
struct OuMvInstance {
  std::size_t n = 0;
  std::vector<std::vector<bool>> m;                            // n x n
  std::vector<std::pair<std::vector<bool>, std::vector<bool>>> rounds;  // (u, v) per round
};

OuMvInstance random_oumv(std::size_t n, std::uint64_t seed);

/// Builds the update stream for the instance. The query defaults to
/// "Q() :- S(x), E(x,y), T(y)." when omitted. Expected answers are computed
/// directly from the instance bits.
GeneratedWorkload gen_oumv(const OuMvInstance& inst);
GeneratedWorkload gen_oumv(const Query& q, const OuMvInstance& inst);

/**
 * Vector-set workload against "Q(x) :- E(x,y), T(y).": E holds the bit
 * positions of n d-bit vectors, and each round points T at one probe vector
 * and asks a count probe. The count stays below n exactly when some stored
 * vector is orthogonal to the probe.
 */
struct OVInstance {
  std::size_t n = 0;  // stored vectors
  std::size_t d = 0;  // bit width
  std::vector<std::vector<bool>> u;  // n vectors
  std::vector<std::vector<bool>> v;  // probe vectors
};

OVInstance random_ov(std::size_t n, std::size_t d, std::uint64_t seed);

GeneratedWorkload gen_ov(const OVInstance& inst);

struct RandomQhParams {
  std::size_t max_vars = 6;
  std::size_t max_atoms = 5;
  std::size_t max_arity = 4;
  std::size_t domain_size = 20;
  std::size_t stream_len = 500;
  std::size_t max_probe_gap = 10;   // a probe is forced after this many commands
  double probe_rate = 0.15;         // chance of a probe per stream slot
  double insert_bias = 0.7;         // chance an update is an insert
  double second_component_rate = 0.25;
};

/// Seeded generator of a random q-hierarchical query (atoms follow root paths
/// of a random tree whose free variables form a prefix) plus a random update
/// stream with interleaved probes. Deterministic per (seed, params). Deletes
/// only target currently present facts.
struct GeneratedCase {
  Query query;
  Stream stream;
};

GeneratedCase gen_random_qh(std::uint64_t seed, const RandomQhParams& params = {});

/// Scaled benchmark stream for an arbitrary query: a fixed structural prefix
/// (so worst-case update and enumeration shapes appear at every size),
/// followed by random updates over a domain of the given size with periodic
/// probes. Deterministic per (query, domain_size, seed).
Stream gen_scaled_stream(const Query& q, std::size_t domain_size, std::uint64_t seed);

/// Deterministic 64-bit mixer used to derive per-run seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace dyncq
