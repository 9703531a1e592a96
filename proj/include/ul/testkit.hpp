// Type-directed random program generation and the metatheory property
// drivers built on it.
//
// Linear terms are generated with consume-set threading: the generator owns
// the set of variables and locations the term under construction still must
// consume, splits it across subterm positions, and discharges every element
// by construction. Rejection sampling cannot work here (almost no random
// term is linearly well typed), so soundness is by construction and then
// re-asserted with the real checkers on every sample.
//
// Every driver is deterministic in its seed; reports record the seed and
// reruns reproduce bit-identically.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ul/ast.hpp"
#include "ul/eval.hpp"

namespace ul {

// Generators raise Error(Errc::Uninhabited) when the requested type has no
// inhabitant reachable within the budget (a bare type variable with no
// context witness, a mu with no base case).

// A well-typed U term at tau. Boundary moves are included, so results range
// over the whole mixed language when tau permits.
UEx gen_u_term(const MixedContext& ctx, const UTy& tau, int budget,
               std::uint64_t seed);

// A well-typed configuration at t: a store (possibly with dead, full, and
// nested cells) plus a term consuming exactly its domain.
Configuration gen_l_config(const MixedContext& ctx, const LTy& t, int budget,
                           std::uint64_t seed);

struct PropertyReport {
  std::string property;
  long samples = 0;
  long failures = 0;
  long skipped = 0; // uninhabited generation attempts
  std::uint64_t seed = 0;
  long runtime_ms = 0;
  std::vector<std::string> notes;        // one line per counterexample
  std::map<std::string, long> counters;  // rule-coverage and event counts
};

std::string report_text(const PropertyReport& r);
std::string reports_json(const std::vector<PropertyReport>& rs);

// Generated configurations step up to max_steps; after every step the
// successor must re-type at the same type and must not be stuck before
// becoming a value. Counterexamples are shrunk greedily to a smallest
// failing subconfiguration. `mutation` breaks the stepper under test;
// re-typing always uses the sound checker.
PropertyReport check_subject_reduction(long n_samples, long max_steps,
                                       std::uint64_t seed,
                                       EvalMutation mutation = EvalMutation::None);

// Generated closed U programs of first-order type run directly and through
// the functional translation (10x fuel); the two runs must agree on
// termination and on the final value. `mutation` applies to the direct run
// only — the oracle side always runs sound.
PropertyReport check_differential(long n_samples, long fuel, std::uint64_t seed,
                                  EvalMutation mutation = EvalMutation::None);

// Exhaustive compatibility determinism: all L types up to the node-count
// bound over base {1, Lump(unit)}, against all U types up to the same bound
// over base {unit}; each L type may relate to at most one U type, and
// recover_u must return exactly that one.
PropertyReport check_compat_determinism(int max_size);

// First-order conversion round trips u_to_l then l_to_u and requires the
// original value back exactly; for function types it compares observational
// behavior on generated argument probes instead.
PropertyReport check_conversion_roundtrip(long n_samples, long n_probes,
                                          std::uint64_t seed);

// Generated (context, filler) pairs: translating the plugged program equals
// plugging the translations.
PropertyReport check_compositionality_pairs(long n_pairs, std::uint64_t seed);

// Runs a mixed batch and reports, in counters, how often every evaluator
// rule fired; failures = number of rules that never fired.
PropertyReport check_rule_coverage(long n_samples, std::uint64_t seed);

// Criterion harness: every mutant must be caught by subject reduction or by
// the differential within the sample budget. One note per mutant records
// which property caught it.
PropertyReport check_mutation_sanity(long n_samples, std::uint64_t seed);

} // namespace ul
