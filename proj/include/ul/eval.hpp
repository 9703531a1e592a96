// Deterministic small-step evaluator for mixed UL programs.
//
// U steps are call-by-value, left to right. L steps act on configurations
// <store, expr>; every store-shape side condition is checked before firing,
// and a failed check surfaces as Stuck with a reason, never as silent
// progress. Exactly one rule applies to any closed non-value, so stepping is
// a function; the metatheory suite leans on that determinism.
#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ul/ast.hpp"

namespace ul {

// Fault injection for the metatheory suite, which must be able to tell a
// broken evaluator from a sound one. The CLI never sets these.
enum class EvalMutation {
  None,
  NoFreshen,               // un-sharing a function skips location freshening
  WrongCopySplit,          // copy of a pair hands the whole store to the left
  SkipBoundaryConversion,  // unlump returns the lump unconverted
  FoldUnfoldNonCancelling, // unfold(fold v) keeps the fold
};

struct TraceEvent {
  long step = 0;              // index within the run, from 0
  std::string rule;           // head rule that fired
  std::string pos;            // redex position as a context path; "top" at the root
  std::size_t store_size = 0; // open locations across all layers, after the step
  long allocs = 0;            // cumulative new_allocs, after the step
};

// Counters are monotone over a run. Marks named "<phase>_begin" and
// "<phase>_end" toggle a phase; allocation and pair counters that fire while
// a phase is active are attributed to it as well.
struct EvalStats {
  long steps = 0;
  long new_allocs = 0;
  long frees = 0;
  long copies = 0;
  long boundary_crossings = 0;
  // U pairs completed by a congruence step. A pair materialized wholly by
  // substitution is not counted; data built by a running loop completes here.
  long u_pair_constructions = 0;
  std::set<std::string> active_phases;
  std::map<std::string, long> phase_new_allocs;
  std::map<std::string, long> phase_u_pairs;
  std::map<std::string, long> rule_fires;
};

struct EvalOptions {
  long fuel = 100000;
  EvalMutation mutation = EvalMutation::None;
  std::vector<TraceEvent>* trace = nullptr; // one event per step when set
};

enum class StepKind { Value, Stepped, Stuck };

struct UStepResult {
  StepKind kind;
  UEx expr; // successor when Stepped; the input otherwise
  std::string rule;
  std::string pos;
  std::string stuck; // reason when Stuck
};

struct LStepResult {
  StepKind kind;
  Configuration config;
  std::string rule;
  std::string pos;
  std::string stuck;
};

// Supplies seeded past every location literal in the input, so fresh cells
// never collide with live ones.
LocSupply supply_for(const UEx& e);
LocSupply supply_for(const Configuration& c);

// One step. Thread the same supply across a run; it is never rewound.
UStepResult step_u(const UEx& e, LocSupply& locs, EvalStats& stats,
                   const EvalOptions& opt = {});
LStepResult step_l(const Configuration& c, LocSupply& locs, EvalStats& stats,
                   const EvalOptions& opt = {});

// Driver state for a full run. Fuel strictly decreases per step.
struct MachineState {
  UEx expr;
  long fuel;
  LocSupply loc_supply;
  EvalStats stats;
};

struct URunOutcome {
  enum class Kind { Value, OutOfFuel, Stuck } kind;
  UEx expr; // final expression; the value when kind == Value
  std::string stuck;
  long steps_used = 0;
  EvalStats stats;
};

struct LRunOutcome {
  enum class Kind { Value, OutOfFuel, Stuck } kind;
  Configuration config;
  std::string stuck;
  long steps_used = 0;
  EvalStats stats;
};

URunOutcome run_u(const UEx& e, const EvalOptions& opt = {});
LRunOutcome run_l(Configuration c, const EvalOptions& opt = {});

// Every head-rule name the stepper can fire: the universe the coverage
// report measures against.
const std::vector<std::string>& eval_rule_names();

} // namespace ul
