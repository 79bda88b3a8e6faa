#pragma once

#include "gapcore/mdp.hpp"
#include "gapcore/operators.hpp"

#include <cstdint>
#include <functional>

namespace gapcore {

/// Per-sweep record of a value-iteration or learning run.
///
/// `values`/`gaps` hold one row per recorded sweep over `traced_states`
/// (all states when that vector lists 0..n-1). Tables beyond
/// `kFullTraceStateLimit` states are traced only through the summary columns
/// unless an explicit subset is configured, so grid-scale runs do not eat
/// memory.
struct IterationTrace {
    int sweeps = 0;
    numvec supnorm_delta;         // per sweep: sup |Q_{k+1} - Q_k|
    numvec value_sup;             // per sweep: sup_x |V_k(x)|
    indvec traced_states;
    std::vector<numvec> values;   // per sweep, per traced state
    std::vector<numvec> gaps;     // per sweep, per traced state
    numvec episode_return;        // q_learning only: per-episode return
    double wall_seconds = 0.0;

    /// Mean gap over traced states at a recorded sweep, ignoring states whose
    /// gap is below `floor` (tied rows) or infinite (single-action rows);
    /// returns 0 when no state qualifies.
    double mean_gap(int sweep, double floor = 1e-6) const;
    double min_gap(int sweep, double floor = 1e-6) const;
};

inline constexpr int kFullTraceStateLimit = 10000;

struct TraceOptions {
    bool record_values = true;
    indvec state_subset; // empty = all states (subject to the size cap)
};

/// One synchronous operator application. `out` is preallocated scrap; `sweep`
/// is 0-based and feeds sample-based operators' stream derivation.
using BackupFn = std::function<void(const QTable& q, QTable& out, int sweep)>;

struct SolveResult {
    QTable q;
    IterationTrace trace;
};

/// Iterates Q_{k+1} = backup(Q_k) until sup|Q_{k+1} - Q_k| <= tol or
/// max_sweeps. Throws numerical_error naming the sweep and entry if an
/// iterate goes non-finite.
SolveResult value_iteration(const BackupFn& backup, QTable q0, int max_sweeps, double tol,
                            const TraceOptions& opts = {});

/// Damped iteration Q_{k+1} = (1-eta) Q_k + eta backup(Q_k), eta in (0, 1].
/// eta = 1 reduces exactly to value_iteration.
SolveResult averaged_value_iteration(const BackupFn& backup, QTable q0, double eta,
                                     int max_sweeps, double tol,
                                     const TraceOptions& opts = {});

/// Convenience: wraps a tabular operator spec as a BackupFn.
BackupFn make_tabular_backup(const FiniteMdp& mdp, const OperatorSpec& spec);

/// Largest excess of |V_k(x)| over the bound (2 sup|V_0| + sup|R|) / (1 - gamma)
/// across all recorded sweeps of a trace; <= 0 means the bound held
/// throughout. Uses the always-recorded per-sweep value sup-norms.
double value_bound_excess(const IterationTrace& trace, double v0_sup, double r_sup,
                          double discount);

// ---------------------------------------------------------------------------
// Tabular Q-learning with the Bellman / AL / PAL error rules.
// ---------------------------------------------------------------------------

enum class UpdateRule { bellman, advantage_learning, persistent_al };

const char* to_string(UpdateRule rule);
UpdateRule update_rule_from_string(const std::string& name);

struct LearningConfig {
    UpdateRule rule = UpdateRule::bellman;
    double alpha = 0.0;        // gap penalty; in [0, 1)
    double step_size = 0.1;    // in (0, 1]
    double step_decay_tau = 0; // 0 = constant step; else step * tau / (tau + visits(x,a))
    double exploration = 0.1;  // epsilon-greedy
    int episodes = 1000;
    int max_steps = 100;       // per episode; truncation, not termination
    uint64_t seed = 0;
};

/// Online tabular Q-learning on an episodic wrapper around the MDP: episodes
/// start in a uniformly random state and run for max_steps transitions
/// (plain MDPs have no terminal states; hitting the cap truncates the
/// episode without zeroing the bootstrap). Updates apply
/// Q(x,a) += step * Delta_rule with
///   Delta     = r + gamma V(x') - Q(x,a)
///   Delta_AL  = Delta - alpha [V(x) - Q(x,a)]
///   Delta_PAL = max{Delta_AL, Delta - alpha [V(x') - Q(x',a)]}
/// Behaviour is epsilon-greedy with the global lowest-index tie-break. The
/// trace records per-episode supnorm of applied updates, values, gaps and
/// discounted returns. Strictly single-threaded: updates are order-dependent.
SolveResult q_learning(const FiniteMdp& mdp, const LearningConfig& cfg);

} // namespace gapcore
