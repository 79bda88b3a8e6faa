#pragma once

#include "gapcore/types.hpp"

#include <span>
#include <string>

namespace gapcore {

/// Explicit tabular MDP: dense transition tensor, reward table and discount.
///
/// States and actions are 0-based contiguous indices. `transition` is stored
/// row-major as (state, action, next_state) and `reward` as (state, action).
/// Instances are plain values; after construction nothing mutates them, so
/// they can be shared freely across threads.
struct FiniteMdp {
    int n_states = 0;
    int n_actions = 0;
    numvec transition; // n_states * n_actions * n_states
    numvec reward;     // n_states * n_actions
    double discount = 0.0;

    FiniteMdp() = default;
    FiniteMdp(int states, int actions, double discount_)
        : n_states(states), n_actions(actions),
          transition(static_cast<std::size_t>(states) * actions * states, 0.0),
          reward(static_cast<std::size_t>(states) * actions, 0.0), discount(discount_) {}

    double p(int x, int a, int y) const {
        return transition[(static_cast<std::size_t>(x) * n_actions + a) * n_states + y];
    }
    double& p(int x, int a, int y) {
        return transition[(static_cast<std::size_t>(x) * n_actions + a) * n_states + y];
    }
    std::span<const double> transition_row(int x, int a) const {
        return {transition.data() + (static_cast<std::size_t>(x) * n_actions + a) * n_states,
                static_cast<std::size_t>(n_states)};
    }
    double r(int x, int a) const {
        return reward[static_cast<std::size_t>(x) * n_actions + a];
    }
    double& r(int x, int a) {
        return reward[static_cast<std::size_t>(x) * n_actions + a];
    }

    /// sup |R| over all (state, action) pairs.
    double max_abs_reward() const;
};

/// Dense action-value table; the object every operator maps to a new table.
struct QTable {
    int n_states = 0;
    int n_actions = 0;
    numvec values; // row-major (state, action)

    QTable() = default;
    QTable(int states, int actions, double fill = 0.0)
        : n_states(states), n_actions(actions),
          values(static_cast<std::size_t>(states) * actions, fill) {}

    double operator()(int x, int a) const {
        return values[static_cast<std::size_t>(x) * n_actions + a];
    }
    double& operator()(int x, int a) {
        return values[static_cast<std::size_t>(x) * n_actions + a];
    }
    std::span<const double> row(int x) const {
        return {values.data() + static_cast<std::size_t>(x) * n_actions,
                static_cast<std::size_t>(n_actions)};
    }
    std::span<double> row(int x) {
        return {values.data() + static_cast<std::size_t>(x) * n_actions,
                static_cast<std::size_t>(n_actions)};
    }
    bool same_shape(const QTable& o) const {
        return n_states == o.n_states && n_actions == o.n_actions;
    }
    bool same_shape(const FiniteMdp& m) const {
        return n_states == m.n_states && n_actions == m.n_actions;
    }
};

struct DeterministicPolicy {
    indvec action_of; // indexed by state
};

/// One failed model check; `state`/`action` are -1 when not applicable.
struct Violation {
    int state = -1;
    int action = -1;
    std::string message;
};

/// Checks the FiniteMdp invariants: transition rows nonnegative and summing
/// to 1 within 1e-12, finite rewards, discount strictly below 1. Returns an
/// empty list iff the model is valid; no silent renormalization happens
/// anywhere (a generator that produces an off-by-1e-9 row should hear about
/// it, not have it papered over).
std::vector<Violation> validate_mdp(const FiniteMdp& mdp);

/// V(x) = max_a Q(x, a).
numvec state_values(const QTable& q);

/// Greedy policy; ties broken toward the lowest action index so traces are
/// reproducible.
DeterministicPolicy greedy_policy(const QTable& q);

/// Gap between the best and second-best action value at x. Returns 0 when
/// the maximum is tied and +infinity for single-action tables, so gap
/// statistics over mixed models never abort.
double action_gap(const QTable& q, int x);

/// action_gap for every state.
numvec action_gaps(const QTable& q);

} // namespace gapcore
