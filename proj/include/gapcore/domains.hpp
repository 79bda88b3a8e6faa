#pragma once

#include "gapcore/mdp.hpp"
#include "gapcore/solver.hpp"

#include <cstdint>

namespace gapcore {

/// Parameters of the two-state cake/no-cake MDP. State 0 ("x1") offers the
/// tempting action; state 1 ("x2") is the low-value absorbing state.
struct CakeParams {
    double gamma = 0.5;
    double epsilon = 0.1;
};

/// Builds the cake MDP:
///   x1, a0 (eat):     reward 1, next x1 or x2 with probability 1/2 each
///   x1, a1 (abstain): reward 0, stays in x1
///   x2, both actions: self-loop with per-step reward -2(1+eps)(1-gamma)/gamma,
/// which realizes V(x2) = -2(1+eps)/gamma exactly. Closed forms: the optimal
/// policy abstains, V*(x1) = 0, Q*(x1, a0) = -eps, and the optimal action
/// gap at x1 is eps.
FiniteMdp make_cake_mdp(const CakeParams& p);

struct RandomMdpParams {
    int n_states = 5;
    int n_actions = 3;
    uint64_t seed = 0;
    int branching = 3;           // successors per (state, action), <= n_states
    double self_loop_bias = 0.0; // extra probability mass on the diagonal
    double reward_min = -1.0;
    double reward_max = 1.0;
    double gamma = 0.9;
};

/// Seeded generator for test-corpus MDPs. Transition rows put
/// (1 - self_loop_bias) of normalized exponential mass on `branching`
/// distinct successors plus the bias on the diagonal; rewards are uniform in
/// the configured range. Identical parameters produce identical models.
FiniteMdp make_random_mdp(const RandomMdpParams& p);

/// Single-state, two-action construction behind the divergence remark:
/// rewards (0, 1), gamma = 0.5, so V* = 2. Exactly one mode is active:
///   overshoot > 0:    iterates T'Q = TQ + overshoot (violates condition 1);
///                     the greedy value converges to V* + overshoot/(1-gamma).
///   alpha_prime > 0:  iterates T'Q = TQ - alpha_prime (V - Q); compliant for
///                     alpha_prime < 1, divergent for alpha_prime > 1 from
///                     the adversarial start Q0 = (2, 0).
/// Returns the iteration trace so callers can inspect lim max_a Q_k.
SolveResult divergence_demo(double alpha_prime, double overshoot, int sweeps = 200);

/// V* of the divergence-demo MDP (= 2).
double divergence_demo_v_star();

} // namespace gapcore
