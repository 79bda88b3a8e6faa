#pragma once

#include "gapcore/mdp.hpp"
#include "gapcore/operators.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gapcore {

/// Exact optimal quantities for a FiniteMdp, plus how they were obtained.
/// Deliberately independent of the solver module: policy enumeration only
/// needs exact policy evaluation, and the tight-stopping value iteration
/// below re-implements its loop inline, so a solver bug cannot certify
/// itself.
struct GroundTruth {
    enum class Method { policy_enumeration, high_precision_vi };

    QTable q_star;
    numvec v_star;
    numvec gaps;
    DeterministicPolicy optimal_policy;
    Method method = Method::policy_enumeration;
};

/// Solves the policy Bellman equation (I - gamma P_pi) V = R_pi by direct LU
/// factorization, then recovers Q^pi with one backup. The residual of the
/// policy Bellman equation is checked to 1e-10.
QTable exact_policy_evaluation(const FiniteMdp& mdp, const DeterministicPolicy& pi);

/// Evaluates every deterministic stationary policy and takes the pointwise
/// best. Refuses instances with more than 10^6 policies. This is the
/// primary brute-force oracle for small MDPs.
GroundTruth exhaustive_policy_search(const FiniteMdp& mdp);

/// Bellman value iteration with the stopping rule
/// sup-delta <= tol (1 - gamma) / gamma, which guarantees
/// sup |Q - Q*| <= tol.
GroundTruth high_precision_vi(const FiniteMdp& mdp, double tol);

// ---------------------------------------------------------------------------
// Property checks. Failures are reported, not thrown.
// ---------------------------------------------------------------------------

struct CheckFailure {
    int trial = -1;
    int state = -1;
    int action = -1;
    double observed = 0.0;
    double expected = 0.0;
    std::string what;
};

struct CheckReport {
    std::string check;
    int cases = 0; // assertions evaluated
    std::vector<CheckFailure> failures;
    double worst_excess = 0.0;    // most positive violation margin seen
    double bound_excess = -1e300; // optimality check only: see below

    bool passed() const { return failures.empty(); }
};

/// Runs `trials` value-iteration passes of the operator from random Q0 drawn
/// in +-Rmax/(1-gamma) and asserts, against the ground truth:
///   (a) |V_K(x) - V*(x)| <= 1e-6 at every state;
///   (b) Q_K(x,a) <= Q*(x,a) + 1e-6 wherever the true gap is >= 0.01.
/// Also tracks the largest excess of any recorded |V_k(x)| over the bound
/// (2 sup|V_0| + sup|R|)/(1 - gamma) in bound_excess (<= 0 means the bound
/// held). Pass a precomputed GroundTruth to skip the enumeration.
CheckReport check_optimality_preserving(const FiniteMdp& mdp, const OperatorSpec& spec,
                                        int trials, int sweeps, uint64_t seed,
                                        const GroundTruth* gt = nullptr);

/// Same runs, asserting converged gaps dominate the true gaps:
/// V_K(x) - Q_K(x,a) >= V*(x) - Q*(x,a) - 1e-6 for every pair. The report's
/// `strict_pairs` counts pairs exceeding the true gap by more than 1e-4
/// (evidence of strictly gap-increasing behaviour).
struct GapReport : CheckReport {
    int strict_pairs = 0;
};
GapReport check_gap_increasing(const FiniteMdp& mdp, const OperatorSpec& spec, int trials,
                               int sweeps, uint64_t seed, const GroundTruth* gt = nullptr);

/// Empirical Lipschitz constant in sup norm over `pairs` random Q-pairs:
/// max sup|T'Q1 - T'Q2| / sup|Q1 - Q2|, skipping coincident pairs. Only the
/// bellman and consistent kinds are contractions; other kinds are rejected.
double check_contraction(const FiniteMdp& mdp, const OperatorSpec& spec, int pairs,
                         uint64_t seed);

} // namespace gapcore
