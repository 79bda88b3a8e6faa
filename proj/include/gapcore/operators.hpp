#pragma once

#include "gapcore/mdp.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace gapcore {

enum class OperatorKind {
    bellman,
    consistent,
    advantage_learning,
    persistent_al,
    lazy,
    aggregated,
    qvi,
    cqvi,
};

const char* to_string(OperatorKind kind);
OperatorKind operator_kind_from_string(const std::string& name);

/// Selects one operator from the family plus its parameters. `alpha` is
/// ignored by kinds that do not take one; `sample_count`/`seed` matter only
/// for the sample-based grid kinds.
struct OperatorSpec {
    OperatorKind kind = OperatorKind::bellman;
    double alpha = 0.0;
    int sample_count = 1;
    uint64_t seed = 0;
};

/// Throws std::invalid_argument when the spec is out of contract. alpha = 1
/// is rejected for the alpha-parameterized kinds: whether the boundary case
/// can diverge is an open problem, so the artifact refuses it rather than
/// guessing.
void validate_spec(const OperatorSpec& spec);

bool is_tabular_kind(OperatorKind kind);

// ---------------------------------------------------------------------------
// Tabular backups. Each maps a Q-table to a new Q-table of the same shape.
// The out-parameter forms reuse the caller's buffer; out must not alias q.
// Rows of the output are independent, so the implementations may partition
// (state, action) pairs across threads; results do not depend on the
// partitioning.
// ---------------------------------------------------------------------------

/// TQ(x,a) = R(x,a) + discount * sum_y P(y|x,a) max_b Q(y,b).
void bellman_backup(const FiniteMdp& mdp, const QTable& q, QTable& out);
QTable bellman_backup(const FiniteMdp& mdp, const QTable& q);

/// Consistent backup, computed in the rewritten advantage-learning form
/// TQ(x,a) - discount * P(x|x,a) * [V(x) - Q(x,a)]. Numerically equivalent
/// (within 1e-12) to the indicator form that reuses Q(x,a) on self loops.
void consistent_backup(const FiniteMdp& mdp, const QTable& q, QTable& out);
QTable consistent_backup(const FiniteMdp& mdp, const QTable& q);

/// TQ(x,a) - alpha * [V(x) - Q(x,a)], alpha in [0, 1).
void advantage_learning_backup(const FiniteMdp& mdp, const QTable& q, double alpha,
                               QTable& out);
QTable advantage_learning_backup(const FiniteMdp& mdp, const QTable& q, double alpha);

/// Elementwise max of the advantage-learning backup and the repeat-action
/// backup R(x,a) + discount * sum_y P(y|x,a) Q(y,a).
void persistent_al_backup(const FiniteMdp& mdp, const QTable& q, double alpha,
                          QTable& out);
QTable persistent_al_backup(const FiniteMdp& mdp, const QTable& q, double alpha);

/// Keeps Q(x,a) unchanged while the update could not affect the greedy
/// choice: out = Q(x,a) if Q(x,a) <= TQ(x,a) and TQ(x,a) <= alpha*V(x) +
/// (1-alpha)*Q(x,a), else TQ(x,a).
void lazy_backup(const FiniteMdp& mdp, const QTable& q, double alpha, QTable& out);
QTable lazy_backup(const FiniteMdp& mdp, const QTable& q, double alpha);

/// Applies the tabular operator selected by `spec`. kind cqvi means the
/// identity-weight embedding, which reduces to min(bellman, consistent).
/// Throws std::invalid_argument for grid-only kinds (aggregated, qvi).
void tabular_backup(const FiniteMdp& mdp, const QTable& q, const OperatorSpec& spec,
                    QTable& out);
QTable tabular_backup(const FiniteMdp& mdp, const QTable& q, const OperatorSpec& spec);

// ---------------------------------------------------------------------------
// Optimality-preservation condition checker.
// ---------------------------------------------------------------------------

/// Pointwise evaluation of the two sufficient conditions for an operator T'
/// to be optimality-preserving and gap-increasing, against the Bellman
/// backup T:
///   cond1: T'Q(x,a) <= TQ(x,a)
///   cond2: T'Q(x,a) >= TQ(x,a) - alpha * [V(x) - Q(x,a)]
struct OperatorConditionsReport {
    int n_states = 0;
    int n_actions = 0;
    double alpha_used = 0.0;
    std::vector<uint8_t> cond1_ok; // per (state, action), row-major
    std::vector<uint8_t> cond2_ok;
    double worst_cond1 = 0.0; // largest cond1 violation magnitude (>= 0)
    double worst_cond2 = 0.0;

    bool all_ok() const;
};

/// The alpha the checker uses for cond2: spec.alpha for the
/// alpha-parameterized kinds, max over (x,a) of discount * P(x|x,a) for the
/// consistent and cqvi kinds (strictly below 1 since discount < 1), and 0
/// for bellman.
double effective_alpha(const FiniteMdp& mdp, const OperatorSpec& spec);

OperatorConditionsReport operator_conditions_check(const FiniteMdp& mdp, const QTable& q,
                              const OperatorSpec& spec, double tol = 1e-12);

/// Same check against a precomputed T'Q table with an explicit alpha; lets
/// callers probe operators that are not part of the family (including
/// deliberately broken ones).
OperatorConditionsReport operator_conditions_check_table(const FiniteMdp& mdp, const QTable& q,
                                    const QTable& tpq, double alpha, double tol = 1e-12);

} // namespace gapcore
