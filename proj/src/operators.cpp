#include "gapcore/operators.hpp"

#include "gapcore/kernels.hpp"
#include "gapcore/parallel.hpp"

#include <algorithm>
#include <stdexcept>

namespace gapcore {

const char* to_string(OperatorKind kind) {
    switch (kind) {
    case OperatorKind::bellman: return "bellman";
    case OperatorKind::consistent: return "consistent";
    case OperatorKind::advantage_learning: return "al";
    case OperatorKind::persistent_al: return "pal";
    case OperatorKind::lazy: return "lazy";
    case OperatorKind::aggregated: return "aggregated";
    case OperatorKind::qvi: return "qvi";
    case OperatorKind::cqvi: return "cqvi";
    }
    return "?";
}

OperatorKind operator_kind_from_string(const std::string& name) {
    if (name == "bellman") return OperatorKind::bellman;
    if (name == "consistent") return OperatorKind::consistent;
    if (name == "al" || name == "advantage_learning") return OperatorKind::advantage_learning;
    if (name == "pal" || name == "persistent_al") return OperatorKind::persistent_al;
    if (name == "lazy") return OperatorKind::lazy;
    if (name == "aggregated") return OperatorKind::aggregated;
    if (name == "qvi") return OperatorKind::qvi;
    if (name == "cqvi") return OperatorKind::cqvi;
    throw std::invalid_argument("unknown operator kind: " + name);
}

void validate_spec(const OperatorSpec& spec) {
    switch (spec.kind) {
    case OperatorKind::advantage_learning:
    case OperatorKind::persistent_al:
    case OperatorKind::lazy:
        if (!(spec.alpha >= 0.0 && spec.alpha < 1.0))
            throw std::invalid_argument("alpha must be in [0, 1) for " +
                                        std::string(to_string(spec.kind)));
        break;
    default:
        break;
    }
    if (spec.sample_count < 1)
        throw std::invalid_argument("sample_count must be positive");
}

bool is_tabular_kind(OperatorKind kind) {
    switch (kind) {
    case OperatorKind::bellman:
    case OperatorKind::consistent:
    case OperatorKind::advantage_learning:
    case OperatorKind::persistent_al:
    case OperatorKind::lazy:
    case OperatorKind::cqvi:
        return true;
    default:
        return false;
    }
}

namespace {

void require_match(const FiniteMdp& mdp, const QTable& q) {
    if (!q.same_shape(mdp))
        throw std::invalid_argument("Q-table dimensions do not match the MDP");
}

void reshape(QTable& out, const FiniteMdp& mdp) {
    if (!out.same_shape(mdp)) out = QTable(mdp.n_states, mdp.n_actions);
}

// All tabular backups start from the plain Bellman table; the family members
// are cheap per-entry corrections of it.
void bellman_into(const FiniteMdp& mdp, const numvec& v, QTable& out) {
    const auto& k = kernels();
    const int na = mdp.n_actions;
    int64_t pairs = static_cast<int64_t>(mdp.n_states) * na;
    parallel_for(pairs, [&](int64_t begin, int64_t end) {
        for (int64_t i = begin; i < end; ++i) {
            int x = static_cast<int>(i / na);
            int a = static_cast<int>(i % na);
            double ev = k.dot(mdp.transition_row(x, a).data(), v.data(), mdp.n_states);
            out(x, a) = mdp.r(x, a) + mdp.discount * ev;
        }
    });
}

} // namespace

void bellman_backup(const FiniteMdp& mdp, const QTable& q, QTable& out) {
    require_match(mdp, q);
    reshape(out, mdp);
    numvec v = state_values(q);
    bellman_into(mdp, v, out);
}

QTable bellman_backup(const FiniteMdp& mdp, const QTable& q) {
    QTable out;
    bellman_backup(mdp, q, out);
    return out;
}

void consistent_backup(const FiniteMdp& mdp, const QTable& q, QTable& out) {
    require_match(mdp, q);
    reshape(out, mdp);
    numvec v = state_values(q);
    bellman_into(mdp, v, out);
    // Self-loop correction: subtracting a nonnegative term, so the result
    // never exceeds the Bellman value even in floating point.
    for (int x = 0; x < mdp.n_states; ++x)
        for (int a = 0; a < mdp.n_actions; ++a)
            out(x, a) -= mdp.discount * mdp.p(x, a, x) * (v[x] - q(x, a));
}

QTable consistent_backup(const FiniteMdp& mdp, const QTable& q) {
    QTable out;
    consistent_backup(mdp, q, out);
    return out;
}

void advantage_learning_backup(const FiniteMdp& mdp, const QTable& q, double alpha,
                               QTable& out) {
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw std::invalid_argument("alpha must be in [0, 1)");
    require_match(mdp, q);
    reshape(out, mdp);
    numvec v = state_values(q);
    bellman_into(mdp, v, out);
    const auto& k = kernels();
    numvec vexp(q.values.size());
    for (int x = 0; x < q.n_states; ++x)
        std::fill_n(vexp.data() + static_cast<std::size_t>(x) * q.n_actions, q.n_actions,
                    v[x]);
    k.gap_penalty(out.values.data(), q.values.data(), vexp.data(), alpha,
                  out.values.data(), out.values.size());
}

QTable advantage_learning_backup(const FiniteMdp& mdp, const QTable& q, double alpha) {
    QTable out;
    advantage_learning_backup(mdp, q, alpha, out);
    return out;
}

void persistent_al_backup(const FiniteMdp& mdp, const QTable& q, double alpha,
                          QTable& out) {
    advantage_learning_backup(mdp, q, alpha, out);
    const auto& k = kernels();
    // Repeat-action backup needs Q columns contiguous for the expectation.
    numvec qt(q.values.size()); // (action, state)
    for (int x = 0; x < q.n_states; ++x)
        for (int a = 0; a < q.n_actions; ++a)
            qt[static_cast<std::size_t>(a) * q.n_states + x] = q(x, a);
    QTable repeat(mdp.n_states, mdp.n_actions);
    const int na = mdp.n_actions;
    int64_t pairs = static_cast<int64_t>(mdp.n_states) * na;
    parallel_for(pairs, [&](int64_t begin, int64_t end) {
        for (int64_t i = begin; i < end; ++i) {
            int x = static_cast<int>(i / na);
            int a = static_cast<int>(i % na);
            double ev = k.dot(mdp.transition_row(x, a).data(),
                              qt.data() + static_cast<std::size_t>(a) * q.n_states,
                              mdp.n_states);
            repeat(x, a) = mdp.r(x, a) + mdp.discount * ev;
        }
    });
    k.elem_max(out.values.data(), repeat.values.data(), out.values.data(),
               out.values.size());
}

QTable persistent_al_backup(const FiniteMdp& mdp, const QTable& q, double alpha) {
    QTable out;
    persistent_al_backup(mdp, q, alpha, out);
    return out;
}

void lazy_backup(const FiniteMdp& mdp, const QTable& q, double alpha, QTable& out) {
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw std::invalid_argument("alpha must be in [0, 1)");
    require_match(mdp, q);
    reshape(out, mdp);
    numvec v = state_values(q);
    bellman_into(mdp, v, out); // out = TQ
    for (int x = 0; x < mdp.n_states; ++x) {
        for (int a = 0; a < mdp.n_actions; ++a) {
            double qa = q(x, a);
            double tq = out(x, a);
            if (qa <= tq && tq <= alpha * v[x] + (1.0 - alpha) * qa) out(x, a) = qa;
        }
    }
}

QTable lazy_backup(const FiniteMdp& mdp, const QTable& q, double alpha) {
    QTable out;
    lazy_backup(mdp, q, alpha, out);
    return out;
}

void tabular_backup(const FiniteMdp& mdp, const QTable& q, const OperatorSpec& spec,
                    QTable& out) {
    validate_spec(spec);
    switch (spec.kind) {
    case OperatorKind::bellman:
        bellman_backup(mdp, q, out);
        return;
    case OperatorKind::consistent:
        consistent_backup(mdp, q, out);
        return;
    case OperatorKind::advantage_learning:
        advantage_learning_backup(mdp, q, spec.alpha, out);
        return;
    case OperatorKind::persistent_al:
        persistent_al_backup(mdp, q, spec.alpha, out);
        return;
    case OperatorKind::lazy:
        lazy_backup(mdp, q, spec.alpha, out);
        return;
    case OperatorKind::cqvi: {
        // Identity-weight embedding of the finite MDP: T_QVI reduces to the
        // Bellman backup and T'_QVI to the consistent backup, so the min of
        // the pair is computable in closed form.
        QTable tc;
        bellman_backup(mdp, q, out);
        consistent_backup(mdp, q, tc);
        kernels().elem_min(out.values.data(), tc.values.data(), out.values.data(),
                           out.values.size());
        return;
    }
    default:
        throw std::invalid_argument(std::string("operator kind '") + to_string(spec.kind) +
                                    "' has no tabular backup");
    }
}

QTable tabular_backup(const FiniteMdp& mdp, const QTable& q, const OperatorSpec& spec) {
    QTable out;
    tabular_backup(mdp, q, spec, out);
    return out;
}

bool OperatorConditionsReport::all_ok() const {
    return std::all_of(cond1_ok.begin(), cond1_ok.end(), [](uint8_t b) { return b != 0; }) &&
           std::all_of(cond2_ok.begin(), cond2_ok.end(), [](uint8_t b) { return b != 0; });
}

double effective_alpha(const FiniteMdp& mdp, const OperatorSpec& spec) {
    switch (spec.kind) {
    case OperatorKind::bellman:
        return 0.0;
    case OperatorKind::consistent:
    case OperatorKind::cqvi: {
        double m = 0.0;
        for (int x = 0; x < mdp.n_states; ++x)
            for (int a = 0; a < mdp.n_actions; ++a)
                m = std::max(m, mdp.discount * mdp.p(x, a, x));
        return m; // < 1 because discount < 1
    }
    case OperatorKind::advantage_learning:
    case OperatorKind::persistent_al:
    case OperatorKind::lazy:
        return spec.alpha;
    default:
        throw std::invalid_argument(std::string("operator kind '") + to_string(spec.kind) +
                                    "' is not supported by operator_conditions_check");
    }
}

OperatorConditionsReport operator_conditions_check(const FiniteMdp& mdp, const QTable& q,
                              const OperatorSpec& spec, double tol) {
    if (!is_tabular_kind(spec.kind))
        throw std::invalid_argument(std::string("operator kind '") + to_string(spec.kind) +
                                    "' is not supported by operator_conditions_check");
    return operator_conditions_check_table(mdp, q, tabular_backup(mdp, q, spec),
                                effective_alpha(mdp, spec), tol);
}

OperatorConditionsReport operator_conditions_check_table(const FiniteMdp& mdp, const QTable& q,
                                    const QTable& tpq, double alpha, double tol) {
    OperatorConditionsReport rep;
    rep.n_states = mdp.n_states;
    rep.n_actions = mdp.n_actions;
    rep.alpha_used = alpha;

    QTable tq = bellman_backup(mdp, q);
    numvec v = state_values(q);

    std::size_t n = tq.values.size();
    rep.cond1_ok.assign(n, 1);
    rep.cond2_ok.assign(n, 1);
    for (int x = 0; x < mdp.n_states; ++x) {
        for (int a = 0; a < mdp.n_actions; ++a) {
            std::size_t i = static_cast<std::size_t>(x) * mdp.n_actions + a;
            double excess = tpq(x, a) - tq(x, a);
            if (excess > tol) {
                rep.cond1_ok[i] = 0;
                rep.worst_cond1 = std::max(rep.worst_cond1, excess);
            }
            double bound = tq(x, a) - rep.alpha_used * (v[x] - q(x, a));
            double deficit = bound - tpq(x, a);
            if (deficit > tol) {
                rep.cond2_ok[i] = 0;
                rep.worst_cond2 = std::max(rep.worst_cond2, deficit);
            }
        }
    }
    return rep;
}

} // namespace gapcore
