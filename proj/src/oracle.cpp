#include "gapcore/oracle.hpp"

#include "gapcore/kernels.hpp"
#include "gapcore/rng.hpp"
#include "gapcore/solver.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace gapcore {

QTable exact_policy_evaluation(const FiniteMdp& mdp, const DeterministicPolicy& pi) {
    const int n = mdp.n_states;
    if (static_cast<int>(pi.action_of.size()) != n)
        throw std::invalid_argument("policy size does not match the MDP");
    for (int x = 0; x < n; ++x)
        if (pi.action_of[x] < 0 || pi.action_of[x] >= mdp.n_actions)
            throw std::invalid_argument("policy action out of range");

    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd b(n);
    for (int x = 0; x < n; ++x) {
        int a = pi.action_of[x];
        for (int y = 0; y < n; ++y) A(x, y) -= mdp.discount * mdp.p(x, a, y);
        b(x) = mdp.r(x, a);
    }
    Eigen::VectorXd v = A.partialPivLu().solve(b);

    // (I - gamma P_pi) is strictly diagonally dominant for gamma < 1, so the
    // solve cannot be singular; still verify the residual.
    double residual = (A * v - b).lpNorm<Eigen::Infinity>();
    if (!(residual <= 1e-10)) {
        std::ostringstream msg;
        msg << "policy evaluation residual " << residual << " exceeds 1e-10";
        throw std::runtime_error(msg.str());
    }

    QTable q(n, mdp.n_actions);
    for (int x = 0; x < n; ++x)
        for (int a = 0; a < mdp.n_actions; ++a) {
            double ev = 0.0;
            for (int y = 0; y < n; ++y) ev += mdp.p(x, a, y) * v(y);
            q(x, a) = mdp.r(x, a) + mdp.discount * ev;
        }
    return q;
}

namespace {

GroundTruth finish_ground_truth(const FiniteMdp& mdp, const numvec& v,
                                GroundTruth::Method method) {
    GroundTruth gt;
    gt.method = method;
    gt.q_star = QTable(mdp.n_states, mdp.n_actions);
    for (int x = 0; x < mdp.n_states; ++x)
        for (int a = 0; a < mdp.n_actions; ++a) {
            double ev = 0.0;
            for (int y = 0; y < mdp.n_states; ++y) ev += mdp.p(x, a, y) * v[y];
            gt.q_star(x, a) = mdp.r(x, a) + mdp.discount * ev;
        }
    // Derive v_star and gaps from q_star so the struct is exactly
    // self-consistent; the backup reproduces the input values to rounding.
    gt.v_star = state_values(gt.q_star);
    gt.gaps = action_gaps(gt.q_star);
    gt.optimal_policy = greedy_policy(gt.q_star);
    return gt;
}

} // namespace

GroundTruth exhaustive_policy_search(const FiniteMdp& mdp) {
    double policies = std::pow(static_cast<double>(mdp.n_actions), mdp.n_states);
    if (policies > 1e6) {
        std::ostringstream msg;
        msg << "exhaustive policy search refused: " << mdp.n_actions << "^" << mdp.n_states
            << " > 1e6 policies";
        throw std::invalid_argument(msg.str());
    }

    numvec v_star(mdp.n_states, -std::numeric_limits<double>::infinity());
    DeterministicPolicy pi;
    pi.action_of.assign(mdp.n_states, 0);
    int64_t count = static_cast<int64_t>(policies);
    for (int64_t code = 0; code < count; ++code) {
        int64_t rest = code;
        for (int x = 0; x < mdp.n_states; ++x) {
            pi.action_of[x] = static_cast<int>(rest % mdp.n_actions);
            rest /= mdp.n_actions;
        }
        QTable q = exact_policy_evaluation(mdp, pi);
        for (int x = 0; x < mdp.n_states; ++x) {
            double vx = q(x, pi.action_of[x]);
            if (vx > v_star[x]) v_star[x] = vx;
        }
    }
    return finish_ground_truth(mdp, v_star, GroundTruth::Method::policy_enumeration);
}

GroundTruth high_precision_vi(const FiniteMdp& mdp, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
    // Stopping threshold for sup|Q - Q*| <= tol; a single sweep is exact for
    // gamma = 0.
    double threshold = mdp.discount > 0.0
                           ? tol * (1.0 - mdp.discount) / mdp.discount
                           : std::numeric_limits<double>::infinity();
    QTable q(mdp.n_states, mdp.n_actions);
    QTable next(mdp.n_states, mdp.n_actions);
    const auto& k = kernels();
    for (int sweep = 0; sweep < 1000000; ++sweep) {
        numvec v = state_values(q);
        for (int x = 0; x < mdp.n_states; ++x)
            for (int a = 0; a < mdp.n_actions; ++a) {
                double ev = k.dot(mdp.transition_row(x, a).data(), v.data(), mdp.n_states);
                next(x, a) = mdp.r(x, a) + mdp.discount * ev;
            }
        double delta = k.max_abs_diff(next.values.data(), q.values.data(), q.values.size());
        std::swap(q.values, next.values);
        if (delta <= threshold) break;
    }
    return finish_ground_truth(mdp, state_values(q), GroundTruth::Method::high_precision_vi);
}

namespace {

QTable random_q(const FiniteMdp& mdp, double envelope, Rng& rng) {
    QTable q(mdp.n_states, mdp.n_actions);
    for (double& v : q.values) v = rng.uniform(-envelope, envelope);
    return q;
}

double q_envelope(const FiniteMdp& mdp) {
    return mdp.max_abs_reward() / (1.0 - mdp.discount);
}

} // namespace

CheckReport check_optimality_preserving(const FiniteMdp& mdp, const OperatorSpec& spec,
                                        int trials, int sweeps, uint64_t seed,
                                        const GroundTruth* gt_in) {
    CheckReport rep;
    rep.check = std::string("optimality_preserving/") + to_string(spec.kind);
    GroundTruth local;
    if (!gt_in) {
        local = exhaustive_policy_search(mdp);
        gt_in = &local;
    }
    const GroundTruth& gt = *gt_in;
    const double envelope = q_envelope(mdp);
    const double r_sup = mdp.max_abs_reward();
    BackupFn backup = make_tabular_backup(mdp, spec);

    for (int trial = 0; trial < trials; ++trial) {
        Rng rng(derive_stream(seed, {static_cast<uint64_t>(trial), 0xa1u}));
        QTable q0 = random_q(mdp, envelope, rng);
        double v0_sup = 0.0;
        for (double v : state_values(q0)) v0_sup = std::max(v0_sup, std::fabs(v));
        TraceOptions light;
        light.record_values = false;
        SolveResult res = value_iteration(backup, q0, sweeps, 1e-300, light);
        rep.bound_excess =
            std::max(rep.bound_excess,
                     value_bound_excess(res.trace, v0_sup, r_sup, mdp.discount));

        numvec v = state_values(res.q);
        for (int x = 0; x < mdp.n_states; ++x) {
            ++rep.cases;
            double err = std::fabs(v[x] - gt.v_star[x]);
            if (err > 1e-6) {
                rep.failures.push_back({trial, x, -1, v[x], gt.v_star[x],
                                        "V_K differs from V*"});
                rep.worst_excess = std::max(rep.worst_excess, err - 1e-6);
            }
            for (int a = 0; a < mdp.n_actions; ++a) {
                if (gt.v_star[x] - gt.q_star(x, a) < 0.01) continue; // numerically tied
                ++rep.cases;
                double excess = res.q(x, a) - gt.q_star(x, a);
                if (excess > 1e-6) {
                    rep.failures.push_back({trial, x, a, res.q(x, a), gt.q_star(x, a),
                                            "suboptimal Q_K exceeds Q*"});
                    rep.worst_excess = std::max(rep.worst_excess, excess - 1e-6);
                }
            }
        }
    }
    return rep;
}

GapReport check_gap_increasing(const FiniteMdp& mdp, const OperatorSpec& spec, int trials,
                               int sweeps, uint64_t seed, const GroundTruth* gt_in) {
    GapReport rep;
    rep.check = std::string("gap_increasing/") + to_string(spec.kind);
    GroundTruth local;
    if (!gt_in) {
        local = exhaustive_policy_search(mdp);
        gt_in = &local;
    }
    const GroundTruth& gt = *gt_in;
    const double envelope = q_envelope(mdp);
    BackupFn backup = make_tabular_backup(mdp, spec);

    for (int trial = 0; trial < trials; ++trial) {
        Rng rng(derive_stream(seed, {static_cast<uint64_t>(trial), 0xb2u}));
        TraceOptions light;
        light.record_values = false;
        SolveResult res =
            value_iteration(backup, random_q(mdp, envelope, rng), sweeps, 1e-300, light);
        numvec v = state_values(res.q);
        for (int x = 0; x < mdp.n_states; ++x)
            for (int a = 0; a < mdp.n_actions; ++a) {
                ++rep.cases;
                double got = v[x] - res.q(x, a);
                double want = gt.v_star[x] - gt.q_star(x, a);
                if (got < want - 1e-6) {
                    rep.failures.push_back({trial, x, a, got, want,
                                            "converged gap below the true gap"});
                    rep.worst_excess = std::max(rep.worst_excess, (want - 1e-6) - got);
                }
                if (got > want + 1e-4) ++rep.strict_pairs;
            }
    }
    return rep;
}

double check_contraction(const FiniteMdp& mdp, const OperatorSpec& spec, int pairs,
                         uint64_t seed) {
    if (spec.kind != OperatorKind::bellman && spec.kind != OperatorKind::consistent)
        throw std::invalid_argument("contraction check supports bellman and consistent only");
    const double envelope = q_envelope(mdp);
    const auto& k = kernels();
    Rng rng(derive_stream(seed, {0xc3u}));
    double worst = 0.0;
    QTable t1, t2;
    for (int i = 0; i < pairs; ++i) {
        QTable q1 = random_q(mdp, envelope, rng);
        QTable q2 = random_q(mdp, envelope, rng);
        double denom = k.max_abs_diff(q1.values.data(), q2.values.data(), q1.values.size());
        if (denom == 0.0) continue; // degenerate pair
        tabular_backup(mdp, q1, spec, t1);
        tabular_backup(mdp, q2, spec, t2);
        double num = k.max_abs_diff(t1.values.data(), t2.values.data(), t1.values.size());
        worst = std::max(worst, num / denom);
    }
    return worst;
}

} // namespace gapcore
