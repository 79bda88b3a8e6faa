#include "gapcore/domains.hpp"

#include "gapcore/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gapcore {

FiniteMdp make_cake_mdp(const CakeParams& p) {
    if (!(p.gamma > 0.0 && p.gamma < 1.0))
        throw std::invalid_argument("cake MDP needs gamma in (0, 1)");
    if (!(p.epsilon > 0.0)) throw std::invalid_argument("cake MDP needs epsilon > 0");

    FiniteMdp mdp(2, 2, p.gamma);
    // x1, eat
    mdp.r(0, 0) = 1.0;
    mdp.p(0, 0, 0) = 0.5;
    mdp.p(0, 0, 1) = 0.5;
    // x1, abstain
    mdp.r(0, 1) = 0.0;
    mdp.p(0, 1, 0) = 1.0;
    // x2 absorbs under both actions; the per-step reward is the unique
    // stationary realization of V(x2) = -2(1+eps)/gamma.
    double r2 = -2.0 * (1.0 + p.epsilon) * (1.0 - p.gamma) / p.gamma;
    for (int a = 0; a < 2; ++a) {
        mdp.r(1, a) = r2;
        mdp.p(1, a, 1) = 1.0;
    }
    return mdp;
}

FiniteMdp make_random_mdp(const RandomMdpParams& p) {
    if (p.n_states < 1 || p.n_actions < 1)
        throw std::invalid_argument("random MDP needs positive state/action counts");
    if (p.branching < 1 || p.branching > p.n_states)
        throw std::invalid_argument("branching must be in [1, n_states]");
    if (!(p.self_loop_bias >= 0.0 && p.self_loop_bias <= 1.0))
        throw std::invalid_argument("self_loop_bias must be in [0, 1]");
    if (!(p.reward_min <= p.reward_max))
        throw std::invalid_argument("reward range is empty");
    if (!(p.gamma >= 0.0 && p.gamma < 1.0))
        throw std::invalid_argument("gamma must be in [0, 1)");

    FiniteMdp mdp(p.n_states, p.n_actions, p.gamma);
    Rng rng(derive_stream(p.seed, {0x6dbu}));
    indvec successors(p.n_states);
    for (int x = 0; x < p.n_states; ++x) {
        for (int a = 0; a < p.n_actions; ++a) {
            mdp.r(x, a) = rng.uniform(p.reward_min, p.reward_max);
            // Distinct successors via a partial Fisher-Yates shuffle.
            for (int y = 0; y < p.n_states; ++y) successors[y] = y;
            for (int i = 0; i < p.branching; ++i)
                std::swap(successors[i], successors[i + rng.uniform_int(p.n_states - i)]);
            double total = 0.0;
            numvec mass(p.branching);
            for (int i = 0; i < p.branching; ++i) {
                mass[i] = -std::log(1.0 - rng.next_double()); // Exp(1)
                total += mass[i];
            }
            double scale = (1.0 - p.self_loop_bias) / total;
            for (int i = 0; i < p.branching; ++i)
                mdp.p(x, a, successors[i]) += mass[i] * scale;
            mdp.p(x, a, x) += p.self_loop_bias;
            // Guard against rounding drift in the row sum.
            double sum = 0.0;
            for (int y = 0; y < p.n_states; ++y) sum += mdp.p(x, a, y);
            mdp.p(x, a, successors[0]) += 1.0 - sum;
        }
    }
    return mdp;
}

SolveResult divergence_demo(double alpha_prime, double overshoot, int sweeps) {
    bool overshoot_mode = overshoot > 0.0;
    bool alpha_mode = alpha_prime > 0.0;
    if (overshoot_mode == alpha_mode)
        throw std::invalid_argument(
            "divergence_demo: exactly one of overshoot > 0 or alpha_prime > 0");

    FiniteMdp mdp(1, 2, 0.5);
    mdp.r(0, 0) = 0.0;
    mdp.r(0, 1) = 1.0;
    mdp.p(0, 0, 0) = 1.0;
    mdp.p(0, 1, 0) = 1.0;

    BackupFn backup = [&mdp, alpha_prime, overshoot, overshoot_mode](const QTable& q,
                                                                     QTable& out, int) {
        bellman_backup(mdp, q, out);
        if (overshoot_mode) {
            for (double& v : out.values) v += overshoot;
        } else {
            numvec v = state_values(q);
            for (int a = 0; a < 2; ++a) out(0, a) -= alpha_prime * (v[0] - q(0, a));
        }
    };

    // Adversarial start from the remark's construction: the worse action
    // (reward 0) is inflated to (alpha'-1)^{-1} = 2 at alpha' = 1.5.
    QTable q0(1, 2);
    q0(0, 0) = 2.0;
    q0(0, 1) = 0.0;

    // Effectively no early stop: the point of the demo is the recorded
    // trajectory of greedy values, converged or not.
    return value_iteration(backup, q0, sweeps, 1e-300);
}

double divergence_demo_v_star() { return 1.0 / (1.0 - 0.5); }

} // namespace gapcore
