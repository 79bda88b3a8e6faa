#include "gapcore/mdp.hpp"

#include "gapcore/kernels.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace gapcore {

double FiniteMdp::max_abs_reward() const {
    double m = 0.0;
    for (double v : reward) {
        double a = std::fabs(v);
        if (a > m) m = a;
    }
    return m;
}

std::vector<Violation> validate_mdp(const FiniteMdp& mdp) {
    std::vector<Violation> out;
    auto add = [&out](int x, int a, std::string msg) {
        out.push_back({x, a, std::move(msg)});
    };

    if (mdp.n_states < 1) add(-1, -1, "n_states must be positive");
    if (mdp.n_actions < 1) add(-1, -1, "n_actions must be positive");
    if (!(mdp.discount >= 0.0) || mdp.discount >= 1.0)
        add(-1, -1, "discount must be in [0, 1): discount must be < 1");

    std::size_t want_t = static_cast<std::size_t>(mdp.n_states) * mdp.n_actions * mdp.n_states;
    std::size_t want_r = static_cast<std::size_t>(mdp.n_states) * mdp.n_actions;
    if (mdp.transition.size() != want_t) {
        add(-1, -1, "transition tensor has wrong size");
        return out;
    }
    if (mdp.reward.size() != want_r) {
        add(-1, -1, "reward table has wrong size");
        return out;
    }

    for (int x = 0; x < mdp.n_states; ++x) {
        for (int a = 0; a < mdp.n_actions; ++a) {
            double sum = 0.0;
            bool negative = false;
            for (int y = 0; y < mdp.n_states; ++y) {
                double p = mdp.p(x, a, y);
                if (p < 0.0) negative = true;
                sum += p;
            }
            if (negative) add(x, a, "transition row has a negative entry");
            if (std::fabs(sum - 1.0) > 1e-12) {
                std::ostringstream msg;
                msg << "transition row sums to " << sum << ", expected 1";
                add(x, a, msg.str());
            }
            if (!std::isfinite(mdp.r(x, a))) add(x, a, "reward is not finite");
        }
    }
    return out;
}

numvec state_values(const QTable& q) {
    const auto& k = kernels();
    numvec v(q.n_states);
    for (int x = 0; x < q.n_states; ++x)
        v[x] = k.max_value(q.row(x).data(), q.n_actions);
    return v;
}

DeterministicPolicy greedy_policy(const QTable& q) {
    DeterministicPolicy pi;
    pi.action_of.resize(q.n_states);
    for (int x = 0; x < q.n_states; ++x) {
        auto row = q.row(x);
        int best = 0;
        for (int a = 1; a < q.n_actions; ++a)
            if (row[a] > row[best]) best = a; // strict: keeps lowest index on ties
        pi.action_of[x] = best;
    }
    return pi;
}

double action_gap(const QTable& q, int x) {
    if (q.n_actions < 2) return std::numeric_limits<double>::infinity();
    auto row = q.row(x);
    int best = 0;
    for (int a = 1; a < q.n_actions; ++a)
        if (row[a] > row[best]) best = a;
    double second = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < q.n_actions; ++a)
        if (a != best && row[a] > second) second = row[a];
    return row[best] - second;
}

numvec action_gaps(const QTable& q) {
    numvec out(q.n_states);
    for (int x = 0; x < q.n_states; ++x) out[x] = action_gap(q, x);
    return out;
}

} // namespace gapcore
