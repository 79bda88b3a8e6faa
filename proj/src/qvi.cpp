#include "gapcore/qvi.hpp"

#include "gapcore/kernels.hpp"
#include "gapcore/parallel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gapcore {

namespace {

struct TermRequest {
    bool consistent = false;
    bool repeat = false;
};

// Evaluates the sample-based terms for every (node, action) pair on one
// shared draw per cell. qvi_out is always produced; the optional terms reuse
// the same samples and interpolated rows.
void qvi_terms(const GridScheme& grid, const QTable& qz, const SamplerHandle& sampler,
               double discount, int sweep, TermRequest want, QTable& qvi_out,
               QTable* cons_out, QTable* rep_out) {
    if (qz.n_states != grid.node_count)
        throw std::invalid_argument("Q-table node count does not match the grid");
    if (sampler.sample_count < 1) throw std::invalid_argument("sample_count must be positive");

    const int na = qz.n_actions;
    const int k = sampler.sample_count;
    qvi_out = QTable(qz.n_states, na);
    if (want.consistent) *cons_out = QTable(qz.n_states, na);
    if (want.repeat) *rep_out = QTable(qz.n_states, na);

    const auto& kern = kernels();
    int64_t pairs = static_cast<int64_t>(qz.n_states) * na;
    parallel_for(pairs, [&](int64_t begin, int64_t end) {
        numvec zpt(grid.dims), next(grid.dims), qrow(na);
        std::vector<WeightEntry> weights;
        for (int64_t i = begin; i < end; ++i) {
            int z = static_cast<int>(i / na);
            int a = static_cast<int>(i % na);
            grid.node_point(z, zpt);
            Rng rng(derive_stream(sampler.seed,
                                  {static_cast<uint64_t>(z), static_cast<uint64_t>(a),
                                   static_cast<uint64_t>(sweep)}));
            double reward_sum = 0.0;
            double cont_qvi = 0.0, cont_cons = 0.0, cont_rep = 0.0;
            const double qza = qz(z, a);
            for (int draw = 0; draw < k; ++draw) {
                double reward = 0.0;
                bool terminal = false;
                sampler.step(zpt, a, draw, rng, next, reward, terminal);
                reward_sum += reward;
                if (terminal) continue; // terminal draws contribute reward only
                interpolation_weights(grid, next, weights);
                std::fill(qrow.begin(), qrow.end(), 0.0);
                double wz = 0.0;
                for (const auto& e : weights) {
                    kern.axpy_acc(e.weight, qz.row(static_cast<int>(e.node)).data(),
                                  qrow.data(), na);
                    if (e.node == z) wz = e.weight;
                }
                cont_qvi += kern.max_value(qrow.data(), na);
                if (want.consistent) {
                    double best = -std::numeric_limits<double>::infinity();
                    for (int b = 0; b < na; ++b) {
                        double cand = qrow[b] - wz * (qz(z, b) - qza);
                        if (cand > best) best = cand;
                    }
                    cont_cons += best;
                }
                if (want.repeat) cont_rep += qrow[a];
            }
            double rbar = reward_sum / k;
            qvi_out(z, a) = rbar + discount * (cont_qvi / k);
            if (want.consistent) (*cons_out)(z, a) = rbar + discount * (cont_cons / k);
            if (want.repeat) (*rep_out)(z, a) = rbar + discount * (cont_rep / k);
        }
    });
}

} // namespace

QTable qvi_backup(const GridScheme& grid, const QTable& qz, const SamplerHandle& sampler,
                  double discount, int sweep) {
    QTable out;
    qvi_terms(grid, qz, sampler, discount, sweep, {}, out, nullptr, nullptr);
    return out;
}

QTable qvi_consistent_term(const GridScheme& grid, const QTable& qz,
                           const SamplerHandle& sampler, double discount, int sweep) {
    QTable qvi, cons;
    qvi_terms(grid, qz, sampler, discount, sweep, {.consistent = true}, qvi, &cons, nullptr);
    return cons;
}

QTable cqvi_backup(const GridScheme& grid, const QTable& qz, const SamplerHandle& sampler,
                   double discount, int sweep) {
    QTable qvi, cons;
    qvi_terms(grid, qz, sampler, discount, sweep, {.consistent = true}, qvi, &cons, nullptr);
    kernels().elem_min(qvi.values.data(), cons.values.data(), qvi.values.data(),
                       qvi.values.size());
    return qvi;
}

QTable qvi_al_backup(const GridScheme& grid, const QTable& qz, const SamplerHandle& sampler,
                     double discount, double alpha, int sweep) {
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw std::invalid_argument("alpha must be in [0, 1)");
    QTable out;
    qvi_terms(grid, qz, sampler, discount, sweep, {}, out, nullptr, nullptr);
    numvec v = state_values(qz);
    numvec vexp(qz.values.size());
    for (int z = 0; z < qz.n_states; ++z)
        std::fill_n(vexp.data() + static_cast<std::size_t>(z) * qz.n_actions, qz.n_actions,
                    v[z]);
    kernels().gap_penalty(out.values.data(), qz.values.data(), vexp.data(), alpha,
                          out.values.data(), out.values.size());
    return out;
}

QTable qvi_pal_backup(const GridScheme& grid, const QTable& qz,
                      const SamplerHandle& sampler, double discount, double alpha,
                      int sweep) {
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw std::invalid_argument("alpha must be in [0, 1)");
    QTable qvi, rep;
    qvi_terms(grid, qz, sampler, discount, sweep, {.repeat = true}, qvi, nullptr, &rep);
    numvec v = state_values(qz);
    numvec vexp(qz.values.size());
    for (int z = 0; z < qz.n_states; ++z)
        std::fill_n(vexp.data() + static_cast<std::size_t>(z) * qz.n_actions, qz.n_actions,
                    v[z]);
    const auto& kern = kernels();
    kern.gap_penalty(qvi.values.data(), qz.values.data(), vexp.data(), alpha,
                     qvi.values.data(), qvi.values.size());
    kern.elem_max(qvi.values.data(), rep.values.data(), qvi.values.data(),
                  qvi.values.size());
    return qvi;
}

FiniteMdp induced_mdp(const GridScheme& grid, int n_actions, double discount,
                      const std::function<void(std::span<const double> x, int action,
                                               std::span<double> next, double& reward)>& step) {
    if (grid.node_count > 1024)
        throw std::invalid_argument(
            "grid too large for a dense induced MDP (limit 1024 nodes)");
    FiniteMdp mdp(static_cast<int>(grid.node_count), n_actions, discount);
    numvec zpt(grid.dims), next(grid.dims);
    std::vector<WeightEntry> weights;
    for (int z = 0; z < mdp.n_states; ++z) {
        grid.node_point(z, zpt);
        for (int a = 0; a < n_actions; ++a) {
            double reward = 0.0;
            step(zpt, a, next, reward);
            mdp.r(z, a) = reward;
            interpolation_weights(grid, next, weights);
            for (const auto& e : weights) mdp.p(z, a, static_cast<int>(e.node)) += e.weight;
        }
    }
    return mdp;
}

QTable aggregated_backup(const FiniteMdp& node_mdp, const QTable& qz, bool consistent) {
    return consistent ? consistent_backup(node_mdp, qz) : bellman_backup(node_mdp, qz);
}

} // namespace gapcore
