#include "gapcore/bicycle_experiment.hpp"

#include "gapcore/io.hpp"
#include "gapcore/kernels.hpp"
#include "gapcore/parallel.hpp"

#include <atomic>
#include <fstream>
#include <stdexcept>

namespace gapcore {

const char* to_string(GridOperator op) {
    switch (op) {
    case GridOperator::bellman: return "bellman";
    case GridOperator::consistent: return "consistent";
    case GridOperator::advantage_learning: return "al";
    case GridOperator::persistent_al: return "pal";
    }
    return "?";
}

GridOperator grid_operator_from_string(const std::string& name) {
    if (name == "bellman") return GridOperator::bellman;
    if (name == "consistent") return GridOperator::consistent;
    if (name == "al" || name == "advantage_learning") return GridOperator::advantage_learning;
    if (name == "pal" || name == "persistent_al") return GridOperator::persistent_al;
    throw std::invalid_argument("unknown grid operator: " + name);
}

BicycleExperimentConfig bicycle_preset(const std::string& name) {
    BicycleExperimentConfig cfg;
    if (name == "desk") {
        cfg.nodes_per_dim = 6;
        cfg.sweeps = 300;
    } else if (name == "paper-8") {
        cfg.nodes_per_dim = 8;
        cfg.sweeps = 1000;
    } else if (name == "paper-10") {
        cfg.nodes_per_dim = 10;
        cfg.sweeps = 1000;
    } else {
        throw std::invalid_argument("unknown bicycle preset: " + name);
    }
    return cfg;
}

namespace {

QTable apply_grid_operator(GridOperator op, const GridScheme& grid, const QTable& q,
                           const SamplerHandle& sampler, double discount, double alpha,
                           int sweep) {
    switch (op) {
    case GridOperator::bellman: return qvi_backup(grid, q, sampler, discount, sweep);
    case GridOperator::consistent: return cqvi_backup(grid, q, sampler, discount, sweep);
    case GridOperator::advantage_learning:
        return qvi_al_backup(grid, q, sampler, discount, alpha, sweep);
    case GridOperator::persistent_al:
        return qvi_pal_backup(grid, q, sampler, discount, alpha, sweep);
    }
    throw std::logic_error("unreachable");
}

// Greedy action under Q-value interpolation; one weight computation serves
// all actions.
int greedy_interpolated_action(const GridScheme& grid, const QTable& qz,
                               std::span<const double> x, std::vector<WeightEntry>& wbuf,
                               numvec& qrow) {
    interpolation_weights(grid, x, wbuf);
    std::fill(qrow.begin(), qrow.end(), 0.0);
    const auto& k = kernels();
    for (const auto& e : wbuf)
        k.axpy_acc(e.weight, qz.row(static_cast<int>(e.node)).data(), qrow.data(),
                   qrow.size());
    int best = 0;
    for (int a = 1; a < static_cast<int>(qrow.size()); ++a)
        if (qrow[a] > qrow[best]) best = a;
    return best;
}

struct RolloutStats {
    double fall_frequency = 0.0;
    double goal_frequency = 0.0;
};

RolloutStats evaluate_policy(const BicycleExperimentConfig& cfg, const BicycleSim& sim,
                             const GridScheme& grid, const QTable& q, int checkpoint_index,
                             std::vector<TrajectoryPoint>* trajectories) {
    std::atomic<int> falls{0}, goals{0};
    // Episodes are fully independent; per-episode buckets keep the emitted
    // trajectory order deterministic under any thread partitioning.
    std::vector<std::vector<TrajectoryPoint>> buckets(
        trajectories ? cfg.eval_episodes : 0);
    parallel_for(
        cfg.eval_episodes,
        [&](int64_t begin, int64_t end) {
            std::vector<WeightEntry> wbuf;
            numvec qrow(BicycleSim::n_actions);
            numvec feat(BicycleSim::n_features);
            for (int64_t ep = begin; ep < end; ++ep) {
                std::vector<TrajectoryPoint>* local = trajectories ? &buckets[ep] : nullptr;
                Rng rng(derive_stream(cfg.seed,
                                      {0xe9u, static_cast<uint64_t>(checkpoint_index),
                                       static_cast<uint64_t>(ep)}));
                BicycleState s = sim.initial_state(rng);
                for (int64_t step = 0; step < cfg.max_episode_steps; ++step) {
                    sim.features(s, feat);
                    if (local && step % cfg.trajectory_stride == 0)
                        local->push_back({static_cast<int>(ep), step, s.xf, s.yf, feat[4],
                                          feat[5]});
                    int action = greedy_interpolated_action(grid, q, feat, wbuf, qrow);
                    BicycleOutcome out = sim.step(s, action, rng);
                    if (out.terminal()) {
                        if (out.fallen) falls.fetch_add(1);
                        if (out.goal) goals.fetch_add(1);
                        if (local) {
                            sim.features(s, feat);
                            local->push_back({static_cast<int>(ep), step + 1, s.xf, s.yf,
                                              feat[4], feat[5]});
                        }
                        break;
                    }
                }
            }
        },
        1);
    if (trajectories)
        for (auto& bucket : buckets)
            trajectories->insert(trajectories->end(), bucket.begin(), bucket.end());
    RolloutStats stats;
    stats.fall_frequency = static_cast<double>(falls.load()) / cfg.eval_episodes;
    stats.goal_frequency = static_cast<double>(goals.load()) / cfg.eval_episodes;
    return stats;
}

} // namespace

BicycleRunResult run_bicycle_experiment(const BicycleExperimentConfig& cfg, GridOperator op) {
    if (cfg.sweeps < 1 || cfg.checkpoint_every < 1 || cfg.eval_episodes < 1)
        throw std::invalid_argument("bicycle experiment config out of range");
    if (!(cfg.eta > 0.0 && cfg.eta <= 1.0))
        throw std::invalid_argument("eta must be in (0, 1]");

    BicycleSim sim;
    GridScheme grid = cfg.custom_grid ? *cfg.custom_grid
                                      : bicycle_grid(cfg.nodes_per_dim, cfg.swap_tilt_bounds);
    if (grid.dims != BicycleSim::n_features)
        throw std::invalid_argument("bicycle grid must cover all six features");
    SamplerHandle sampler = bicycle_sampler(sim, cfg.sample_count, cfg.seed);

    BicycleRunResult res;
    res.op = op;
    res.q = QTable(static_cast<int>(grid.node_count), BicycleSim::n_actions);
    const auto& k = kernels();
    QTable damped(res.q.n_states, res.q.n_actions);

    // Probe streams live far away from sweep indices so the ordering check
    // never aliases an update's draws.
    constexpr int kProbeBase = 1 << 28;

    for (int sweep = 0; sweep < cfg.sweeps; ++sweep) {
        QTable backed = apply_grid_operator(op, grid, res.q, sampler, cfg.discount,
                                            cfg.alpha, sweep);
        k.axpby(1.0 - cfg.eta, res.q.values.data(), cfg.eta, backed.values.data(),
                damped.values.data(), damped.values.size());
        std::swap(res.q.values, damped.values);

        int done = sweep + 1;
        if (done % cfg.checkpoint_every == 0 || done == cfg.sweeps) {
            int checkpoint_index = static_cast<int>(res.checkpoints.size());
            BicycleCheckpoint cp;
            cp.sweep = done;

            QTable family = apply_grid_operator(op, grid, res.q, sampler, cfg.discount,
                                                cfg.alpha, kProbeBase + done);
            QTable reference = qvi_backup(grid, res.q, sampler, cfg.discount,
                                          kProbeBase + done);
            double excess = -1e300;
            for (std::size_t i = 0; i < family.values.size(); ++i)
                excess = std::max(excess, family.values[i] - reference.values[i]);
            cp.ordering_excess = excess;

            bool last = done == cfg.sweeps;
            std::vector<TrajectoryPoint>* traj =
                cfg.record_trajectories && last ? &res.trajectories : nullptr;
            RolloutStats stats =
                evaluate_policy(cfg, sim, grid, res.q, checkpoint_index, traj);
            cp.fall_frequency = stats.fall_frequency;
            cp.goal_frequency = stats.goal_frequency;
            res.checkpoints.push_back(cp);
        }
    }
    return res;
}

void write_frequency_csv(const std::string& path, const std::vector<BicycleCheckpoint>& cps) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << "checkpoint,fall_frequency,goal_frequency\n";
    for (const auto& cp : cps)
        out << cp.sweep << "," << fmt_double(cp.fall_frequency) << ","
            << fmt_double(cp.goal_frequency) << "\n";
}

void write_trajectory_csv(const std::string& path, const std::vector<TrajectoryPoint>& pts) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << "episode,step,x_pos,y_pos,psi,d\n";
    for (const auto& p : pts)
        out << p.episode << "," << p.step << "," << fmt_double(p.x) << "," << fmt_double(p.y)
            << "," << fmt_double(p.psi) << "," << fmt_double(p.d) << "\n";
}

} // namespace gapcore
