#pragma once

#include "gapcore/bicycle.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gapcore {

/// The four grid operators compared on the bicycle: sample-based Q-value
/// interpolation (bellman), its consistent variant, and advantage /
/// persistent advantage learning on top of it.
enum class GridOperator { bellman, consistent, advantage_learning, persistent_al };

const char* to_string(GridOperator op);
GridOperator grid_operator_from_string(const std::string& name);

struct BicycleExperimentConfig {
    int nodes_per_dim = 6;
    int sweeps = 300;
    int checkpoint_every = 100;
    double eta = 0.1;      // averaged value iteration step
    double discount = 0.99;
    double alpha = 0.1;    // AL / PAL penalty
    int sample_count = 1;  // k; averaging across sweeps substitutes for k > 1
    int eval_episodes = 50;
    int max_episode_steps = 72000;
    uint64_t seed = 1;
    bool swap_tilt_bounds = false;
    bool record_trajectories = false;
    int trajectory_stride = 100; // subsampling for the trajectory CSV
    /// Overrides the preset grid entirely (per-dimension bounds and node
    /// counts); must have one entry per bicycle feature when set.
    std::optional<GridScheme> custom_grid;
};

/// Presets: "desk" (6^6 grid, 300 sweeps), "paper-8" and "paper-10" (1000
/// sweeps at the larger resolutions).
BicycleExperimentConfig bicycle_preset(const std::string& name);

struct BicycleCheckpoint {
    int sweep = 0;
    double fall_frequency = 0.0;
    double goal_frequency = 0.0;
    /// max over (node, action) of family backup minus Bellman (QVI) backup,
    /// both probed on the checkpoint table with shared draws; <= 0 whenever
    /// the optimality-preservation ordering holds.
    double ordering_excess = 0.0;
};

struct TrajectoryPoint {
    int episode = 0;
    int64_t step = 0;
    double x = 0.0, y = 0.0; // front wheel, goal at the origin
    double psi = 0.0, d = 0.0;
};

struct BicycleRunResult {
    GridOperator op = GridOperator::bellman;
    std::vector<BicycleCheckpoint> checkpoints;
    QTable q; // final node table
    std::vector<TrajectoryPoint> trajectories; // final checkpoint, if enabled
};

/// Runs averaged value iteration of the chosen operator on the bicycle grid,
/// pausing at every checkpoint for greedy-policy evaluation rollouts and the
/// operator-ordering probe. Rollout episodes are seeded by (seed,
/// checkpoint, episode) only, so different operators face identical episode
/// noise.
BicycleRunResult run_bicycle_experiment(const BicycleExperimentConfig& cfg, GridOperator op);

void write_frequency_csv(const std::string& path, const std::vector<BicycleCheckpoint>& cps);
void write_trajectory_csv(const std::string& path, const std::vector<TrajectoryPoint>& pts);

} // namespace gapcore
