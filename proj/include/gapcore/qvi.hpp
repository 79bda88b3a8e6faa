#pragma once

#include "gapcore/grid.hpp"
#include "gapcore/operators.hpp"
#include "gapcore/rng.hpp"

#include <functional>

namespace gapcore {

/// Draws next states for a (point, action) pair. `draw` is the sample index
/// within the per-cell batch; deterministic samplers key off it while
/// stochastic ones consume `rng`. The rng handed in is derived from
/// (seed, node, action, sweep), so results are reproducible bit-for-bit no
/// matter how the nodes are partitioned across threads.
struct SamplerHandle {
    using StepFn = std::function<void(std::span<const double> x, int action, int draw,
                                      Rng& rng, std::span<double> next, double& reward,
                                      bool& terminal)>;

    StepFn step;
    int sample_count = 1;
    uint64_t seed = 0;
};

/// Sample-based Q-value interpolation Bellman backup:
///   out(z,a) = mean reward + discount * (1/k) sum_i max_b Qint(x'_i, b),
/// where Qint is q_interpolate and terminal draws contribute no
/// continuation value.
QTable qvi_backup(const GridScheme& grid, const QTable& qz, const SamplerHandle& sampler,
                  double discount, int sweep = 0);

/// The locally consistent companion term: the inner max runs over
///   Qint(x'_i, b) - A(z|x'_i) * (Qz(z,b) - Qz(z,a)).
/// Not optimality-preserving on its own; used as one operand of cqvi_backup.
QTable qvi_consistent_term(const GridScheme& grid, const QTable& qz,
                           const SamplerHandle& sampler, double discount, int sweep = 0);

/// Consistent Q-value interpolation backup: the elementwise min of
/// qvi_backup and qvi_consistent_term. Both operands are evaluated on the
/// same draws (streams depend only on (seed, z, a, sweep)), so the min never
/// compares two different noise realizations.
QTable cqvi_backup(const GridScheme& grid, const QTable& qz, const SamplerHandle& sampler,
                   double discount, int sweep = 0);

/// Advantage-learning on the grid: qvi_backup minus alpha * [V(z) - Qz(z,a)].
QTable qvi_al_backup(const GridScheme& grid, const QTable& qz, const SamplerHandle& sampler,
                     double discount, double alpha, int sweep = 0);

/// Persistent advantage learning on the grid: elementwise max of
/// qvi_al_backup and the repeat-action backup, which replaces the inner max
/// with Qint(x'_i, a).
QTable qvi_pal_backup(const GridScheme& grid, const QTable& qz,
                      const SamplerHandle& sampler, double discount, double alpha,
                      int sweep = 0);

/// Builds the induced MDP M' over grid nodes for deterministic dynamics:
/// P'(z''|z,a) are the interpolation weights of the successor point and
/// R'(z,a) the observed reward.
FiniteMdp induced_mdp(const GridScheme& grid, int n_actions, double discount,
                      const std::function<void(std::span<const double> x, int action,
                                               std::span<double> next, double& reward)>& step);

/// Aggregation Bellman operator over a node MDP: the plain tabular backup,
/// or the consistent one when `consistent` is set.
QTable aggregated_backup(const FiniteMdp& node_mdp, const QTable& qz, bool consistent);

} // namespace gapcore
