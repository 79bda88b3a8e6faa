#pragma once

#include "gapcore/mdp.hpp"
#include "gapcore/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace gapcore {

/// Uniform multidimensional grid used as an aggregation scheme. Aggregate
/// states are the grid nodes; the state-to-aggregate mapping is multilinear
/// interpolation over the enclosing cell, and the aggregate-to-state mapping
/// is the identity on nodes.
///
/// Node indices are row-major over the per-dimension node indices, with the
/// last dimension fastest.
struct GridScheme {
    int dims = 0;
    numvec lower;
    numvec upper;
    indvec resolution; // nodes per dimension, >= 2 each
    int64_t node_count = 0;
    std::vector<int64_t> strides;

    GridScheme() = default;
    GridScheme(numvec lower, numvec upper, indvec resolution);

    double step(int d) const { return (upper[d] - lower[d]) / (resolution[d] - 1); }

    /// Coordinates of node `idx`, written to `out` (size dims).
    void node_point(int64_t idx, std::span<double> out) const;
    numvec node_point(int64_t idx) const;

    int64_t node_index(std::span<const int> multi) const;
};

struct WeightEntry {
    int64_t node;
    double weight;
};

/// Multilinear interpolation weights of `x` over grid nodes. The point is
/// clamped to the grid bounds per dimension first. Weights are nonnegative,
/// sum to 1 and touch at most 2^dims nodes; corners whose weight is exactly
/// zero (the point lies on a cell face) are dropped. `out` is cleared and
/// reused so hot loops do not reallocate.
void interpolation_weights(const GridScheme& grid, std::span<const double> x,
                           std::vector<WeightEntry>& out);
std::vector<WeightEntry> interpolation_weights(const GridScheme& grid,
                                               std::span<const double> x);

/// Q-value interpolation: E_{z ~ A(.|x)} Q(z, a).
double q_interpolate(const GridScheme& grid, const QTable& qz, std::span<const double> x,
                     int action);

} // namespace gapcore
