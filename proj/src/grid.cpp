#include "gapcore/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace gapcore {

GridScheme::GridScheme(numvec lo, numvec up, indvec res)
    : dims(static_cast<int>(res.size())), lower(std::move(lo)), upper(std::move(up)),
      resolution(std::move(res)) {
    if (lower.size() != resolution.size() || upper.size() != resolution.size())
        throw std::invalid_argument("grid bounds and resolution sizes differ");
    if (dims < 1) throw std::invalid_argument("grid needs at least one dimension");
    if (dims > 30) throw std::invalid_argument("grid dimension too large");
    for (int d = 0; d < dims; ++d) {
        if (!(lower[d] < upper[d]))
            throw std::invalid_argument("grid lower bound must be below upper bound");
        if (resolution[d] < 2)
            throw std::invalid_argument("grid needs at least 2 nodes per dimension");
    }
    strides.assign(dims, 1);
    for (int d = dims - 2; d >= 0; --d) strides[d] = strides[d + 1] * resolution[d + 1];
    node_count = strides[0] * resolution[0];
}

void GridScheme::node_point(int64_t idx, std::span<double> out) const {
    for (int d = 0; d < dims; ++d) {
        int64_t i = (idx / strides[d]) % resolution[d];
        out[d] = lower[d] + static_cast<double>(i) * step(d);
    }
}

numvec GridScheme::node_point(int64_t idx) const {
    numvec out(dims);
    node_point(idx, out);
    return out;
}

int64_t GridScheme::node_index(std::span<const int> multi) const {
    int64_t idx = 0;
    for (int d = 0; d < dims; ++d) idx += strides[d] * multi[d];
    return idx;
}

void interpolation_weights(const GridScheme& grid, std::span<const double> x,
                           std::vector<WeightEntry>& out) {
    out.clear();
    const int dims = grid.dims;
    // Per-dimension cell base index and fractional offset.
    int base[32];
    double frac[32];
    for (int d = 0; d < dims; ++d) {
        double lo = grid.lower[d];
        double hi = grid.upper[d];
        double xd = x[d];
        if (xd < lo) xd = lo;
        if (xd > hi) xd = hi;
        double h = grid.step(d);
        int i = static_cast<int>(std::floor((xd - lo) / h));
        if (i > grid.resolution[d] - 2) i = grid.resolution[d] - 2;
        if (i < 0) i = 0;
        // Snapping against the node coordinates (computed the same way as
        // node_point) makes weights exactly {0, 1} for on-node queries.
        double cell_lo = lo + static_cast<double>(i) * h;
        double cell_hi = lo + static_cast<double>(i + 1) * h;
        double t;
        if (xd == cell_lo) t = 0.0;
        else if (xd == cell_hi) t = 1.0;
        else {
            t = (xd - cell_lo) / (cell_hi - cell_lo);
            if (t < 0.0) t = 0.0;
            if (t > 1.0) t = 1.0;
        }
        base[d] = i;
        frac[d] = t;
    }
    const int corners = 1 << dims;
    for (int c = 0; c < corners; ++c) {
        double w = 1.0;
        int64_t idx = 0;
        for (int d = 0; d < dims; ++d) {
            int bit = (c >> d) & 1;
            w *= bit ? frac[d] : 1.0 - frac[d];
            idx += grid.strides[d] * (base[d] + bit);
        }
        if (w != 0.0) out.push_back({idx, w});
    }
}

std::vector<WeightEntry> interpolation_weights(const GridScheme& grid,
                                               std::span<const double> x) {
    std::vector<WeightEntry> out;
    interpolation_weights(grid, x, out);
    return out;
}

double q_interpolate(const GridScheme& grid, const QTable& qz, std::span<const double> x,
                     int action) {
    if (qz.n_states != grid.node_count)
        throw std::invalid_argument("Q-table node count does not match the grid");
    std::vector<WeightEntry> w;
    interpolation_weights(grid, x, w);
    double s = 0.0;
    for (const auto& e : w) s += e.weight * qz(static_cast<int>(e.node), action);
    return s;
}

} // namespace gapcore
