#include "gapcore/solver.hpp"

#include "gapcore/kernels.hpp"
#include "gapcore/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace gapcore {

namespace {

indvec resolve_traced_states(int n_states, const TraceOptions& opts) {
    if (!opts.record_values) return {};
    if (!opts.state_subset.empty()) return opts.state_subset;
    if (n_states > kFullTraceStateLimit) return {};
    indvec all(n_states);
    for (int x = 0; x < n_states; ++x) all[x] = x;
    return all;
}

void record_sweep(IterationTrace& trace, const QTable& q) {
    double sup = 0.0;
    for (int x = 0; x < q.n_states; ++x)
        sup = std::max(sup, std::fabs(kernels().max_value(q.row(x).data(), q.n_actions)));
    trace.value_sup.push_back(sup);
    if (trace.traced_states.empty()) return;
    numvec vals(trace.traced_states.size());
    numvec gaps(trace.traced_states.size());
    for (std::size_t i = 0; i < trace.traced_states.size(); ++i) {
        int x = trace.traced_states[i];
        vals[i] = kernels().max_value(q.row(x).data(), q.n_actions);
        gaps[i] = action_gap(q, x);
    }
    trace.values.push_back(std::move(vals));
    trace.gaps.push_back(std::move(gaps));
}

void check_finite(const QTable& q, int sweep) {
    for (int x = 0; x < q.n_states; ++x)
        for (int a = 0; a < q.n_actions; ++a)
            if (!std::isfinite(q(x, a))) {
                std::ostringstream msg;
                msg << "non-finite value at sweep " << sweep << ", state " << x
                    << ", action " << a;
                throw numerical_error(msg.str(), sweep, x, a);
            }
}

SolveResult iterate(const BackupFn& backup, QTable q0, double eta, int max_sweeps,
                    double tol, const TraceOptions& opts) {
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
    if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must be in (0, 1]");
    if (max_sweeps < 1) throw std::invalid_argument("max_sweeps must be positive");
    auto start = std::chrono::steady_clock::now();

    const auto& k = kernels();
    SolveResult res;
    res.trace.traced_states = resolve_traced_states(q0.n_states, opts);
    QTable q = std::move(q0);
    QTable scratch(q.n_states, q.n_actions);
    QTable next(q.n_states, q.n_actions);

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        backup(q, scratch, sweep);
        if (eta == 1.0) {
            next.values = scratch.values;
        } else {
            k.axpby(1.0 - eta, q.values.data(), eta, scratch.values.data(),
                    next.values.data(), next.values.size());
        }
        double delta = k.max_abs_diff(next.values.data(), q.values.data(),
                                      next.values.size());
        std::swap(q.values, next.values);
        res.trace.sweeps = sweep + 1;
        res.trace.supnorm_delta.push_back(delta);
        check_finite(q, sweep + 1);
        record_sweep(res.trace, q);
        if (delta <= tol) break;
    }

    res.q = std::move(q);
    res.trace.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

} // namespace

double IterationTrace::mean_gap(int sweep, double floor) const {
    if (sweep < 0 || sweep >= static_cast<int>(gaps.size())) return 0.0;
    double sum = 0.0;
    int count = 0;
    for (double g : gaps[sweep]) {
        if (!std::isfinite(g) || g <= floor) continue;
        sum += g;
        ++count;
    }
    return count == 0 ? 0.0 : sum / count;
}

double IterationTrace::min_gap(int sweep, double floor) const {
    if (sweep < 0 || sweep >= static_cast<int>(gaps.size())) return 0.0;
    double m = std::numeric_limits<double>::infinity();
    for (double g : gaps[sweep])
        if (std::isfinite(g) && g > floor && g < m) m = g;
    return std::isfinite(m) ? m : 0.0;
}

SolveResult value_iteration(const BackupFn& backup, QTable q0, int max_sweeps, double tol,
                            const TraceOptions& opts) {
    return iterate(backup, std::move(q0), 1.0, max_sweeps, tol, opts);
}

SolveResult averaged_value_iteration(const BackupFn& backup, QTable q0, double eta,
                                     int max_sweeps, double tol, const TraceOptions& opts) {
    return iterate(backup, std::move(q0), eta, max_sweeps, tol, opts);
}

BackupFn make_tabular_backup(const FiniteMdp& mdp, const OperatorSpec& spec) {
    validate_spec(spec);
    return [&mdp, spec](const QTable& q, QTable& out, int) {
        tabular_backup(mdp, q, spec, out);
    };
}

double value_bound_excess(const IterationTrace& trace, double v0_sup, double r_sup,
                          double discount) {
    double bound = (2.0 * v0_sup + r_sup) / (1.0 - discount);
    double worst = -std::numeric_limits<double>::infinity();
    for (double sup : trace.value_sup) worst = std::max(worst, sup - bound);
    return worst;
}

const char* to_string(UpdateRule rule) {
    switch (rule) {
    case UpdateRule::bellman: return "bellman";
    case UpdateRule::advantage_learning: return "al";
    case UpdateRule::persistent_al: return "pal";
    }
    return "?";
}

UpdateRule update_rule_from_string(const std::string& name) {
    if (name == "bellman") return UpdateRule::bellman;
    if (name == "al" || name == "advantage_learning") return UpdateRule::advantage_learning;
    if (name == "pal" || name == "persistent_al") return UpdateRule::persistent_al;
    throw std::invalid_argument("unknown update rule: " + name);
}

SolveResult q_learning(const FiniteMdp& mdp, const LearningConfig& cfg) {
    if (!(cfg.step_size > 0.0 && cfg.step_size <= 1.0))
        throw std::invalid_argument("step_size must be in (0, 1]");
    if (!(cfg.alpha >= 0.0 && cfg.alpha < 1.0))
        throw std::invalid_argument("alpha must be in [0, 1)");
    if (!(cfg.exploration >= 0.0 && cfg.exploration <= 1.0))
        throw std::invalid_argument("exploration must be in [0, 1]");
    if (cfg.episodes < 1 || cfg.max_steps < 1)
        throw std::invalid_argument("episodes and max_steps must be positive");

    auto start = std::chrono::steady_clock::now();
    Rng rng(derive_stream(cfg.seed, {0x71u}));

    SolveResult res;
    res.q = QTable(mdp.n_states, mdp.n_actions);
    QTable& q = res.q;
    res.trace.traced_states = resolve_traced_states(mdp.n_states, {});
    std::vector<int64_t> visits(q.values.size(), 0);

    auto greedy_at = [&](int x) {
        auto row = q.row(x);
        int best = 0;
        for (int a = 1; a < mdp.n_actions; ++a)
            if (row[a] > row[best]) best = a;
        return best;
    };
    auto sample_next = [&](int x, int a) {
        double u = rng.next_double();
        double acc = 0.0;
        for (int y = 0; y < mdp.n_states; ++y) {
            acc += mdp.p(x, a, y);
            if (u < acc) return y;
        }
        return mdp.n_states - 1;
    };

    for (int ep = 0; ep < cfg.episodes; ++ep) {
        int x = rng.uniform_int(mdp.n_states);
        double ep_return = 0.0;
        double ep_discount = 1.0;
        double max_update = 0.0;
        for (int step = 0; step < cfg.max_steps; ++step) {
            int a = rng.next_double() < cfg.exploration ? rng.uniform_int(mdp.n_actions)
                                                        : greedy_at(x);
            double reward = mdp.r(x, a);
            int y = sample_next(x, a);
            ep_return += ep_discount * reward;
            ep_discount *= mdp.discount;

            // Plain FiniteMdp episodes have no terminal transitions; the
            // rules below keep the terminal convention (V(x') = 0,
            // Q(x',a) = 0) for domains that signal one.
            double vx = q.row(x)[greedy_at(x)];
            double vy = q.row(y)[greedy_at(y)];
            double delta = reward + mdp.discount * vy - q(x, a);
            double update = delta;
            if (cfg.rule == UpdateRule::advantage_learning) {
                update = delta - cfg.alpha * (vx - q(x, a));
            } else if (cfg.rule == UpdateRule::persistent_al) {
                double al = delta - cfg.alpha * (vx - q(x, a));
                double persist = delta - cfg.alpha * (vy - q(y, a));
                update = al > persist ? al : persist;
            }
            std::size_t cell = static_cast<std::size_t>(x) * mdp.n_actions + a;
            double step_size = cfg.step_size;
            if (cfg.step_decay_tau > 0.0)
                step_size = cfg.step_size * cfg.step_decay_tau /
                            (cfg.step_decay_tau + static_cast<double>(visits[cell]));
            ++visits[cell];
            q(x, a) += step_size * update;
            max_update = std::max(max_update, std::fabs(step_size * update));
            x = y;
        }
        res.trace.sweeps = ep + 1;
        res.trace.supnorm_delta.push_back(max_update);
        res.trace.episode_return.push_back(ep_return);
        record_sweep(res.trace, q);
    }

    res.trace.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return res;
}

} // namespace gapcore
