#include "gapcore/verify.hpp"

#include "gapcore/kernels.hpp"
#include "gapcore/parallel.hpp"
#include "gapcore/rng.hpp"
#include "gapcore/solver.hpp"

#include <cmath>
#include <ostream>

namespace gapcore {

std::vector<OperatorSpec> family_operator_specs() {
    std::vector<OperatorSpec> specs;
    specs.push_back({OperatorKind::consistent, 0.0, 1, 0});
    for (double alpha : {0.1, 0.5, 0.9}) {
        specs.push_back({OperatorKind::advantage_learning, alpha, 1, 0});
        specs.push_back({OperatorKind::persistent_al, alpha, 1, 0});
        specs.push_back({OperatorKind::lazy, alpha, 1, 0});
    }
    specs.push_back({OperatorKind::cqvi, 0.0, 1, 0});
    return specs;
}

RandomMdpParams corpus_params(const VerifyOptions& opts, int index) {
    static const double gammas[] = {0.5, 0.9, 0.95};
    static const double biases[] = {0.0, 0.3, 0.6};
    RandomMdpParams p;
    p.n_states = 2 + index % 5;  // 2..6
    p.n_actions = 2 + index % 3; // 2..4
    p.gamma = gammas[index % 3];
    p.self_loop_bias = biases[(index / 3) % 3];
    p.branching = 1 + index % p.n_states;
    p.seed = opts.seed + static_cast<uint64_t>(index);
    p.reward_min = -1.0;
    p.reward_max = 1.0;
    return p;
}

namespace {

std::string spec_label(const OperatorSpec& spec) {
    std::string label = to_string(spec.kind);
    switch (spec.kind) {
    case OperatorKind::advantage_learning:
    case OperatorKind::persistent_al:
    case OperatorKind::lazy: {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "@%.1f", spec.alpha);
        label += buf;
        break;
    }
    default:
        break;
    }
    return label;
}

ReportRow summary_row(const std::string& check, uint64_t mdp_seed, const CheckReport& rep) {
    ReportRow row;
    row.check = check;
    row.mdp_seed = mdp_seed;
    row.pass = rep.passed();
    row.observed = rep.worst_excess;
    row.expected = 0.0;
    if (!rep.failures.empty()) {
        row.trial = rep.failures.front().trial;
        row.state = rep.failures.front().state;
        row.action = rep.failures.front().action;
        row.observed = rep.failures.front().observed;
        row.expected = rep.failures.front().expected;
    }
    return row;
}

// Per-instance slice of the battery; instances run independently and merge
// by index.
std::vector<ReportRow> run_instance(const VerifyOptions& opts, int index) {
    std::vector<ReportRow> rows;
    RandomMdpParams params = corpus_params(opts, index);
    FiniteMdp mdp = make_random_mdp(params);
    GroundTruth gt = exhaustive_policy_search(mdp);

    // Both operator conditions at 1e-12, fresh random tables per operator.
    for (const auto& spec : family_operator_specs()) {
        ReportRow row;
        row.check = "operator_conditions/" + spec_label(spec);
        row.mdp_seed = params.seed;
        row.pass = true;
        row.expected = 0.0;
        Rng rng(derive_stream(params.seed, {0x7eu, static_cast<uint64_t>(index)}));
        for (int t = 0; t < opts.condition_tables; ++t) {
            QTable q(mdp.n_states, mdp.n_actions);
            for (double& v : q.values) v = rng.uniform(-10.0, 10.0);
            OperatorConditionsReport rep = operator_conditions_check(mdp, q, spec);
            double worst = std::max(rep.worst_cond1, rep.worst_cond2);
            row.observed = std::max(row.observed, worst);
            if (!rep.all_ok()) {
                row.pass = false;
                row.trial = t;
            }
        }
        rows.push_back(row);
    }

    // Optimality preservation + the iterate bound, then gap increase, for
    // Bellman and every family member.
    std::vector<OperatorSpec> specs = family_operator_specs();
    specs.insert(specs.begin(), {OperatorKind::bellman, 0.0, 1, 0});
    for (const auto& spec : specs) {
        CheckReport opt = check_optimality_preserving(mdp, spec, opts.trials, opts.sweeps,
                                                      params.seed, &gt);
        rows.push_back(summary_row("optimality/" + spec_label(spec), params.seed, opt));

        ReportRow bound;
        bound.check = "iterate_bound/" + spec_label(spec);
        bound.mdp_seed = params.seed;
        bound.observed = opt.bound_excess;
        bound.expected = 0.0;
        bound.pass = opt.bound_excess <= 0.0;
        rows.push_back(bound);

        GapReport gap = check_gap_increasing(mdp, spec, opts.trials, opts.sweeps,
                                             params.seed, &gt);
        rows.push_back(summary_row("gap_increase/" + spec_label(spec), params.seed, gap));
    }

    // Contraction for the two contractive kinds.
    for (OperatorKind kind : {OperatorKind::bellman, OperatorKind::consistent}) {
        OperatorSpec spec{kind, 0.0, 1, 0};
        double ratio = check_contraction(mdp, spec, opts.contraction_pairs, params.seed);
        ReportRow row;
        row.check = std::string("contraction/") + to_string(kind);
        row.mdp_seed = params.seed;
        row.observed = ratio;
        row.expected = mdp.discount + 1e-9;
        row.pass = ratio <= row.expected;
        rows.push_back(row);
    }

    if (opts.inject_broken) {
        // T'Q = TQ + 0.1 violates condition 1 and shifts the fixed point by
        // 0.1/(1-gamma); the optimality check must flag it at every state.
        BackupFn broken = [&mdp](const QTable& q, QTable& out, int) {
            bellman_backup(mdp, q, out);
            for (double& v : out.values) v += 0.1;
        };
        SolveResult res = value_iteration(broken, QTable(mdp.n_states, mdp.n_actions),
                                          opts.sweeps, 1e-300);
        numvec v = state_values(res.q);
        double worst = 0.0;
        for (int x = 0; x < mdp.n_states; ++x)
            worst = std::max(worst, std::fabs(v[x] - gt.v_star[x]));
        ReportRow row;
        row.check = "optimality/broken_overshoot";
        row.mdp_seed = params.seed;
        row.observed = worst;
        row.expected = 0.0;
        row.pass = worst <= 1e-6;
        rows.push_back(row);
    }

    return rows;
}

void cake_closed_form_rows(std::vector<ReportRow>& rows) {
    const double gammas[] = {0.1, 0.5, 0.9, 0.99};
    const double epsilons[] = {0.01, 0.1, 1.0};
    for (double gamma : gammas) {
        for (double eps : epsilons) {
            FiniteMdp cake = make_cake_mdp({gamma, eps});
            auto run = [&](OperatorKind kind) {
                return value_iteration(make_tabular_backup(cake, {kind, 0.0, 1, 0}),
                                       QTable(2, 2), 200000, 1e-13)
                    .q;
            };
            QTable qb = run(OperatorKind::bellman);
            QTable qc = run(OperatorKind::consistent);

            double worst = 0.0;
            worst = std::max(worst, std::fabs(qb(0, 0) - (-eps)));
            worst = std::max(worst, std::fabs(qb(0, 1) - 0.0));
            worst = std::max(worst, std::fabs(action_gap(qb, 0) - eps));
            worst = std::max(worst, std::fabs(qb(1, 0) - (-2.0 * (1.0 + eps) / gamma)));
            double cons_fix = -eps / (1.0 - gamma / 2.0);
            worst = std::max(worst, std::fabs(qc(0, 0) - cons_fix));
            worst = std::max(worst, std::fabs(action_gap(qc, 0) - (-cons_fix)));
            // Strict gap increase by eps * (gamma/2) / (1 - gamma/2).
            double increase = eps * (gamma / 2.0) / (1.0 - gamma / 2.0);
            worst = std::max(worst, std::fabs(action_gap(qc, 0) - eps - increase));

            ReportRow row;
            char buf[64];
            std::snprintf(buf, sizeof(buf), "cake_closed_forms/g%.2f_e%.2f", gamma, eps);
            row.check = buf;
            row.observed = worst;
            row.expected = 1e-9;
            row.pass = worst <= 1e-9;
            rows.push_back(row);
        }
    }
}

void lazy_fixed_point_rows(std::vector<ReportRow>& rows) {
    FiniteMdp cake = make_cake_mdp({0.5, 0.1});
    GroundTruth gt = exhaustive_policy_search(cake);
    const double alpha = 0.5;

    QTable q2 = gt.q_star;
    q2(0, 0) -= 0.05; // still within both lazy guards

    double fix1 = kernels().max_abs_diff(lazy_backup(cake, gt.q_star, alpha).values.data(),
                                         gt.q_star.values.data(), 4);
    double fix2 = kernels().max_abs_diff(lazy_backup(cake, q2, alpha).values.data(),
                                         q2.values.data(), 4);
    double distinct = kernels().max_abs_diff(gt.q_star.values.data(), q2.values.data(), 4);

    ReportRow row;
    row.check = "lazy_multiple_fixed_points";
    row.observed = std::max(fix1, fix2);
    row.expected = 1e-12;
    row.pass = fix1 <= 1e-12 && fix2 <= 1e-12 && distinct > 1e-3;
    rows.push_back(row);
}

void divergence_rows(std::vector<ReportRow>& rows) {
    const double v_star = divergence_demo_v_star();

    {
        SolveResult res = divergence_demo(0.0, 0.1);
        double limit = res.trace.values.back()[0];
        ReportRow row;
        row.check = "divergence/overshoot";
        row.observed = limit;
        row.expected = v_star + 0.1 / (1.0 - 0.5);
        row.pass = std::fabs(limit - row.expected) <= 1e-8;
        rows.push_back(row);
    }
    {
        SolveResult res = divergence_demo(1.5, 0.0);
        double min_err = 1e300;
        for (int s = 49; s < res.trace.sweeps; ++s)
            min_err = std::min(min_err, std::fabs(res.trace.values[s][0] - v_star));
        ReportRow row;
        row.check = "divergence/alpha_1.5";
        row.observed = min_err;
        row.expected = 0.1;
        row.pass = res.trace.sweeps >= 50 && min_err > 0.1;
        rows.push_back(row);
    }
    {
        SolveResult res = divergence_demo(0.5, 0.0);
        double err = std::fabs(res.trace.values.back()[0] - v_star);
        ReportRow row;
        row.check = "divergence/compliant_control";
        row.observed = err;
        row.expected = 1e-8;
        row.pass = err <= 1e-8;
        rows.push_back(row);
    }
}

} // namespace

VerifyOutcome run_verify_battery(const VerifyOptions& opts, std::ostream* log) {
    VerifyOutcome outcome;

    std::vector<std::vector<ReportRow>> per_instance(opts.corpus_size);
    parallel_for(
        opts.corpus_size,
        [&](int64_t begin, int64_t end) {
            for (int64_t i = begin; i < end; ++i)
                per_instance[i] = run_instance(opts, static_cast<int>(i));
        },
        1);
    for (auto& rows : per_instance)
        outcome.rows.insert(outcome.rows.end(), rows.begin(), rows.end());

    cake_closed_form_rows(outcome.rows);
    lazy_fixed_point_rows(outcome.rows);
    divergence_rows(outcome.rows);

    for (const auto& row : outcome.rows) {
        ++outcome.checks;
        if (!row.pass) {
            ++outcome.failures;
            if (log)
                *log << "FAIL " << row.check << " (mdp_seed=" << row.mdp_seed
                     << ", observed=" << row.observed << ", expected=" << row.expected
                     << ")\n";
        }
    }
    if (log)
        *log << "verify: " << outcome.checks - outcome.failures << "/" << outcome.checks
             << " checks passed\n";
    return outcome;
}

} // namespace gapcore
