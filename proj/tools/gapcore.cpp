#include "gapcore/bicycle_experiment.hpp"
#include "gapcore/domains.hpp"
#include "gapcore/io.hpp"
#include "gapcore/parallel.hpp"
#include "gapcore/solver.hpp"
#include "gapcore/types.hpp"
#include "gapcore/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitPropertyFailure = 3;

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    return json::parse(in);
}

// Flags win over config-file values; absent entries keep their defaults.
template <typename T>
void fetch(const json& obj, const char* key, T& into) {
    if (obj.contains(key)) into = obj.at(key).get<T>();
}

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    uint64_t seed = 1;
    int threads = 0;
    bool out_set = false, seed_set = false, threads_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "JSON config file");
    cmd->add_option("--out", args.out_dir, "output directory")
        ->each([&args](const std::string&) { args.out_set = true; });
    cmd->add_option("--seed", args.seed, "base RNG seed")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--threads", args.threads, "worker threads (0 = hardware)")
        ->each([&args](const std::string&) { args.threads_set = true; });
}

void resolve_common(const json& cfg, CommonArgs& args) {
    if (!args.out_set) fetch(cfg, "out", args.out_dir);
    if (!args.seed_set) fetch(cfg, "seed", args.seed);
    if (!args.threads_set) {
        if (cfg.contains("threads")) {
            args.threads = cfg.at("threads").get<int>();
        } else if (const char* env = std::getenv("GAPCORE_THREADS")) {
            args.threads = std::atoi(env);
        }
    }
    gapcore::set_max_threads(args.threads);
    gapcore::ensure_directory(args.out_dir);
}

gapcore::FiniteMdp build_mdp(const json& cfg, json& resolved) {
    json mdp_cfg = cfg.value("mdp", json::object());
    std::string source = mdp_cfg.value("source", "cake");
    resolved["mdp"]["source"] = source;
    if (source == "cake") {
        gapcore::CakeParams p;
        fetch(mdp_cfg, "gamma", p.gamma);
        fetch(mdp_cfg, "epsilon", p.epsilon);
        resolved["mdp"]["gamma"] = p.gamma;
        resolved["mdp"]["epsilon"] = p.epsilon;
        return gapcore::make_cake_mdp(p);
    }
    if (source == "random") {
        gapcore::RandomMdpParams p;
        fetch(mdp_cfg, "n_states", p.n_states);
        fetch(mdp_cfg, "n_actions", p.n_actions);
        fetch(mdp_cfg, "seed", p.seed);
        fetch(mdp_cfg, "branching", p.branching);
        fetch(mdp_cfg, "self_loop_bias", p.self_loop_bias);
        fetch(mdp_cfg, "reward_min", p.reward_min);
        fetch(mdp_cfg, "reward_max", p.reward_max);
        fetch(mdp_cfg, "gamma", p.gamma);
        resolved["mdp"] = {{"source", "random"},   {"n_states", p.n_states},
                           {"n_actions", p.n_actions}, {"seed", p.seed},
                           {"branching", p.branching}, {"self_loop_bias", p.self_loop_bias},
                           {"reward_min", p.reward_min}, {"reward_max", p.reward_max},
                           {"gamma", p.gamma}};
        return gapcore::make_random_mdp(p);
    }
    if (source == "file") {
        std::string path = mdp_cfg.value("path", "");
        if (path.empty()) throw std::runtime_error("mdp.source=file requires mdp.path");
        resolved["mdp"]["path"] = path;
        return gapcore::load_mdp_json(path);
    }
    throw std::runtime_error("unknown mdp source: " + source);
}

int cmd_solve(const CommonArgs& common, const json& cfg, const std::string& op_flag,
              std::optional<double> alpha_flag) {
    json resolved;
    gapcore::FiniteMdp mdp = build_mdp(cfg, resolved);

    json op_cfg = cfg.value("operator", json::object());
    gapcore::OperatorSpec spec;
    std::string kind = op_flag.empty() ? op_cfg.value("kind", "bellman") : op_flag;
    spec.kind = gapcore::operator_kind_from_string(kind);
    spec.alpha = alpha_flag ? *alpha_flag : op_cfg.value("alpha", 0.0);
    spec.seed = common.seed;
    gapcore::validate_spec(spec);
    resolved["operator"] = {{"kind", gapcore::to_string(spec.kind)}, {"alpha", spec.alpha}};

    json solver_cfg = cfg.value("solver", json::object());
    int max_sweeps = solver_cfg.value("max_sweeps", 100000);
    double tol = solver_cfg.value("tol", 1e-12);
    double eta = solver_cfg.value("eta", 1.0);
    resolved["solver"] = {{"max_sweeps", max_sweeps}, {"tol", tol}, {"eta", eta}};

    gapcore::QTable q0(mdp.n_states, mdp.n_actions);
    gapcore::SolveResult res = gapcore::averaged_value_iteration(
        gapcore::make_tabular_backup(mdp, spec), std::move(q0), eta, max_sweeps, tol);

    gapcore::write_q_csv(common.out_dir + "/q_final.csv", res.q);
    gapcore::write_trace_csv(common.out_dir + "/trace.csv", res.trace);
    gapcore::write_trace_summary_csv(common.out_dir + "/trace_summary.csv", res.trace);
    gapcore::write_manifest(common.out_dir + "/manifest.json", "solve", resolved.dump(),
                            common.seed);
    std::cout << "solve: " << res.trace.sweeps << " sweeps, final delta "
              << gapcore::fmt_double(res.trace.supnorm_delta.back()) << "\n";
    return kExitOk;
}

int cmd_verify(const CommonArgs& common, const json& cfg, bool inject_broken) {
    json verify_cfg = cfg.value("verify", json::object());
    gapcore::VerifyOptions opts;
    opts.seed = common.seed;
    fetch(verify_cfg, "corpus_mdps", opts.corpus_size);
    fetch(verify_cfg, "trials", opts.trials);
    fetch(verify_cfg, "sweeps", opts.sweeps);
    fetch(verify_cfg, "pairs", opts.contraction_pairs);
    fetch(verify_cfg, "condition_tables", opts.condition_tables);
    if (inject_broken || verify_cfg.value("inject_broken", false)) opts.inject_broken = true;

    json resolved;
    resolved["verify"] = {{"corpus_mdps", opts.corpus_size},
                          {"trials", opts.trials},
                          {"sweeps", opts.sweeps},
                          {"pairs", opts.contraction_pairs},
                          {"condition_tables", opts.condition_tables},
                          {"inject_broken", opts.inject_broken}};

    gapcore::VerifyOutcome outcome = gapcore::run_verify_battery(opts, &std::cout);
    gapcore::write_report_csv(common.out_dir + "/verify_report.csv", outcome.rows);
    gapcore::write_manifest(common.out_dir + "/manifest.json", "verify", resolved.dump(),
                            common.seed);
    return outcome.passed() ? kExitOk : kExitPropertyFailure;
}

int cmd_bicycle(const CommonArgs& common, const json& cfg, const std::string& preset_flag) {
    json bike_cfg = cfg.value("bicycle", json::object());
    std::string preset = preset_flag.empty() ? bike_cfg.value("preset", "desk") : preset_flag;
    gapcore::BicycleExperimentConfig bcfg = gapcore::bicycle_preset(preset);
    bcfg.seed = common.seed;
    fetch(bike_cfg, "nodes", bcfg.nodes_per_dim);
    fetch(bike_cfg, "sweeps", bcfg.sweeps);
    fetch(bike_cfg, "checkpoint_every", bcfg.checkpoint_every);
    fetch(bike_cfg, "eta", bcfg.eta);
    fetch(bike_cfg, "gamma", bcfg.discount);
    fetch(bike_cfg, "alpha", bcfg.alpha);
    fetch(bike_cfg, "sample_count", bcfg.sample_count);
    fetch(bike_cfg, "eval_episodes", bcfg.eval_episodes);
    fetch(bike_cfg, "max_episode_steps", bcfg.max_episode_steps);
    fetch(bike_cfg, "swap_tilt_bounds", bcfg.swap_tilt_bounds);
    fetch(bike_cfg, "trajectories", bcfg.record_trajectories);

    // Optional per-dimension grid block: [{"lower": .., "upper": .., "nodes": ..}, ...]
    if (cfg.contains("grid")) {
        gapcore::numvec lower, upper;
        gapcore::indvec nodes;
        for (const auto& dim : cfg.at("grid")) {
            lower.push_back(dim.at("lower").get<double>());
            upper.push_back(dim.at("upper").get<double>());
            nodes.push_back(dim.at("nodes").get<int>());
        }
        bcfg.custom_grid = gapcore::GridScheme(lower, upper, nodes);
    }

    std::vector<std::string> op_names = {"bellman", "consistent", "al", "pal"};
    if (bike_cfg.contains("operators"))
        op_names = bike_cfg.at("operators").get<std::vector<std::string>>();

    json resolved;
    if (cfg.contains("grid")) resolved["grid"] = cfg.at("grid");
    resolved["bicycle"] = {{"preset", preset},
                           {"nodes", bcfg.nodes_per_dim},
                           {"sweeps", bcfg.sweeps},
                           {"checkpoint_every", bcfg.checkpoint_every},
                           {"eta", bcfg.eta},
                           {"gamma", bcfg.discount},
                           {"alpha", bcfg.alpha},
                           {"sample_count", bcfg.sample_count},
                           {"eval_episodes", bcfg.eval_episodes},
                           {"max_episode_steps", bcfg.max_episode_steps},
                           {"swap_tilt_bounds", bcfg.swap_tilt_bounds},
                           {"trajectories", bcfg.record_trajectories},
                           {"operators", op_names}};

    for (const auto& name : op_names) {
        gapcore::GridOperator op = gapcore::grid_operator_from_string(name);
        gapcore::BicycleRunResult res = gapcore::run_bicycle_experiment(bcfg, op);
        std::string label = gapcore::to_string(op);
        gapcore::write_frequency_csv(common.out_dir + "/frequency_" + label + ".csv",
                                     res.checkpoints);
        if (bcfg.record_trajectories)
            gapcore::write_trajectory_csv(common.out_dir + "/trajectory_" + label + ".csv",
                                          res.trajectories);
        const auto& last = res.checkpoints.back();
        std::cout << "bicycle " << label << ": fall " << last.fall_frequency << ", goal "
                  << last.goal_frequency << " at sweep " << last.sweep << "\n";
    }
    gapcore::write_manifest(common.out_dir + "/manifest.json", "bicycle", resolved.dump(),
                            common.seed);
    return kExitOk;
}

int cmd_qlearn(const CommonArgs& common, const json& cfg, const std::string& rule_flag) {
    json resolved;
    gapcore::FiniteMdp mdp = build_mdp(cfg, resolved);

    json q_cfg = cfg.value("qlearn", json::object());
    gapcore::LearningConfig lcfg;
    lcfg.seed = common.seed;
    std::string rule = rule_flag.empty() ? q_cfg.value("rule", "bellman") : rule_flag;
    lcfg.rule = gapcore::update_rule_from_string(rule);
    fetch(q_cfg, "alpha", lcfg.alpha);
    fetch(q_cfg, "step_size", lcfg.step_size);
    fetch(q_cfg, "step_decay_tau", lcfg.step_decay_tau);
    fetch(q_cfg, "exploration", lcfg.exploration);
    fetch(q_cfg, "episodes", lcfg.episodes);
    fetch(q_cfg, "max_steps", lcfg.max_steps);

    resolved["qlearn"] = {{"rule", gapcore::to_string(lcfg.rule)},
                          {"alpha", lcfg.alpha},
                          {"step_size", lcfg.step_size},
                          {"step_decay_tau", lcfg.step_decay_tau},
                          {"exploration", lcfg.exploration},
                          {"episodes", lcfg.episodes},
                          {"max_steps", lcfg.max_steps}};

    gapcore::SolveResult res = gapcore::q_learning(mdp, lcfg);
    gapcore::write_learning_csv(common.out_dir + "/learning_curve.csv", res.trace);
    gapcore::write_q_csv(common.out_dir + "/q_final.csv", res.q);
    gapcore::write_manifest(common.out_dir + "/manifest.json", "qlearn", resolved.dump(),
                            common.seed);
    std::cout << "qlearn: " << lcfg.episodes << " episodes, final mean gap "
              << gapcore::fmt_double(res.trace.mean_gap(res.trace.sweeps - 1)) << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gapcore: gap-increasing Bellman operators, value iteration and checks"};
    app.require_subcommand(1);

    CommonArgs common;
    std::string op_flag, alpha_str, preset_flag, rule_flag;
    std::optional<double> alpha_flag;
    bool inject_broken = false;

    CLI::App* solve = app.add_subcommand("solve", "value iteration on a tabular MDP");
    add_common(solve, common);
    solve->add_option("--operator", op_flag, "operator kind");
    solve->add_option("--alpha", alpha_str, "operator alpha");

    CLI::App* verify = app.add_subcommand("verify", "run the property battery");
    add_common(verify, common);
    verify->add_flag("--inject-broken", inject_broken,
                     "add a deliberately broken operator (expected to fail)");

    CLI::App* bicycle = app.add_subcommand("bicycle", "bicycle grid experiment");
    add_common(bicycle, common);
    bicycle->add_option("--preset", preset_flag, "desk, paper-8 or paper-10");

    CLI::App* qlearn = app.add_subcommand("qlearn", "tabular Q-learning on a builtin MDP");
    add_common(qlearn, common);
    qlearn->add_option("--rule", rule_flag, "update rule: bellman, al or pal");

    CLI11_PARSE(app, argc, argv);

    try {
        json cfg = load_config(common.config_path);
        resolve_common(cfg, common);
        if (!alpha_str.empty()) alpha_flag = std::stod(alpha_str);

        if (solve->parsed()) return cmd_solve(common, cfg, op_flag, alpha_flag);
        if (verify->parsed()) return cmd_verify(common, cfg, inject_broken);
        if (bicycle->parsed()) return cmd_bicycle(common, cfg, preset_flag);
        if (qlearn->parsed()) return cmd_qlearn(common, cfg, rule_flag);
        return kExitConfig;
    } catch (const gapcore::numerical_error& e) {
        std::cerr << "numerical abort: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}
