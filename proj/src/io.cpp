#include "gapcore/io.hpp"

#include "gapcore/types.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gapcore {

using nlohmann::json;

FiniteMdp load_mdp_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open MDP file: " + path);
    json doc = json::parse(in);

    FiniteMdp mdp;
    mdp.n_states = doc.at("n_states").get<int>();
    mdp.n_actions = doc.at("n_actions").get<int>();
    mdp.discount = doc.at("discount").get<double>();
    if (mdp.n_states < 1 || mdp.n_actions < 1)
        throw std::runtime_error("MDP file has non-positive dimensions: " + path);

    mdp.reward.reserve(static_cast<std::size_t>(mdp.n_states) * mdp.n_actions);
    for (const auto& row : doc.at("reward"))
        for (const auto& v : row) mdp.reward.push_back(v.get<double>());

    mdp.transition.reserve(static_cast<std::size_t>(mdp.n_states) * mdp.n_actions *
                           mdp.n_states);
    for (const auto& per_state : doc.at("transition"))
        for (const auto& per_action : per_state)
            for (const auto& v : per_action) mdp.transition.push_back(v.get<double>());

    auto violations = validate_mdp(mdp);
    if (!violations.empty()) {
        std::ostringstream msg;
        msg << "MDP file " << path << " is invalid: " << violations.front().message;
        if (violations.front().state >= 0)
            msg << " at state " << violations.front().state << ", action "
                << violations.front().action;
        msg << " (" << violations.size() << " violation(s) total)";
        throw std::runtime_error(msg.str());
    }
    return mdp;
}

void save_mdp_json(const FiniteMdp& mdp, const std::string& path) {
    json doc;
    doc["n_states"] = mdp.n_states;
    doc["n_actions"] = mdp.n_actions;
    doc["discount"] = mdp.discount;
    json reward = json::array();
    for (int x = 0; x < mdp.n_states; ++x) {
        json row = json::array();
        for (int a = 0; a < mdp.n_actions; ++a) row.push_back(mdp.r(x, a));
        reward.push_back(std::move(row));
    }
    doc["reward"] = std::move(reward);
    json transition = json::array();
    for (int x = 0; x < mdp.n_states; ++x) {
        json per_state = json::array();
        for (int a = 0; a < mdp.n_actions; ++a) {
            json per_action = json::array();
            for (int y = 0; y < mdp.n_states; ++y) per_action.push_back(mdp.p(x, a, y));
            per_state.push_back(std::move(per_action));
        }
        transition.push_back(std::move(per_state));
    }
    doc["transition"] = std::move(transition);

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write MDP file: " + path);
    out << doc.dump(2) << "\n";
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    return out;
}

} // namespace

void write_q_csv(const std::string& path, const QTable& q) {
    auto out = open_out(path);
    out << "state,action,value\n";
    for (int x = 0; x < q.n_states; ++x)
        for (int a = 0; a < q.n_actions; ++a)
            out << x << "," << a << "," << fmt_double(q(x, a)) << "\n";
}

void write_trace_csv(const std::string& path, const IterationTrace& trace) {
    auto out = open_out(path);
    out << "sweep,supnorm_delta,mean_gap,min_gap,state,value,gap\n";
    for (int s = 0; s < trace.sweeps; ++s) {
        std::string prefix = std::to_string(s + 1) + "," +
                             fmt_double(trace.supnorm_delta[s]) + "," +
                             fmt_double(trace.mean_gap(s)) + "," +
                             fmt_double(trace.min_gap(s));
        if (s < static_cast<int>(trace.values.size()) && !trace.traced_states.empty()) {
            for (std::size_t i = 0; i < trace.traced_states.size(); ++i)
                out << prefix << "," << trace.traced_states[i] << ","
                    << fmt_double(trace.values[s][i]) << "," << fmt_double(trace.gaps[s][i])
                    << "\n";
        } else {
            out << prefix << ",,,\n";
        }
    }
}

void write_trace_summary_csv(const std::string& path, const IterationTrace& trace) {
    auto out = open_out(path);
    out << "sweep,supnorm_delta,mean_gap,min_gap\n";
    for (int s = 0; s < trace.sweeps; ++s)
        out << s + 1 << "," << fmt_double(trace.supnorm_delta[s]) << ","
            << fmt_double(trace.mean_gap(s)) << "," << fmt_double(trace.min_gap(s)) << "\n";
}

void write_learning_csv(const std::string& path, const IterationTrace& trace) {
    auto out = open_out(path);
    out << "episode,return,mean_gap\n";
    for (int e = 0; e < trace.sweeps; ++e)
        out << e + 1 << "," << fmt_double(trace.episode_return[e]) << ","
            << fmt_double(trace.mean_gap(e)) << "\n";
}

void write_report_csv(const std::string& path, const std::vector<ReportRow>& rows) {
    auto out = open_out(path);
    out << "check,mdp_seed,trial,state,action,observed,expected,pass\n";
    for (const auto& r : rows)
        out << r.check << "," << r.mdp_seed << "," << r.trial << "," << r.state << ","
            << r.action << "," << fmt_double(r.observed) << "," << fmt_double(r.expected)
            << "," << (r.pass ? 1 : 0) << "\n";
}

void write_manifest(const std::string& path, const std::string& command,
                    const std::string& resolved_config_json, uint64_t seed) {
    json doc;
    doc["artifact"] = "gapcore";
    doc["version"] = kVersion;
    doc["command"] = command;
    doc["seed"] = seed;
    doc["config"] = json::parse(resolved_config_json);
    auto out = open_out(path);
    out << doc.dump(2) << "\n";
}

void ensure_directory(const std::string& path) {
    if (path.empty()) return;
    std::filesystem::create_directories(path);
}

} // namespace gapcore
