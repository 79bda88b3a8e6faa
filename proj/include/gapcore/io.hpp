#pragma once

#include "gapcore/mdp.hpp"
#include "gapcore/oracle.hpp"
#include "gapcore/solver.hpp"

#include <string>
#include <vector>

namespace gapcore {

/// Loads a FiniteMdp from a JSON document with fields `n_states`,
/// `n_actions`, `discount`, `reward` (2-D array indexed state, action) and
/// `transition` (3-D array indexed state, action, next state). Values are
/// parsed as 64-bit floats. The loaded model is validated; violations throw.
FiniteMdp load_mdp_json(const std::string& path);

void save_mdp_json(const FiniteMdp& mdp, const std::string& path);

/// Formats with 17 significant digits, enough to round-trip any double.
std::string fmt_double(double v);

/// q_final.csv: header `state,action,value`.
void write_q_csv(const std::string& path, const QTable& q);

/// Long-format trace: `sweep,supnorm_delta,mean_gap,min_gap,state,value,gap`,
/// one row per (sweep, traced state). Sweeps are 1-based in the file.
void write_trace_csv(const std::string& path, const IterationTrace& trace);

/// Compact per-sweep summary: `sweep,supnorm_delta,mean_gap,min_gap`.
void write_trace_summary_csv(const std::string& path, const IterationTrace& trace);

/// Learning curve: `episode,return,mean_gap`.
void write_learning_csv(const std::string& path, const IterationTrace& trace);

/// Property reports: `check,mdp_seed,trial,state,action,observed,expected,pass`.
struct ReportRow {
    std::string check;
    uint64_t mdp_seed = 0;
    int trial = -1;
    int state = -1;
    int action = -1;
    double observed = 0.0;
    double expected = 0.0;
    bool pass = true;
};
void write_report_csv(const std::string& path, const std::vector<ReportRow>& rows);

/// Serialized run manifest: the resolved configuration (a JSON object in
/// string form), seed and artifact version. Reruns with identical manifests
/// produce identical primary CSVs.
void write_manifest(const std::string& path, const std::string& command,
                    const std::string& resolved_config_json, uint64_t seed);

void ensure_directory(const std::string& path);

} // namespace gapcore
