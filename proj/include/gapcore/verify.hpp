#pragma once

#include "gapcore/domains.hpp"
#include "gapcore/io.hpp"
#include "gapcore/oracle.hpp"

#include <iosfwd>
#include <vector>

namespace gapcore {

/// Configuration of the machine-check battery over theoretical guarantees:
/// the two sufficient operator conditions, optimality preservation, gap
/// increase, the consistent-operator contraction, the iterate bound, the
/// lazy operator's multiple fixed points, the cake closed forms and the
/// single-state divergence constructions.
struct VerifyOptions {
    int corpus_size = 100;     // seeded random MDPs, <= 6 states x <= 4 actions
    int trials = 3;            // random Q0 per (MDP, operator)
    int sweeps = 2000;         // value-iteration sweeps per trial
    int contraction_pairs = 1000;
    int condition_tables = 5;   // random Q per condition check
    uint64_t seed = 1;
    bool inject_broken = false; // adds a deliberately broken operator; the
                                // battery is then expected to fail
};

struct VerifyOutcome {
    int checks = 0;
    int failures = 0;
    std::vector<ReportRow> rows;

    bool passed() const { return failures == 0; }
};

/// The operator specs the battery exercises: consistent, AL/PAL/lazy at
/// alpha in {0.1, 0.5, 0.9}, and the identity-embedded CQVI.
std::vector<OperatorSpec> family_operator_specs();

/// Corpus member i: sizes, discount, branching and self-loop bias cycle
/// through small ranges so self-transitions (where the consistent operator
/// bites) are well represented.
RandomMdpParams corpus_params(const VerifyOptions& opts, int index);

VerifyOutcome run_verify_battery(const VerifyOptions& opts, std::ostream* log = nullptr);

} // namespace gapcore
