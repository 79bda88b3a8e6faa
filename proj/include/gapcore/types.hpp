#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gapcore {

using numvec = std::vector<double>;
using indvec = std::vector<int>;

inline constexpr const char* kVersion = "0.1.0";

inline constexpr double kPi = 3.14159265358979323846;

/// Thrown when an iteration produces a non-finite entry. Carries enough
/// context to name the offending sweep and table cell in diagnostics.
class numerical_error : public std::runtime_error {
public:
    numerical_error(const std::string& what, int sweep, int state, int action)
        : std::runtime_error(what), sweep(sweep), state(state), action(action) {}

    int sweep;
    int state;
    int action;
};

} // namespace gapcore
