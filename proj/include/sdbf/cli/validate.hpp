#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace sdbf::cli {

enum class Fault {
    None,
    KdeZeroBandwidth,  // forces a zero bandwidth into the KDE check
};

struct ValidateOptions {
    bool fast = false;
    std::uint64_t seed = 20240611;
    Fault fault = Fault::None;
};

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double reference = 0.0;
    double std_error = 0.0;
    /// Allowed |value - reference|.
    double tolerance = 0.0;
    std::string detail;
};

std::vector<CheckResult> run_validation(const ValidateOptions& options);

/// One line per check; returns true when every check passed.
bool print_checks(const std::vector<CheckResult>& checks, std::ostream& out);

}  // namespace sdbf::cli
