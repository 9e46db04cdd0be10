#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "divlab/report.hpp"

namespace divlab {

/// Option values of one scenario, keyed by long option name without dashes.
/// Missing keys take the operation's defaults.
using Params = std::map<std::string, std::string>;

struct ScenarioOutput {
    VerificationReport report;
    /// File name and contents of each plot-data file.
    std::vector<std::pair<std::string, std::string>> csv;
};

/// Runs one operation ("certify", "flow-tube", "strip-identity", "trace", "density", "aplim", "blowup",
/// "nalpha", "demo separable", "demo jensen", "demo quadratic", "demo roundtrip").
/// Throws UsageError for unknown operations or malformed parameters.
ScenarioOutput run_operation(const std::string& op, const Params& params);

struct Recipe {
    std::string name;
    std::string criterion;
    std::string description;
    /// Command line, without the program name.
    std::vector<std::string> args;
};

/// Built-in verification recipes.
const std::vector<Recipe>& recipes();
json recipes_json();

/// Full command-line front end. Returns the exit status: 0 PASS, 1 FAIL, 2 usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace divlab
