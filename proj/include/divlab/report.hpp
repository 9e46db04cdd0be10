#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace divlab {

using json = nlohmann::ordered_json;

/// One verified quantity. `margin >= 0` means the check passed.
struct Check {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    double margin = 0.0;
    std::string verdict;
};

/// Structured record of a verification run: checks, an operation-specific outcome tag
/// (e.g. CERTIFIED_SAMPLED, AP_LIM_REJECTED) and free-form details.
struct VerificationReport {
    std::string title;
    std::string outcome;
    std::vector<Check> checks;
    json details = json::object();

    /// Adds a check with an explicit margin; PASS iff the margin is finite and >= 0.
    void add(const std::string& name, double value, double tolerance, double margin);
    /// value <= tolerance.
    void add_at_most(const std::string& name, double value, double tolerance);
    /// value >= bound.
    void add_at_least(const std::string& name, double value, double bound);
    /// |value - target| <= tolerance.
    void add_close(const std::string& name, double value, double target, double tolerance);
    /// Boolean condition recorded as value 1/0.
    void add_flag(const std::string& name, bool ok);

    bool passed() const;
    std::string verdict() const { return passed() ? "PASS" : "FAIL"; }
    json to_json() const;
};

/// JSON number that survives non-finite values (encoded as strings).
json json_number(double v);

}  // namespace divlab
