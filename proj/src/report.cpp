#include "divlab/report.hpp"

#include <cmath>

namespace divlab {

json json_number(double v)
{
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

void VerificationReport::add(const std::string& name, double value, double tolerance, double margin)
{
    const bool ok = std::isfinite(margin) && margin >= 0.0;
    checks.push_back({name, value, tolerance, margin, ok ? "PASS" : "FAIL"});
}

void VerificationReport::add_at_most(const std::string& name, double value, double tolerance)
{
    add(name, value, tolerance, tolerance - value);
}

void VerificationReport::add_at_least(const std::string& name, double value, double bound)
{
    add(name, value, bound, value - bound);
}

void VerificationReport::add_close(const std::string& name, double value, double target, double tolerance)
{
    add(name, value, tolerance, tolerance - std::abs(value - target));
}

void VerificationReport::add_flag(const std::string& name, bool ok)
{
    add(name, ok ? 1.0 : 0.0, 0.0, ok ? 0.0 : -1.0);
}

bool VerificationReport::passed() const
{
    if (checks.empty()) return false;
    for (const auto& c : checks)
        if (c.verdict != "PASS") return false;
    return true;
}

json VerificationReport::to_json() const
{
    json out;
    out["title"] = title;
    out["verdict"] = verdict();
    out["outcome"] = outcome;
    json list = json::array();
    for (const auto& c : checks) {
        list.push_back({{"name", c.name},
                        {"value", json_number(c.value)},
                        {"tolerance", json_number(c.tolerance)},
                        {"margin", json_number(c.margin)},
                        {"verdict", c.verdict}});
    }
    out["checks"] = list;
    out["details"] = details;
    return out;
}

}  // namespace divlab
