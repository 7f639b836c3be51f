// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.

#include <rescan/cli/report.hpp>

#include <algorithm>
#include <sstream>

namespace rescan::cli
{
namespace
{
using nlohmann::json;

json span_json(const Span& s)
{
    return {{"file", s.file}, {"start", s.start}, {"length", s.length}, {"line", s.line}, {"end_line", s.end_line}};
}

Span span_from(const json& j)
{
    return {j.at("file").get<std::string>(), j.at("start").get<std::size_t>(), j.at("length").get<std::size_t>(),
        j.at("line").get<std::size_t>(), j.at("end_line").get<std::size_t>()};
}

template <typename T>
json optional_json(const std::optional<T>& v)
{
    return v ? json(*v) : json(nullptr);
}

json finding_json(const Finding& f, bool with_timings)
{
    json j{
        {"function", f.function},
        {"contract", f.contract},
        {"function_name", f.function_name},
        {"entry_functions", f.entry_functions},
        {"span", span_json(f.span)},
        {"rule", f.rule},
        {"confidence", f.confidence},
        {"gas_limited", f.gas_limited},
        {"guard_state", f.guard_state},
        {"stale_state", f.stale_state},
        {"check_lines", f.check_lines},
        {"effect_line", optional_json(f.effect_line)},
        {"ppt_drop", optional_json(f.ppt_drop)},
        {"reported", f.reported()},
        {"counted", f.counted()},
        {"tags", f.tags()},
    };
    if (f.verdict)
    {
        const auto& v = *f.verdict;
        j["verdict"] = {{"status", v.status}, {"reason", v.reason}, {"paths", v.paths},
            {"solver_queries", v.solver_queries}, {"path", v.path}, {"witness", v.witness}};
    }
    else
        j["verdict"] = nullptr;
    if (with_timings)
        j["stage2_ms"] = f.stage2_ms;
    return j;
}

Finding finding_from(const json& j)
{
    Finding f;
    f.function = j.at("function").get<std::string>();
    f.contract = j.at("contract").get<std::string>();
    f.function_name = j.at("function_name").get<std::string>();
    f.entry_functions = j.at("entry_functions").get<std::vector<std::string>>();
    f.span = span_from(j.at("span"));
    f.rule = j.at("rule").get<std::string>();
    f.confidence = j.at("confidence").get<std::string>();
    f.gas_limited = j.at("gas_limited").get<bool>();
    f.guard_state = j.at("guard_state").get<std::vector<std::string>>();
    f.stale_state = j.at("stale_state").get<std::vector<std::string>>();
    f.check_lines = j.at("check_lines").get<std::vector<std::size_t>>();
    if (!j.at("effect_line").is_null())
        f.effect_line = j.at("effect_line").get<std::size_t>();
    if (!j.at("ppt_drop").is_null())
        f.ppt_drop = j.at("ppt_drop").get<std::string>();
    if (const auto& v = j.at("verdict"); !v.is_null())
    {
        VerdictRecord r;
        r.status = v.at("status").get<std::string>();
        r.reason = v.at("reason").get<std::string>();
        r.paths = v.at("paths").get<std::size_t>();
        r.solver_queries = v.at("solver_queries").get<std::size_t>();
        r.path = v.at("path").get<std::vector<std::size_t>>();
        r.witness = v.at("witness");
        f.verdict = std::move(r);
    }
    f.stage2_ms = j.value("stage2_ms", 0.0);
    return f;
}
}  // namespace

bool Finding::reported() const
{
    if (ppt_drop)
        return false;
    return !verdict || verdict->status != "unreachable";
}

bool Finding::counted() const
{
    if (gas_limited || !reported())
        return false;
    if (verdict)
        return verdict->status == "confirmed";
    return confidence == "high";
}

std::vector<std::string> Finding::tags() const
{
    std::vector<std::string> t;
    if (gas_limited)
        t.emplace_back("gas-limited");
    if (confidence == "low")
        t.emplace_back("low-confidence");
    if (verdict && verdict->status.rfind("unknown", 0) == 0)
        t.push_back(verdict->status);
    if (!reported())
        t.emplace_back("dismissed");
    return t;
}

bool Report::has_findings() const
{
    return std::any_of(units.begin(), units.end(), [](const UnitReport& u) {
        return std::any_of(u.findings.begin(), u.findings.end(), [](const Finding& f) { return f.reported(); });
    });
}

bool Report::has_errors() const
{
    return std::any_of(units.begin(), units.end(), [](const UnitReport& u) { return u.error.has_value(); });
}

json to_json(const Report& r, bool with_timings)
{
    json units = json::array();
    for (const auto& u : r.units)
    {
        json findings = json::array();
        for (const auto& f : u.findings)
            findings.push_back(finding_json(f, with_timings));
        json ju{{"path", u.path}, {"compiler_version", u.compiler_version}, {"error", optional_json(u.error)},
            {"findings", findings}};
        if (with_timings)
            ju["timings_ms"] = {{"compile", u.timings.compile_ms}, {"stage1", u.timings.stage1_ms},
                {"stage2", u.timings.stage2_ms}, {"total", u.timings.total_ms}};
        units.push_back(std::move(ju));
    }
    return {
        {"format", report_format},
        {"tool", {{"name", "rescan"}, {"version", tool_version}}},
        {"stages", r.stages},
        {"config_fingerprint", r.config_fingerprint},
        {"config", r.config},
        {"units", units},
    };
}

Report report_from_json(const json& j)
{
    if (j.value("format", "") != report_format)
        throw std::runtime_error{"not a " + std::string{report_format} + " report"};
    Report r;
    r.stages = j.at("stages").get<std::string>();
    r.config_fingerprint = j.at("config_fingerprint").get<std::string>();
    r.config = j.at("config");
    for (const auto& ju : j.at("units"))
    {
        UnitReport u;
        u.path = ju.at("path").get<std::string>();
        u.compiler_version = ju.at("compiler_version").get<std::string>();
        if (!ju.at("error").is_null())
            u.error = ju.at("error").get<std::string>();
        for (const auto& jf : ju.at("findings"))
            u.findings.push_back(finding_from(jf));
        if (const auto t = ju.find("timings_ms"); t != ju.end())
            u.timings = {t->at("compile").get<double>(), t->at("stage1").get<double>(), t->at("stage2").get<double>(),
                t->at("total").get<double>()};
        r.units.push_back(std::move(u));
    }
    return r;
}

std::string render_text(const Report& r)
{
    std::ostringstream out;
    std::size_t reported = 0, dismissed = 0;
    for (const auto& u : r.units)
    {
        out << u.path;
        if (!u.compiler_version.empty())
            out << " (solc " << u.compiler_version << ")";
        out << "\n";
        if (u.error)
        {
            out << "  error: " << *u.error << "\n";
            continue;
        }
        if (u.findings.empty())
            out << "  no warnings\n";
        for (const auto& f : u.findings)
        {
            (f.reported() ? reported : dismissed) += 1;
            out << "  " << (f.reported() ? "FINDING" : "dismissed") << " " << f.span.file << ":" << f.span.line << " in "
                << f.function << " [" << f.rule << ", " << f.confidence << "]";
            if (f.verdict)
                out << " stage2=" << f.verdict->status;
            if (f.ppt_drop)
                out << " pre-filter=" << *f.ppt_drop;
            out << "\n";
            if (!f.stale_state.empty())
            {
                out << "    stale guard:";
                for (const auto& g : f.stale_state)
                    out << " " << g;
                out << "\n";
            }
            if (f.verdict && !f.verdict->reason.empty() && f.verdict->status != "confirmed")
                out << "    reason: " << f.verdict->reason << "\n";
            if (f.verdict && f.verdict->witness.is_object())
            {
                const auto& w = f.verdict->witness;
                out << "    witness: attacker " << w.value("attacker", "") << " calls " << w["first"].value("address", "")
                    << " with " << w["first"].value("calldata", "").substr(0, 10);
                if (w.contains("reentry") && !w["reentry"].is_null())
                    out << ", re-enters " << w["reentry"].value("address", "") << " with "
                        << w["reentry"].value("calldata", "").substr(0, 10);
                out << "\n";
            }
        }
    }
    out << reported << " finding(s), " << dismissed << " dismissed, stages=" << r.stages << "\n";
    return out.str();
}

}  // namespace rescan::cli
