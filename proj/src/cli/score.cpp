// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.

#include <rescan/cli/score.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace rescan::cli
{
namespace
{
namespace fs = std::filesystem;

std::string normalized(const fs::path& p)
{
    std::error_code ec;
    const auto c = fs::weakly_canonical(p, ec);
    return ec ? p.lexically_normal().string() : c.string();
}

bool same_source(const std::string& unit_path, const std::string& label_path, const std::string& label_dir)
{
    const fs::path full = label_dir.empty() ? fs::path{label_path} : fs::path{label_dir} / label_path;
    if (normalized(unit_path) == normalized(full))
        return true;
    const auto suffix = "/" + label_path;
    return unit_path == label_path ||
           (unit_path.size() > suffix.size() && unit_path.compare(unit_path.size() - suffix.size(), suffix.size(), suffix) == 0);
}

bool matches(const Finding& f, const LabeledSpan& p, Granularity g)
{
    if (f.contract != p.contract)
        return false;
    if (g == Granularity::contract)
        return true;
    if (f.function_name != p.function)
        return false;
    if (g == Granularity::function)
        return true;
    const auto end = std::max(f.span.end_line, f.span.line);
    return f.span.line <= p.end_line && p.start_line <= end;
}

std::string key_of(const Finding& f, Granularity g)
{
    switch (g)
    {
    case Granularity::contract:
        return f.contract;
    case Granularity::function:
        return f.contract + "." + f.function_name;
    case Granularity::line:
        return f.span.file + ":" + std::to_string(f.span.start) + ":" + std::to_string(f.span.length);
    }
    return {};
}

std::string percent(const std::optional<double>& v)
{
    if (!v)
        return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", *v * 100.0);
    return buf;
}
}  // namespace

LabelManifest labels_from_json(const nlohmann::json& j, std::string directory)
{
    if (j.value("format", "") != labels_format)
        throw std::runtime_error{"not a " + std::string{labels_format} + " manifest"};
    LabelManifest m;
    m.directory = std::move(directory);
    for (const auto& r : j.at("records"))
    {
        LabelRecord rec;
        rec.path = r.at("path").get<std::string>();
        rec.compiler_version = r.value("compiler_version", "");
        rec.vulnerable = r.value("vulnerable", false);
        rec.note = r.value("note", "");
        for (const auto& p : r.value("positives", nlohmann::json::array()))
            rec.positives.push_back({p.at("contract").get<std::string>(), p.at("function").get<std::string>(),
                p.value("start_line", std::size_t{0}), p.value("end_line", std::size_t{0})});
        m.records.push_back(std::move(rec));
    }
    return m;
}

LabelManifest load_labels(const std::string& path)
{
    std::ifstream in{path};
    if (!in)
        throw std::runtime_error{"cannot read labels " + path};
    nlohmann::json j;
    in >> j;
    return labels_from_json(j, fs::path{path}.parent_path().string());
}

Granularity parse_granularity(std::string_view text)
{
    if (text == "contract")
        return Granularity::contract;
    if (text == "function")
        return Granularity::function;
    if (text == "line")
        return Granularity::line;
    throw std::invalid_argument{"granularity must be contract, function or line"};
}

ScoreCard score_counts(std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn)
{
    ScoreCard s;
    s.tp = tp;
    s.fp = fp;
    s.fn = fn;
    s.tn = tn;
    if (tp + fp > 0)
        s.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (tp + fn > 0)
        s.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (s.precision && s.recall && *s.precision + *s.recall > 0)
        s.f1 = 2 * *s.precision * *s.recall / (*s.precision + *s.recall);
    return s;
}

ScoreCard score(const std::vector<Report>& reports, const LabelManifest& labels, const ScoreOptions& options)
{
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    std::vector<std::string> diagnostics;
    for (const auto& rec : labels.records)
    {
        std::vector<const UnitReport*> units;
        for (const auto& r : reports)
            for (const auto& u : r.units)
                if (same_source(u.path, rec.path, labels.directory))
                    units.push_back(&u);
        if (units.empty())
        {
            fn += rec.positives.size();
            diagnostics.push_back(rec.path + ": no report; positives counted as false negatives");
            continue;
        }
        if (units.size() > 1)
            diagnostics.push_back(rec.path + ": appears in " + std::to_string(units.size()) + " reports; using the first");
        const auto& u = *units.front();
        if (u.error)
            diagnostics.push_back(rec.path + ": analysis error: " + *u.error);

        std::vector<const Finding*> counted;
        for (const auto& f : u.findings)
            if (options.include_all ? f.reported() : f.counted())
                counted.push_back(&f);

        for (const auto& p : rec.positives)
        {
            const bool hit = std::any_of(counted.begin(), counted.end(),
                [&](const Finding* f) { return matches(*f, p, options.granularity); });
            (hit ? tp : fn) += 1;
        }
        std::set<std::string> false_keys;
        for (const auto* f : counted)
        {
            const bool labeled = std::any_of(rec.positives.begin(), rec.positives.end(),
                [&](const LabeledSpan& p) { return matches(*f, p, options.granularity); });
            if (!labeled)
                false_keys.insert(key_of(*f, options.granularity));
        }
        fp += false_keys.size();
        if (rec.positives.empty() && counted.empty())
            ++tn;
    }
    auto s = score_counts(tp, fp, fn, tn);
    s.diagnostics = std::move(diagnostics);
    return s;
}

nlohmann::json to_json(const ScoreCard& s)
{
    const auto ratio = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    return {{"tp", s.tp}, {"fp", s.fp}, {"fn", s.fn}, {"tn", s.tn}, {"precision", ratio(s.precision)},
        {"recall", ratio(s.recall)}, {"f1", ratio(s.f1)}, {"diagnostics", s.diagnostics}};
}

std::string render_text(const ScoreCard& s)
{
    std::ostringstream out;
    out << "TP=" << s.tp << " FP=" << s.fp << " FN=" << s.fn << " TN=" << s.tn << "\n";
    out << "precision " << percent(s.precision) << "  recall " << percent(s.recall) << "  F1 " << percent(s.f1) << "\n";
    for (const auto& d : s.diagnostics)
        out << "note: " << d << "\n";
    return out.str();
}

}  // namespace rescan::cli
