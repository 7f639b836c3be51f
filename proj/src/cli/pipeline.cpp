// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.

#include <rescan/cli/pipeline.hpp>

#include <rescan/ast/ingest.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

namespace rescan::cli
{
namespace
{
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t)
{
    return std::chrono::duration<double, std::milli>(Clock::now() - t).count();
}

Span span_of(const ast::SourceSpan& s)
{
    return {s.file, s.start, s.length, s.line, s.end_line};
}

Finding finding_of(const slicer::Warning& w, const ast::ContractModel& model)
{
    Finding f;
    f.function = w.function;
    if (const auto* fn = model.function(w.function))
    {
        f.contract = fn->contract;
        f.function_name = fn->name;
    }
    f.entry_functions = w.entry_functions;
    f.span = span_of(w.span);
    f.rule = std::string{slicer::to_string(w.rule)};
    f.confidence = std::string{slicer::to_string(w.confidence)};
    f.gas_limited = w.gas_limited;
    for (const auto& g : w.guard_state)
        f.guard_state.push_back(g.owner + "." + g.name);
    for (const auto& g : w.stale_state)
        f.stale_state.push_back(g.owner + "." + g.name);
    for (const auto n : w.checks)
        f.check_lines.push_back(model.node(n).span.line);
    std::sort(f.check_lines.begin(), f.check_lines.end());
    f.check_lines.erase(std::unique(f.check_lines.begin(), f.check_lines.end()), f.check_lines.end());
    if (w.effect)
        f.effect_line = model.node(*w.effect).span.line;
    return f;
}

VerdictRecord record_of(const symexec::Verdict& v)
{
    VerdictRecord r;
    r.status = std::string{symexec::to_string(v.status)};
    r.reason = v.reason;
    r.paths = v.paths;
    r.solver_queries = v.solver_queries;
    r.path.assign(v.path.begin(), v.path.end());
    if (v.witness)
        r.witness = symexec::to_json(*v.witness);
    return r;
}

const slicer::Slice* slice_of(const slicer::StageOne& s1, const slicer::Warning& w)
{
    for (const auto& s : s1.slices)
        if (s.criterion.entry_node == w.criterion.entry_node && s.criterion.call_index == w.criterion.call_index)
            return &s;
    return nullptr;
}

void emit_dot(const std::string& dir, const std::string& path, const ipdg::Icfg& icfg, const ipdg::Ipdg& ipdg,
    const ast::ContractModel& model)
{
    std::filesystem::create_directories(dir);
    const auto stem = std::filesystem::path{path}.stem().string();
    std::ofstream{std::filesystem::path{dir} / (stem + ".icfg.dot")} << ipdg::to_dot(icfg);
    std::ofstream{std::filesystem::path{dir} / (stem + ".ipdg.dot")} << ipdg::to_dot(ipdg, model);
}
}  // namespace

UnitReport analyze_unit(const std::string& path, const AnalysisConfig& config, const AnalyzeOptions& options)
{
    UnitReport u;
    u.path = path;
    const auto start = Clock::now();
    const auto deadline = start + config.time_budget;
    try
    {
        const auto sources = ast::read_sources({path});
        auto solc = config.solc;
        // Stage I alone needs only the AST.
        solc.want_bytecode = config.stages != Stages::stage1;
        auto t = Clock::now();
        auto model = ast::compile_and_load(sources, solc);
        u.compiler_version = model.compiler_version;
        u.timings.compile_ms = ms_since(t);

        t = Clock::now();
        const auto calls = ast::resolve_calls(model);
        const auto icfg = ipdg::build_icfg(model, calls);
        const auto pdg = ipdg::build_ipdg(icfg);
        const auto s1 = slicer::run_stage_one(icfg, pdg, config.allowlist, config.stages != Stages::stage2);
        u.timings.stage1_ms = ms_since(t);
        if (options.emit_dot)
            emit_dot(*options.emit_dot, path, icfg, pdg, model);

        for (const auto& w : s1.warnings)
            u.findings.push_back(finding_of(w, model));

        if (config.stages != Stages::stage1 && !s1.warnings.empty())
        {
            t = Clock::now();
            const symexec::Program program{model};
            const auto solver = symexec::make_default_backend();
            for (std::size_t i = 0; i < s1.warnings.size(); ++i)
            {
                const auto& w = s1.warnings[i];
                auto& f = u.findings[i];
                const auto wt = Clock::now();
                if (const auto* slice = slice_of(s1, w))
                {
                    const auto ppt = symexec::ppt_filter(w, *slice, model, icfg);
                    if (ppt.decision == symexec::PptDecision::drop)
                    {
                        f.ppt_drop = ppt.reason;
                        continue;
                    }
                }
                const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
                if (left.count() <= 0)
                {
                    f.verdict = VerdictRecord{"unknown-budget", "time budget", 0, 0, {}, nullptr};
                    continue;
                }
                auto budgets = config.budgets;
                budgets.time_budget = std::min(budgets.time_budget, left);
                symexec::Engine engine{program, *solver, budgets};
                f.verdict = record_of(engine.verify(w));
                f.stage2_ms = ms_since(wt);
            }
            u.timings.stage2_ms = ms_since(t);
        }
    }
    catch (const ast::CompileError& e)
    {
        u.error = std::string{"compile failed: "} + e.what() + (e.diagnostics().empty() ? "" : "\n" + e.diagnostics());
    }
    catch (const std::exception& e)
    {
        u.error = std::string{"analysis failed: "} + e.what();
    }
    u.timings.total_ms = ms_since(start);
    return u;
}

Report analyze(const std::vector<std::string>& paths, const AnalysisConfig& config, const AnalyzeOptions& options)
{
    config.validate();
    Report r;
    r.stages = std::string{to_string(config.stages)};
    r.config = config.to_json();
    r.config_fingerprint = config.fingerprint();
    r.units.resize(paths.size());

    // Bounded worker pool; results land in input order.
    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (auto i = next++; i < paths.size(); i = next++)
            r.units[i] = analyze_unit(paths[i], config, options);
    };
    const auto n = std::min(config.workers, paths.size());
    std::vector<std::thread> pool;
    for (std::size_t k = 1; k < n; ++k)
        pool.emplace_back(work);
    work();
    for (auto& t : pool)
        t.join();
    return r;
}

int exit_code(const Report& r)
{
    if (r.has_errors())
        return 2;
    return r.has_findings() ? 1 : 0;
}

}  // namespace rescan::cli
