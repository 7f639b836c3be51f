// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.

#include <rescan/cli/pipeline.hpp>
#include <rescan/cli/score.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace
{
namespace fs = std::filesystem;
using namespace rescan;

/// Files as given; directories contribute their .sol files, sorted.
std::vector<std::string> expand(const std::vector<std::string>& inputs)
{
    std::vector<std::string> out;
    for (const auto& in : inputs)
    {
        if (!fs::is_directory(in))
        {
            out.push_back(in);
            continue;
        }
        std::vector<std::string> found;
        for (const auto& e : fs::recursive_directory_iterator{in})
            if (e.is_regular_file() && e.path().extension() == ".sol")
                found.push_back(e.path().string());
        std::sort(found.begin(), found.end());
        out.insert(out.end(), found.begin(), found.end());
    }
    return out;
}

std::vector<std::string> report_files(const std::string& where)
{
    if (!fs::is_directory(where))
        return {where};
    std::vector<std::string> out;
    for (const auto& e : fs::directory_iterator{where})
        if (e.is_regular_file() && e.path().extension() == ".json")
            out.push_back(e.path().string());
    std::sort(out.begin(), out.end());
    return out;
}

void write_output(const std::string& text, const std::string& path)
{
    if (path.empty() || path == "-")
    {
        std::cout << text;
        return;
    }
    std::ofstream out{path};
    if (!out)
        throw std::runtime_error{"cannot write " + path};
    out << text;
}
}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"rescan: two-stage reentrancy analyzer for Solidity contracts"};
    app.require_subcommand(1);

    std::vector<std::string> paths;
    std::string config_file, stage, format = "text", emit_dot, solc_version, solc_path, output;
    long timeout = 0;
    std::size_t workers = 0;
    bool no_timings = false;
    auto* analyze = app.add_subcommand("analyze", "Analyze Solidity sources");
    analyze->add_option("paths", paths, "Source files or directories");
    analyze->add_option("--config", config_file, "JSON configuration file")->check(CLI::ExistingFile);
    analyze->add_option("--stage", stage, "Stages to run")->check(CLI::IsMember({"both", "1", "2"}));
    analyze->add_option("--timeout", timeout, "Time budget per source file, seconds")->check(CLI::PositiveNumber);
    analyze->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "text"}));
    analyze->add_option("--emit-dot", emit_dot, "Write I-CFG and I-PDG Graphviz files to this directory");
    analyze->add_option("--solc-version", solc_version, "Required compiler version");
    analyze->add_option("--solc-path", solc_path, "Compiler executable (default: RESCAN_SOLC, solc, solcjs)");
    analyze->add_option("--workers", workers, "Source files analyzed in parallel")->check(CLI::PositiveNumber);
    analyze->add_option("-o,--output", output, "Write the report here instead of stdout");
    analyze->add_flag("--no-timings", no_timings, "Omit timing fields from JSON output");

    std::string reports_dir, labels_file, granularity = "function", score_format = "text";
    bool include_all = false;
    auto* score = app.add_subcommand("score", "Precision, recall and F1 of reports against labels");
    score->add_option("--reports", reports_dir, "Directory of JSON reports, or one report")->required();
    score->add_option("--labels", labels_file, "Labeled corpus manifest")->required()->check(CLI::ExistingFile);
    score->add_option("--granularity", granularity, "Finding-to-label matching")
        ->check(CLI::IsMember({"contract", "function", "line"}));
    score->add_flag("--include-all", include_all, "Count every reported finding");
    score->add_option("--format", score_format, "Output format")->check(CLI::IsMember({"json", "text"}));

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const auto code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try
    {
        if (*analyze)
        {
            cli::AnalysisConfig config;
            if (!config_file.empty())
                config = cli::load_config(config_file);
            if (!stage.empty())
                config.stages = cli::parse_stages(stage);
            if (timeout > 0)
                config.time_budget = std::chrono::seconds{timeout};
            if (!solc_version.empty())
                config.solc.version = solc_version;
            if (!solc_path.empty())
                config.solc.solc_path = solc_path;
            if (workers > 0)
                config.workers = workers;
            config.validate();
            cli::AnalyzeOptions options;
            if (!emit_dot.empty())
                options.emit_dot = emit_dot;
            const auto report = cli::analyze(expand(paths), config, options);
            write_output(format == "json" ? cli::to_json(report, !no_timings).dump(2) + "\n" : cli::render_text(report),
                output);
            return cli::exit_code(report);
        }
        std::vector<cli::Report> reports;
        for (const auto& file : report_files(reports_dir))
        {
            std::ifstream in{file};
            if (!in)
                throw std::runtime_error{"cannot read " + file};
            nlohmann::json j;
            in >> j;
            reports.push_back(cli::report_from_json(j));
        }
        cli::ScoreOptions options;
        options.granularity = cli::parse_granularity(granularity);
        options.include_all = include_all;
        const auto card = cli::score(reports, cli::load_labels(labels_file), options);
        std::cout << (score_format == "json" ? cli::to_json(card).dump(2) + "\n" : cli::render_text(card));
        return 0;
    }
    catch (const std::exception& e)
    {
        std::cerr << "rescan: " << e.what() << "\n";
        return 2;
    }
}
