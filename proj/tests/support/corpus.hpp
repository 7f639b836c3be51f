// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <rescan/slicer/slicer.hpp>

#include <memory>
#include <string>
#include <vector>

namespace rescan::test
{
/// Absolute path of the authored corpus directory.
std::string corpus_dir();

/// Corpus file names (*.sol), sorted.
std::vector<std::string> corpus_files();

/// One compiled source with its graphs. Not movable: graphs point into the model.
struct Analyzed
{
    ast::ContractModel model;
    ast::CallGraph calls;
    ipdg::Icfg icfg;
    ipdg::Ipdg ipdg;

    Analyzed() = default;
    Analyzed(const Analyzed&) = delete;
    Analyzed& operator=(const Analyzed&) = delete;
};

/// Compiles a corpus file (or an absolute path) and builds its graphs.
std::unique_ptr<Analyzed> analyze_source(const std::string& name, bool bytecode = false);

/// Compiles inline source text under the given file name.
std::unique_ptr<Analyzed> analyze_text(const std::string& name, const std::string& text, bool bytecode = false);

/// Statement nodes whose span starts on `line`, excluding entry and exit.
std::vector<ast::NodeId> nodes_on_line(const ast::ContractModel& model, const std::string& file, std::size_t line);

}  // namespace rescan::test
