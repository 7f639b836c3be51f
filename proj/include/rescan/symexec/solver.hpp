// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <rescan/symexec/term.hpp>

#include <chrono>
#include <memory>

namespace rescan::symexec
{
enum class SatStatus
{
    satisfiable,
    unsatisfiable,
    unknown,
};

std::string_view to_string(SatStatus s) noexcept;

struct SatResult
{
    SatStatus status = SatStatus::unknown;
    Assignment model;  ///< Every free variable of the query when satisfiable.
};

/// Satisfiability of a conjunction of terms, each read as "term != 0".
class SolverBackend
{
public:
    virtual ~SolverBackend() = default;
    virtual SatResult check(const std::vector<Term>& conjuncts, std::chrono::milliseconds timeout) = 0;
    [[nodiscard]] virtual std::size_t queries() const = 0;
};

/// In-process Z3 over 256-bit bitvectors; keccak is an uninterpreted function
/// per input length.
std::unique_ptr<SolverBackend> make_z3_backend();

/// SMT-LIB 2 solver run as a subprocess per query, e.g. `z3 -in` or `cvc5`.
/// `command` is the executable; `args` its arguments for reading a script
/// from standard input.
std::unique_ptr<SolverBackend> make_smtlib_backend(std::string command, std::vector<std::string> args);

/// The subprocess backend when RESCAN_SOLVER names a solver executable,
/// otherwise the in-process backend.
std::unique_ptr<SolverBackend> make_default_backend();

}  // namespace rescan::symexec
