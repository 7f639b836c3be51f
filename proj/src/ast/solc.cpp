// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.

#include <rescan/ast/solc.hpp>
#include <rescan/evm/keccak.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <sys/wait.h>

namespace fs = std::filesystem;

namespace rescan::ast
{
namespace
{
std::string shell_quote(const std::string& s)
{
    std::string out = "'";
    for (const char c : s)
        out += c == '\'' ? std::string{"'\\''"} : std::string(1, c);
    return out + "'";
}

std::string read_file(const fs::path& p)
{
    std::ifstream in{p, std::ios::binary};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool on_path(const std::string& name)
{
    const char* path = std::getenv("PATH");
    if (!path)
        return false;
    std::stringstream ss{path};
    std::string dir;
    while (std::getline(ss, dir, ':'))
    {
        std::error_code ec;
        const auto p = fs::path{dir.empty() ? "." : dir} / name;
        if (fs::is_regular_file(p, ec) && access(p.c_str(), X_OK) == 0)
            return true;
    }
    return false;
}

struct TempDir
{
    fs::path path;
    TempDir()
    {
        std::random_device rd;
        path = fs::temp_directory_path() /
               ("rescan-solc-" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir()
    {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

/// Runs `cmd` with stdin from `in`, capturing stdout and stderr.
int run(const std::string& cmd, const std::string& in, std::string& out, std::string& err)
{
    TempDir tmp;
    const auto in_path = tmp.path / "in";
    const auto out_path = tmp.path / "out";
    const auto err_path = tmp.path / "err";
    std::ofstream{in_path, std::ios::binary} << in;
    const auto full = cmd + " < " + shell_quote(in_path) + " > " + shell_quote(out_path) +
                      " 2> " + shell_quote(err_path);
    const int status = std::system(full.c_str());
    out = read_file(out_path);
    err = read_file(err_path);
    if (status == -1)
        return -1;
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string hex_digest(const std::string& s)
{
    const auto h = keccak256(bytes_view{reinterpret_cast<const uint8_t*>(s.data()), s.size()});
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    for (const auto b : h)
    {
        out += digits[b >> 4];
        out += digits[b & 15];
    }
    return out;
}

std::optional<std::string> cache_directory(const SolcOptions& options)
{
    if (options.cache_dir)
        return options.cache_dir;
    if (const char* env = std::getenv("RESCAN_SOLC_CACHE"); env && *env)
        return std::string{env};
    return std::nullopt;
}
}  // namespace

std::string locate_solc(const SolcOptions& options)
{
    if (options.solc_path && !options.solc_path->empty())
        return *options.solc_path;
    if (const char* env = std::getenv("RESCAN_SOLC"); env && *env)
        return env;
    for (const char* name : {"solc", "solcjs"})
        if (on_path(name))
            return name;
    return {};
}

std::string solc_version(const std::string& compiler)
{
    std::string out, err;
    if (run(shell_quote(compiler) + " --version", "", out, err) != 0)
        throw CompileError{"cannot run compiler '" + compiler + "'", err};
    // solc prints "Version: X", solcjs prints just "X".
    auto pos = out.find("Version: ");
    std::string v = pos == std::string::npos ? out : out.substr(pos + 9);
    if (const auto nl = v.find_first_of("\r\n"); nl != std::string::npos)
        v.resize(nl);
    while (!v.empty() && v.back() == ' ')
        v.pop_back();
    // Drop the platform suffix solcjs appends.
    if (const auto em = v.find(".Emscripten"); em != std::string::npos)
        v.resize(em);
    return v;
}

nlohmann::json make_standard_input(const std::vector<SourceInput>& sources, const SolcOptions& options)
{
    nlohmann::json in;
    in["language"] = "Solidity";
    for (const auto& s : sources)
        in["sources"][s.path]["content"] = s.content;
    auto& settings = in["settings"];
    settings["optimizer"]["enabled"] = options.optimize;
    nlohmann::json per_contract = nlohmann::json::array();
    if (options.want_bytecode)
        per_contract = {"evm.deployedBytecode.object", "evm.deployedBytecode.sourceMap",
            "evm.methodIdentifiers", "storageLayout"};
    else
        per_contract = {"evm.methodIdentifiers"};
    settings["outputSelection"]["*"][""] = {"ast"};
    settings["outputSelection"]["*"]["*"] = per_contract;
    return in;
}

CompileOutput run_solc(const std::vector<SourceInput>& sources, const SolcOptions& options)
{
    const auto compiler = locate_solc(options);
    if (compiler.empty())
        throw CompileError{"no Solidity compiler found (set --solc-path or RESCAN_SOLC)", ""};

    CompileOutput result;
    result.compiler = compiler;
    result.compiler_version = solc_version(compiler);
    if (options.version && result.compiler_version.rfind(*options.version, 0) != 0)
        throw CompileError{"compiler version " + result.compiler_version +
                               " does not match requested " + *options.version,
            ""};

    const auto input = make_standard_input(sources, options).dump();
    const auto cache = cache_directory(options);
    fs::path cache_file;
    if (cache)
    {
        cache_file = fs::path{*cache} / (hex_digest(result.compiler_version + "\n" + input) + ".json");
        std::error_code ec;
        if (fs::is_regular_file(cache_file, ec))
            result.output = nlohmann::json::parse(read_file(cache_file), nullptr, false);
    }

    if (result.output.is_null() || result.output.is_discarded())
    {
        std::string out, err;
        const int code = run(shell_quote(compiler) + " --standard-json", input, out, err);
        // solcjs may print banner lines before the JSON document.
        const auto brace = out.find('{');
        if (brace == std::string::npos)
            throw CompileError{"compiler produced no output (exit " + std::to_string(code) + ")", err};
        result.output = nlohmann::json::parse(out.substr(brace), nullptr, false);
        if (result.output.is_discarded())
            throw CompileError{"compiler output is not JSON", err + out};
    }

    std::string errors;
    if (const auto it = result.output.find("errors"); it != result.output.end())
    {
        for (const auto& e : *it)
        {
            const auto msg = e.value("formattedMessage", e.value("message", std::string{}));
            if (e.value("severity", "") == "error")
                errors += msg + "\n";
            else
                result.warnings.push_back(msg);
        }
    }
    if (!errors.empty())
        throw CompileError{"compilation failed", errors};

    if (cache && !cache_file.empty())
    {
        std::error_code ec;
        fs::create_directories(cache_file.parent_path(), ec);
        const auto tmp = cache_file.string() + ".tmp" + std::to_string(std::random_device{}());
        std::ofstream{tmp, std::ios::binary} << result.output.dump();
        fs::rename(tmp, cache_file, ec);
    }
    return result;
}

}  // namespace rescan::ast
