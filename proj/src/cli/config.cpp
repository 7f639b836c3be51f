// rescan: two-stage reentrancy analyzer for EVM smart contracts
// Copyright 2026 The rescan Authors.
// Licensed under the Apache License, Version 2.0.

#include <rescan/cli/config.hpp>

#include <rescan/evm/keccak.hpp>

#include <fstream>

namespace rescan::cli
{
namespace
{
template <typename T>
void read(const nlohmann::json& j, const char* key, T& out)
{
    if (const auto it = j.find(key); it != j.end() && !it->is_null())
        out = it->get<T>();
}

std::size_t positive(const nlohmann::json& j, const char* key, std::size_t fallback)
{
    const auto it = j.find(key);
    if (it == j.end() || it->is_null())
        return fallback;
    if (!it->is_number_integer() || it->get<long long>() <= 0)
        throw ConfigError{std::string{"'"} + key + "' must be a positive integer"};
    return it->get<std::size_t>();
}
}  // namespace

std::string_view to_string(Stages s) noexcept
{
    switch (s)
    {
    case Stages::stage1:
        return "1";
    case Stages::stage2:
        return "2";
    case Stages::both:
        return "both";
    }
    return "?";
}

Stages parse_stages(std::string_view text)
{
    if (text == "1" || text == "stage1")
        return Stages::stage1;
    if (text == "2" || text == "stage2")
        return Stages::stage2;
    if (text == "both")
        return Stages::both;
    throw ConfigError{"stages must be one of 1, 2, both; got '" + std::string{text} + "'"};
}

void AnalysisConfig::validate() const
{
    if (time_budget.count() <= 0)
        throw ConfigError{"time_budget must be positive"};
    if (budgets.max_blocks_per_path == 0 || budgets.max_paths == 0 || budgets.solver_timeout.count() <= 0 ||
        budgets.loop_unroll == 0 || budgets.max_call_depth == 0)
        throw ConfigError{"symbolic execution budgets must be positive"};
    if (workers == 0)
        throw ConfigError{"workers must be positive"};
}

nlohmann::json AnalysisConfig::to_json() const
{
    return {
        {"time_budget", time_budget.count()},
        {"stages", to_string(stages)},
        {"solc", {{"version", solc.version.value_or("")}, {"optimize", solc.optimize}}},
        {"allowlist", allowlist.entries},
        {"symexec",
            {
                {"max_blocks_per_path", budgets.max_blocks_per_path},
                {"max_paths", budgets.max_paths},
                {"solver_timeout_ms", budgets.solver_timeout.count()},
                {"loop_unroll", budgets.loop_unroll},
                {"max_call_depth", budgets.max_call_depth},
            }},
    };
}

std::string AnalysisConfig::fingerprint() const
{
    const auto text = to_json().dump();
    const auto digest = keccak256(bytes_view{reinterpret_cast<const uint8_t*>(text.data()), text.size()});
    return to_hex(bytes_view{digest.data(), std::size_t{8}});
}

AnalysisConfig config_from_json(const nlohmann::json& j, AnalysisConfig c)
{
    if (!j.is_object())
        throw ConfigError{"configuration must be a JSON object"};
    try
    {
        c.time_budget = std::chrono::seconds{positive(j, "time_budget", static_cast<std::size_t>(c.time_budget.count()))};
        c.workers = positive(j, "workers", c.workers);
        if (const auto it = j.find("stages"); it != j.end())
            c.stages = parse_stages(it->get<std::string>());
        if (const auto it = j.find("solc"); it != j.end())
        {
            std::string version, path, cache;
            read(*it, "version", version);
            read(*it, "path", path);
            read(*it, "cache_dir", cache);
            read(*it, "optimize", c.solc.optimize);
            if (!version.empty())
                c.solc.version = version;
            if (!path.empty())
                c.solc.solc_path = path;
            if (!cache.empty())
                c.solc.cache_dir = cache;
        }
        if (const auto it = j.find("allowlist"); it != j.end())
            for (const auto& e : *it)
                c.allowlist.entries.insert(e.get<std::string>());
        if (const auto it = j.find("symexec"); it != j.end())
        {
            auto& b = c.budgets;
            b.max_blocks_per_path = positive(*it, "max_blocks_per_path", b.max_blocks_per_path);
            b.max_paths = positive(*it, "max_paths", b.max_paths);
            b.solver_timeout = std::chrono::milliseconds{
                positive(*it, "solver_timeout_ms", static_cast<std::size_t>(b.solver_timeout.count()))};
            b.loop_unroll = positive(*it, "loop_unroll", b.loop_unroll);
            b.max_call_depth = positive(*it, "max_call_depth", b.max_call_depth);
        }
    }
    catch (const nlohmann::json::exception& e)
    {
        throw ConfigError{std::string{"bad configuration: "} + e.what()};
    }
    c.validate();
    return c;
}

AnalysisConfig load_config(const std::string& path, AnalysisConfig base)
{
    std::ifstream in{path};
    if (!in)
        throw ConfigError{"cannot read configuration " + path};
    nlohmann::json j;
    try
    {
        in >> j;
    }
    catch (const nlohmann::json::exception& e)
    {
        throw ConfigError{path + ": " + e.what()};
    }
    return config_from_json(j, std::move(base));
}

}  // namespace rescan::cli
