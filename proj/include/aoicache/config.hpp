#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aoicache/core.hpp"
#include "aoicache/dt.hpp"
#include "aoicache/predictor.hpp"
#include "aoicache/workload.hpp"

namespace aoicache {

/// Flat key=value configuration with dotted keys. Every key is known up front;
/// values are kept as text and typed by build_run_config.
class Config {
public:
    /// Defaults of the "small" preset.
    Config();

    /// Names of the shipped presets.
    static std::vector<std::string> presets();
    /// Every known key, sorted.
    static std::vector<std::string> keys();
    static bool known(const std::string& key);
    /// Maps short override names (e.g. "lambda") to full keys; identity otherwise.
    static std::string canonical(const std::string& key);

    /// Throws ConfigError for unknown keys.
    void set(const std::string& key, const std::string& value);
    const std::string& get(const std::string& key) const;
    void apply_preset(const std::string& name);

    /// Layering: defaults, then the preset (from overrides, file or default),
    /// then the file, then the overrides.
    static Config load(const std::optional<std::string>& path, const std::vector<std::pair<std::string, std::string>>& overrides);
    /// "key=value" lines. Throws ConfigError on unknown keys or bad syntax.
    static std::vector<std::pair<std::string, std::string>> parse_text(const std::string& text, const std::string& origin);

    /// Sorted key=value lines.
    std::string dump() const;
    /// key=value lines of the workload-defining keys (for sharing workloads).
    std::string workload_signature() const;

private:
    std::map<std::string, std::string> values_;
};

struct RunConfig {
    SimClock clock = SimClock::make(10, 3000);
    EconomicParams params;
    UpdateSchedule schedule;

    /// "generated" or "ingested".
    std::string source = "generated";
    WorkloadConfig workload;
    std::string catalog_file;
    std::string trace_file;
    IngestOptions ingest;

    std::string strategy = "dtoca";
    std::vector<std::string> strategies;
    std::int64_t wlfu_window = 10;
    double ftpl_eta = 10.0;
    std::uint64_t strategy_seed = 1;

    /// "window-average", "perfect" or "plugin".
    std::string predictor = "window-average";
    std::int64_t predictor_window = 10;
    PluginOptions plugin;

    std::string sweep_axis;
    std::vector<std::string> sweep_values;

    std::string output_dir = "out";
    int jobs = 1;
};

/// Types and validates every key. Throws ConfigError naming the key.
RunConfig build_run_config(const Config& config);

/// Comma-separated list, trimmed, empty items dropped.
std::vector<std::string> split_list(const std::string& text);

}  // namespace aoicache
