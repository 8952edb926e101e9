#include "aoicache/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "aoicache/csv_io.hpp"
#include "aoicache/errors.hpp"
#include "aoicache/log.hpp"

namespace aoicache {

namespace {

const std::map<std::string, std::string>& defaults() {
    static const std::map<std::string, std::string> table = [] {
        const WorkloadConfig w;
        const EconomicParams e;
        const auto& p = w.popularity;
        return std::map<std::string, std::string>{
            {"preset", "small"},
            {"clock.b", "10"},
            {"clock.T", std::to_string(w.total_slots)},
            {"clock.L", ""},
            {"clock.slot_seconds", "1"},
            {"economics.lambda", e.lambda.to_string()},
            {"economics.c_d", e.c_d.to_string()},
            {"economics.c_a", e.c_a.to_string()},
            {"economics.phi", std::to_string(e.phi)},
            {"economics.s_max", std::to_string(e.s_max)},
            {"dt.interval", "1"},
            {"workload.source", "generated"},
            {"workload.contents", std::to_string(w.total_contents)},
            {"workload.size_min", std::to_string(w.size_range.min)},
            {"workload.size_max", std::to_string(w.size_range.max)},
            {"workload.price_min", std::to_string(w.price_range.min)},
            {"workload.price_max", std::to_string(w.price_range.max)},
            {"workload.fee_ceiling", w.fee_ceiling.to_string()},
            {"workload.seed", std::to_string(w.seed)},
            {"workload.popularity", to_string(p.kind)},
            {"workload.peak_rate_scale", io::format_double(p.peak_rate_scale)},
            {"workload.pareto_shape", io::format_double(p.pareto_shape)},
            {"workload.peak_rate_cap", io::format_double(p.peak_rate_cap)},
            {"workload.constant_rate", io::format_double(p.constant_rate)},
            {"workload.rise_slot", io::format_double(p.rise_slot)},
            {"workload.max_age", std::to_string(p.max_age)},
            {"workload.catalog_file", ""},
            {"workload.trace_file", ""},
            {"workload.min_total_requests", "0"},
            {"strategy.name", "dtoca"},
            {"strategy.list", "dtoca,dtoca-pp,oplfu,wlfu,fifo,ftpl,random"},
            {"strategy.wlfu_window", "0"},
            {"strategy.ftpl_eta", "10"},
            {"strategy.seed", "1"},
            {"predictor.kind", "window-average"},
            {"predictor.window", "0"},
            {"predictor.plugin_command", ""},
            {"predictor.timeout_ms", "10000"},
            {"sweep.axis", ""},
            {"sweep.values", ""},
            {"output.dir", "out"},
            {"run.jobs", "1"},
            {"log.level", "warning"},
        };
    }();
    return table;
}

const std::map<std::string, std::map<std::string, std::string>>& preset_table() {
    static const std::map<std::string, std::map<std::string, std::string>> table{
        {"small", {}},
        {"tiny", {{"clock.T", "300"}, {"workload.contents", "300"}}},
        {"full", {{"clock.T", "30000"}, {"workload.contents", "300000"}}},
    };
    return table;
}

const std::map<std::string, std::string>& aliases() {
    static const std::map<std::string, std::string> table{
        {"lambda", "economics.lambda"}, {"c_d", "economics.c_d"},    {"c_a", "economics.c_a"},
        {"phi", "economics.phi"},       {"s_max", "economics.s_max"}, {"b", "clock.b"},
        {"T", "clock.T"},               {"L", "clock.L"},             {"delta", "dt.interval"},
        {"seed", "workload.seed"},      {"contents", "workload.contents"}, {"strategy", "strategy.name"},
        {"strategies", "strategy.list"}, {"predictor", "predictor.kind"}, {"axis", "sweep.axis"},
        {"values", "sweep.values"},     {"out", "output.dir"},        {"jobs", "run.jobs"},
    };
    return table;
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::int64_t get_int(const Config& c, const std::string& key) {
    try {
        return io::parse_int(c.get(key));
    } catch (const std::invalid_argument&) {
        throw ConfigError(key, "expected an integer, got '" + c.get(key) + "'");
    }
}

double get_double(const Config& c, const std::string& key) {
    try {
        return io::parse_double(c.get(key));
    } catch (const std::invalid_argument&) {
        throw ConfigError(key, "expected a number, got '" + c.get(key) + "'");
    }
}

Money get_money(const Config& c, const std::string& key) {
    try {
        return Money::parse(c.get(key));
    } catch (const std::invalid_argument&) {
        throw ConfigError(key, "expected a decimal amount with at most 6 fractional digits, got '" + c.get(key) + "'");
    }
}

std::int64_t positive(const Config& c, const std::string& key) {
    const auto v = get_int(c, key);
    if (v < 1) throw ConfigError(key, "must be >= 1");
    return v;
}

std::int64_t non_negative(const Config& c, const std::string& key) {
    const auto v = get_int(c, key);
    if (v < 0) throw ConfigError(key, "must be >= 0");
    return v;
}

const std::set<std::string> kStrategies{"dtoca", "dtoca-pp", "greedy-offline", "oplfu", "wlfu", "fifo", "ftpl", "random"};

void check_strategy(const std::string& key, const std::string& name) {
    if (!kStrategies.count(name)) {
        std::string known;
        for (const auto& s : kStrategies) known += (known.empty() ? "" : ", ") + s;
        throw ConfigError(key, "unknown strategy '" + name + "' (known: " + known + ")");
    }
}

}  // namespace

Config::Config() : values_(defaults()) {}

std::vector<std::string> Config::presets() {
    std::vector<std::string> out;
    for (const auto& [name, values] : preset_table()) out.push_back(name);
    return out;
}

std::vector<std::string> Config::keys() {
    std::vector<std::string> out;
    for (const auto& [key, value] : defaults()) out.push_back(key);
    return out;
}

bool Config::known(const std::string& key) { return defaults().count(key) != 0; }

std::string Config::canonical(const std::string& key) {
    auto it = aliases().find(key);
    return it == aliases().end() ? key : it->second;
}

void Config::set(const std::string& key, const std::string& value) {
    if (!known(key)) throw ConfigError(key, "unknown configuration key");
    values_[key] = value;
}

const std::string& Config::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(key, "unknown configuration key");
    return it->second;
}

void Config::apply_preset(const std::string& name) {
    auto it = preset_table().find(name);
    if (it == preset_table().end()) throw ConfigError("preset", "unknown preset '" + name + "'");
    for (const auto& [key, value] : it->second) values_[key] = value;
    values_["preset"] = name;
}

std::vector<std::pair<std::string, std::string>> Config::parse_text(const std::string& text,
                                                                    const std::string& origin) {
    std::vector<std::pair<std::string, std::string>> out;
    std::istringstream in(text);
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        const std::string where = origin + ":" + std::to_string(number);
        if (eq == std::string::npos) throw ConfigError(where, "expected key=value, got '" + t + "'");
        const std::string key = trim(std::string_view(t).substr(0, eq));
        if (!known(key)) throw ConfigError(key, "unknown configuration key (" + where + ")");
        out.emplace_back(key, trim(std::string_view(t).substr(eq + 1)));
    }
    return out;
}

Config Config::load(const std::optional<std::string>& path,
                    const std::vector<std::pair<std::string, std::string>>& overrides) {
    std::vector<std::pair<std::string, std::string>> file;
    if (path) {
        std::ifstream in(*path);
        if (!in) throw ConfigError("config", "cannot read config file " + *path);
        std::stringstream ss;
        ss << in.rdbuf();
        file = parse_text(ss.str(), *path);
    }
    std::string preset = "small";
    for (const auto& [k, v] : file)
        if (k == "preset") preset = v;
    for (const auto& [k, v] : overrides)
        if (canonical(k) == "preset") preset = v;
    Config c;
    c.apply_preset(preset);
    for (const auto& [k, v] : file) c.set(k, v);
    for (const auto& [k, v] : overrides) c.set(canonical(k), v);
    return c;
}

std::string Config::dump() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
    return out;
}

std::string Config::workload_signature() const {
    std::string out;
    for (const auto& [k, v] : values_)
        if (k.rfind("workload.", 0) == 0 || k == "clock.T") out += k + "=" + v + "\n";
    return out;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    for (auto part : io::split(text, ',')) {
        auto t = trim(part);
        if (!t.empty()) out.push_back(std::move(t));
    }
    return out;
}

RunConfig build_run_config(const Config& c) {
    RunConfig r;
    const auto b = positive(c, "clock.b");
    const auto T = positive(c, "clock.T");
    std::optional<std::int64_t> L;
    if (!c.get("clock.L").empty()) L = positive(c, "clock.L");
    r.clock = SimClock::make(b, T, L);
    r.clock.slot_seconds = get_double(c, "clock.slot_seconds");
    if (!(r.clock.slot_seconds > 0)) throw ConfigError("clock.slot_seconds", "must be > 0");

    r.params.lambda = get_money(c, "economics.lambda");
    r.params.c_d = get_money(c, "economics.c_d");
    r.params.c_a = get_money(c, "economics.c_a");
    r.params.phi = non_negative(c, "economics.phi");
    r.params.s_max = non_negative(c, "economics.s_max");
    r.params.validate();

    r.schedule.interval = positive(c, "dt.interval");

    r.source = c.get("workload.source");
    auto& w = r.workload;
    w.total_slots = T;
    w.total_contents = positive(c, "workload.contents");
    w.size_range = {positive(c, "workload.size_min"), positive(c, "workload.size_max")};
    if (w.size_range.max < w.size_range.min) throw ConfigError("workload.size_max", "must be >= workload.size_min");
    w.price_range = {non_negative(c, "workload.price_min"), non_negative(c, "workload.price_max")};
    if (w.price_range.max < w.price_range.min) throw ConfigError("workload.price_max", "must be >= workload.price_min");
    w.fee_ceiling = get_money(c, "workload.fee_ceiling");
    if (w.fee_ceiling < Money{}) throw ConfigError("workload.fee_ceiling", "must be >= 0");
    w.seed = static_cast<std::uint64_t>(non_negative(c, "workload.seed"));
    try {
        w.popularity.kind = parse_popularity_kind(c.get("workload.popularity"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError("workload.popularity", e.what());
    }
    w.popularity.peak_rate_scale = get_double(c, "workload.peak_rate_scale");
    w.popularity.pareto_shape = get_double(c, "workload.pareto_shape");
    w.popularity.peak_rate_cap = get_double(c, "workload.peak_rate_cap");
    w.popularity.constant_rate = get_double(c, "workload.constant_rate");
    w.popularity.rise_slot = get_double(c, "workload.rise_slot");
    w.popularity.max_age = non_negative(c, "workload.max_age");
    w.validate();

    r.catalog_file = c.get("workload.catalog_file");
    r.trace_file = c.get("workload.trace_file");
    r.ingest.min_total_requests = non_negative(c, "workload.min_total_requests");
    if (r.source == "ingested") {
        for (const auto& [key, path] : {std::pair{"workload.catalog_file", r.catalog_file},
                                        std::pair{"workload.trace_file", r.trace_file}}) {
            if (path.empty()) throw ConfigError(key, "required when workload.source=ingested");
            if (!std::filesystem::exists(path)) throw ConfigError(key, "file not found: " + path);
        }
    } else if (r.source != "generated") {
        throw ConfigError("workload.source", "expected 'generated' or 'ingested', got '" + r.source + "'");
    }

    r.strategy = c.get("strategy.name");
    check_strategy("strategy.name", r.strategy);
    r.strategies = split_list(c.get("strategy.list"));
    std::set<std::string> seen;
    for (const auto& s : r.strategies) {
        check_strategy("strategy.list", s);
        if (!seen.insert(s).second) throw ConfigError("strategy.list", "duplicate strategy '" + s + "'");
    }
    const auto wlfu = non_negative(c, "strategy.wlfu_window");
    r.wlfu_window = wlfu == 0 ? b : wlfu;
    r.ftpl_eta = get_double(c, "strategy.ftpl_eta");
    if (!(r.ftpl_eta >= 0)) throw ConfigError("strategy.ftpl_eta", "must be >= 0");
    r.strategy_seed = static_cast<std::uint64_t>(non_negative(c, "strategy.seed"));

    r.predictor = c.get("predictor.kind");
    if (r.predictor != "window-average" && r.predictor != "perfect" && r.predictor != "plugin")
        throw ConfigError("predictor.kind", "expected window-average, perfect or plugin, got '" + r.predictor + "'");
    const auto pw = non_negative(c, "predictor.window");
    r.predictor_window = pw == 0 ? b : pw;
    r.plugin.command = c.get("predictor.plugin_command");
    r.plugin.timeout = std::chrono::milliseconds(positive(c, "predictor.timeout_ms"));
    r.plugin.fallback_window = b;
    if (r.predictor == "plugin" && r.plugin.command.empty())
        throw ConfigError("predictor.plugin_command", "required when predictor.kind=plugin");

    r.sweep_axis = c.get("sweep.axis");
    r.sweep_values = split_list(c.get("sweep.values"));

    r.output_dir = c.get("output.dir");
    if (r.output_dir.empty()) throw ConfigError("output.dir", "must not be empty");
    r.jobs = static_cast<int>(positive(c, "run.jobs"));

    const auto& level = c.get("log.level");
    if (level == "debug") log::set_level(log::Level::debug);
    else if (level == "info") log::set_level(log::Level::info);
    else if (level == "warning") log::set_level(log::Level::warning);
    else if (level == "error") log::set_level(log::Level::error);
    else if (level == "off") log::set_level(log::Level::off);
    else throw ConfigError("log.level", "expected debug, info, warning, error or off");
    return r;
}

}  // namespace aoicache
