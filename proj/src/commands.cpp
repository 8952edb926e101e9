#include "aoicache/commands.hpp"

#include <atomic>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <thread>

#include <CLI11.hpp>

#include "aoicache/csv_io.hpp"
#include "aoicache/engine.hpp"
#include "aoicache/errors.hpp"
#include "aoicache/log.hpp"
#include "aoicache/random.hpp"

namespace aoicache {

namespace {

constexpr std::uint64_t kCatalogSalt = 0x636174616c6f67ULL;
constexpr std::uint64_t kFtplSalt = 0x6674706cULL;
constexpr std::uint64_t kRandomSalt = 0x72616e646f6dULL;

std::unique_ptr<Predictor> make_predictor(const RunConfig& c, const World& world) {
    if (c.predictor == "perfect") return std::make_unique<PerfectPredictor>(world.trace);
    if (c.predictor == "plugin") return std::make_unique<PluginPredictor>(c.plugin);
    return std::make_unique<WindowAveragePredictor>(c.predictor_window);
}

}  // namespace

World make_world(const RunConfig& c) {
    World world;
    if (c.source == "ingested") {
        auto result = ingest_trace(c.catalog_file, c.trace_file, c.ingest);
        for (const auto& d : result.diagnostics) log::info(d);
        world.catalog = std::make_shared<const Catalog>(std::move(result.catalog));
        world.trace = std::make_shared<const RequestTrace>(std::move(result.trace));
    } else {
        Rng rng(derive_seed(c.workload.seed, 0, kCatalogSalt));
        auto catalog = generate_catalog(c.workload, rng);
        auto trace = generate_requests(catalog, c.workload.popularity, c.workload.total_slots, c.workload.seed);
        world.catalog = std::make_shared<const Catalog>(std::move(catalog));
        world.trace = std::make_shared<const RequestTrace>(std::move(trace));
    }
    bool fits = world.catalog->empty();
    for (const auto& e : world.catalog->entries()) fits = fits || e.size <= c.params.s_max;
    if (!fits) log::warning("no content fits in the cache (s_max=" + std::to_string(c.params.s_max) + ")");
    return world;
}

StrategyBundle make_strategy(const std::string& name, const RunConfig& c, const World& world) {
    StrategyBundle b;
    if (name == "dtoca") {
        b.predictor = make_predictor(c, world);
        b.strategy = std::make_unique<DtOcaStrategy>("dtoca");
    } else if (name == "dtoca-pp") {
        b.predictor = std::make_unique<PerfectPredictor>(world.trace);
        b.strategy = std::make_unique<DtOcaStrategy>("dtoca-pp");
    } else if (name == "greedy-offline") {
        b.strategy = std::make_unique<GreedyOfflineStrategy>(world.trace);
    } else if (name == "oplfu") {
        b.predictor = make_predictor(c, world);
        b.strategy = std::make_unique<OpLfuStrategy>();
    } else if (name == "wlfu") {
        b.strategy = std::make_unique<WLfuStrategy>(c.wlfu_window);
    } else if (name == "fifo") {
        b.strategy = std::make_unique<FifoStrategy>();
    } else if (name == "ftpl") {
        b.strategy = std::make_unique<FtplStrategy>(c.ftpl_eta, derive_seed(c.strategy_seed, 0, kFtplSalt));
    } else if (name == "random") {
        b.strategy = std::make_unique<RandomStrategy>(derive_seed(c.strategy_seed, 0, kRandomSalt));
    } else {
        throw ConfigError("strategy.name", "unknown strategy '" + name + "'");
    }
    return b;
}

namespace {

RunOptions run_options(const RunConfig& c) {
    RunOptions o;
    o.clock = c.clock;
    o.params = c.params;
    o.schedule = c.schedule;
    return o;
}

RunLog run_checked(const std::string& name, const RunConfig& c, const World& world) {
    auto bundle = make_strategy(name, c, world);
    RunLog log = run_simulation(world, run_options(c), *bundle.strategy, bundle.predictor.get());
    const auto check = verify_double_entry(log, world);
    if (!check.ok) throw std::runtime_error(name + ": accounting mismatch: " + check.mismatches.front());
    return log;
}

/// Runs tasks on up to `jobs` threads; rethrows the first failure by index.
void run_parallel(int jobs, const std::vector<std::function<void()>>& tasks) {
    std::vector<std::exception_ptr> errors(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            try {
                tasks[i]();
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), tasks.size());
    std::vector<std::thread> threads;
    for (std::size_t i = 1; i < n; ++i) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::string path_in(const RunConfig& c, const std::string& name) {
    std::filesystem::create_directories(c.output_dir);
    return (std::filesystem::path(c.output_dir) / name).string();
}

void write_meta(const std::string& path, const Config& config, const std::vector<std::pair<std::string, const RunLog*>>& runs) {
    io::LineWriter out(path);
    out.write_line("[config]");
    for (const auto& key : Config::keys()) out.write_line(key + "=" + config.get(key));
    out.write_line("[modeling]");
    out.write_line("fee_fallback=aoi_at_period_start");
    out.write_line("release_of_uncached=ignored_with_warning");
    out.write_line("aoi_weighting=served_requests");
    out.write_line("money_resolution=0.000001");
    out.write_line("negative_fees=allowed");
    out.write_line("prefix_tie=larger_k");
    out.write_line("knapsack_tie=smaller_weight_then_lowest_ids");
    out.write_line("dt_update_phase=slot_0");
    out.write_line("benchmark_fill=skip_and_continue");
    out.write_line("slot_order=update,boundary,revision,serve,holding_cost");
    for (const auto& [label, log] : runs) {
        out.write_line("[run " + label + "]");
        out.write_line("strategy=" + log->meta.strategy);
        out.write_line("predictor=" + log->meta.predictor);
        out.write_line("trace_checksum=" + std::to_string(log->meta.trace_checksum));
        out.write_line("total_requests=" + std::to_string(log->meta.total_requests));
        out.write_line("fallback_events=" + std::to_string(log->meta.fallback_events));
        out.write_line("ignored_releases=" + std::to_string(log->meta.ignored_releases));
    }
    out.close();
}

void print_metrics(std::ostream& out, const std::string& label, const RunLog& log) {
    const auto m = compute_metrics(log);
    out << label << ": utility=" << m.total_utility << " hit_rate=" << io::format_double(m.hit_rate)
        << (m.no_requests ? " (no requests)" : "")
        << " avg_aoi=" << (m.avg_aoi ? io::format_double(*m.avg_aoi) : std::string("n/a"))
        << " occupancy=" << io::format_double(m.mean_occupancy) << "\n";
}

void echo_config(std::ostream& out, const Config& config) {
    out << "# effective configuration\n" << config.dump() << "# end of configuration\n";
}

int cmd_gen_workload(const Config& config, std::ostream& out) {
    const auto c = build_run_config(config);
    echo_config(out, config);
    const auto world = make_world(c);
    const std::string comment = "seed=" + std::to_string(c.workload.seed);
    write_catalog_csv(path_in(c, "catalog.csv"), *world.catalog, comment);
    write_trace_csv(path_in(c, "trace.csv"), *world.trace, comment);
    out << "contents=" << world.catalog->size() << " requests=" << world.trace->total_requests()
        << " trace_checksum=" << world.trace->checksum() << "\n";
    return 0;
}

int cmd_run(const Config& config, std::ostream& out) {
    const auto c = build_run_config(config);
    echo_config(out, config);
    const auto world = make_world(c);
    const RunLog log = run_checked(c.strategy, c, world);
    emit_report(path_in(c, "report.csv"), {{c.strategy, "base", &log}});
    emit_summary(path_in(c, "summary.csv"), {{c.strategy, "base", &log}});
    write_runlog(path_in(c, "runlog.csv"), log);
    write_meta(path_in(c, "meta.txt"), config, {{c.strategy, &log}});
    print_metrics(out, c.strategy, log);
    return 0;
}

int cmd_compare(const Config& config, std::ostream& out) {
    const auto c = build_run_config(config);
    if (c.strategies.empty()) throw ConfigError("strategy.list", "no strategies to compare");
    echo_config(out, config);
    const auto world = make_world(c);
    std::vector<RunLog> logs(c.strategies.size());
    std::vector<std::function<void()>> tasks;
    for (std::size_t i = 0; i < c.strategies.size(); ++i)
        tasks.push_back([&, i] { logs[i] = run_checked(c.strategies[i], c, world); });
    run_parallel(c.jobs, tasks);
    std::vector<ReportEntry> entries;
    std::vector<std::pair<std::string, const RunLog*>> runs;
    for (std::size_t i = 0; i < logs.size(); ++i) {
        if (logs[i].meta.trace_checksum != logs.front().meta.trace_checksum)
            throw std::runtime_error("strategies saw different traces");
        entries.push_back({c.strategies[i], "base", &logs[i]});
        runs.emplace_back(c.strategies[i], &logs[i]);
    }
    emit_report(path_in(c, "report.csv"), entries);
    emit_summary(path_in(c, "summary.csv"), entries);
    write_meta(path_in(c, "meta.txt"), config, runs);
    for (std::size_t i = 0; i < logs.size(); ++i) print_metrics(out, c.strategies[i], logs[i]);
    out << "trace_checksum=" << logs.front().meta.trace_checksum << "\n";
    return 0;
}

int cmd_sweep(const Config& config, std::ostream& out) {
    const auto base = build_run_config(config);
    if (base.sweep_axis.empty()) throw ConfigError("sweep.axis", "no sweep axis given");
    const std::string axis = Config::canonical(base.sweep_axis);
    if (!Config::known(axis) || axis == "preset" || axis.rfind("sweep.", 0) == 0 || axis.rfind("output.", 0) == 0)
        throw ConfigError("sweep.axis", "cannot sweep over '" + base.sweep_axis + "'");
    if (base.sweep_values.empty()) throw ConfigError("sweep.values", "empty sweep axis");
    const auto strategies = base.strategies.empty() ? std::vector<std::string>{base.strategy} : base.strategies;

    struct Point {
        Config config;
        RunConfig run;
        std::shared_ptr<const World> world;
    };
    std::vector<Point> points;
    for (const auto& value : base.sweep_values) {
        Config pc = config;
        pc.set(axis, value);
        points.push_back({pc, build_run_config(pc), nullptr});
    }
    echo_config(out, config);

    std::map<std::string, std::shared_ptr<const World>> worlds;
    for (auto& p : points) {
        auto& w = worlds[p.config.workload_signature()];
        if (!w) w = std::make_shared<const World>(make_world(p.run));
        p.world = w;
    }

    std::vector<RunLog> logs(points.size() * strategies.size());
    std::vector<std::function<void()>> tasks;
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = 0; j < strategies.size(); ++j)
            tasks.push_back([&, i, j] {
                logs[i * strategies.size() + j] = run_checked(strategies[j], points[i].run, *points[i].world);
            });
    run_parallel(base.jobs, tasks);

    std::vector<ReportEntry> entries;
    std::vector<std::pair<std::string, const RunLog*>> runs;
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = 0; j < strategies.size(); ++j) {
            const auto& log = logs[i * strategies.size() + j];
            entries.push_back({strategies[j], base.sweep_values[i], &log});
            runs.emplace_back(strategies[j] + " " + axis + "=" + base.sweep_values[i], &log);
        }
    const std::string stem = "sweep_" + axis;
    emit_report(path_in(base, stem + ".csv"), entries);
    emit_summary(path_in(base, stem + "_summary.csv"), entries);
    write_meta(path_in(base, stem + "_meta.txt"), config, runs);
    for (const auto& e : entries) print_metrics(out, e.strategy + " " + axis + "=" + e.param, *e.log);
    return 0;
}

int cmd_bound(const std::string& path, std::ostream& out) {
    if (!std::filesystem::exists(path)) throw ConfigError("runlog", "file not found: " + path);
    out << "# runlog " << path << "\n";
    const auto log = read_runlog(path);
    const auto bound = cr_bound(log);
    auto show = [](const auto& v) { return v ? io::format_double(static_cast<double>(*v)) : std::string("n/a"); };
    out << "alpha=" << show(bound.alpha) << "\n";
    out << "R=" << (bound.min_served ? std::to_string(*bound.min_served) : std::string("n/a")) << "\n";
    out << "beta=" << show(bound.beta) << "\n";
    out << "bound=" << (bound.value ? io::format_double(*bound.value) : std::string("undefined")) << "\n";
    return 0;
}

int cmd_ingest(const Config& config, std::ostream& out) {
    auto c = build_run_config(config);
    for (const auto& [key, path] :
         {std::pair{"workload.catalog_file", c.catalog_file}, std::pair{"workload.trace_file", c.trace_file}}) {
        if (path.empty()) throw ConfigError(key, "required for ingest");
        if (!std::filesystem::exists(path)) throw ConfigError(key, "file not found: " + path);
    }
    echo_config(out, config);
    const auto result = ingest_trace(c.catalog_file, c.trace_file, c.ingest);
    for (const auto& d : result.diagnostics) out << "# " << d << "\n";
    write_catalog_csv(path_in(c, "catalog.csv"), result.catalog);
    write_trace_csv(path_in(c, "trace.csv"), result.trace);
    out << "contents=" << result.catalog.size() << " requests=" << result.trace.total_requests()
        << " rejected_rows=" << result.diagnostics.size() << " trace_checksum=" << result.trace.checksum() << "\n";
    return 0;
}

/// Turns leftover "--key=value" / "--key value" arguments into overrides.
std::vector<std::pair<std::string, std::string>> parse_overrides(const std::vector<std::string>& extras) {
    std::vector<std::pair<std::string, std::string>> out;
    for (std::size_t i = 0; i < extras.size(); ++i) {
        const std::string& arg = extras[i];
        if (arg.rfind("--", 0) != 0 || arg.size() == 2) throw ConfigError(arg, "unexpected argument");
        const std::string body = arg.substr(2);
        std::string key;
        std::string value;
        if (const auto eq = body.find('='); eq != std::string::npos) {
            key = body.substr(0, eq);
            value = body.substr(eq + 1);
        } else if (i + 1 < extras.size() && extras[i + 1].rfind("--", 0) != 0) {
            key = body;
            value = extras[++i];
        } else {
            throw ConfigError(body, "override needs a value (--key=value)");
        }
        key = Config::canonical(key);
        if (!Config::known(key)) throw ConfigError(key, "unknown option --" + key);
        out.emplace_back(key, value);
    }
    return out;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Edge-caching economics simulator"};
    app.require_subcommand(1, 1);
    app.set_help_all_flag("--help-all", "Show help for every command");
    std::string config_path;
    std::string runlog_path;
    std::map<std::string, CLI::App*> subs;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"gen-workload", "Generate a catalog and request trace"},
        {"run", "Simulate one strategy"},
        {"compare", "Simulate every strategy in strategy.list on one workload"},
        {"sweep", "Simulate strategy.list over the values of sweep.axis"},
        {"ingest", "Validate and normalize a catalog and request trace"},
    };
    for (const auto& [name, help] : commands) {
        auto* s = app.add_subcommand(name, help + "; extra --key=value arguments override the config");
        s->add_option("config", config_path, "Config file with key=value lines")->check(CLI::ExistingFile);
        s->allow_extras();
        subs[name] = s;
    }
    auto* bound = app.add_subcommand("bound", "Print the competitive-ratio bound of a run log");
    bound->add_option("runlog", runlog_path, "runlog.csv written by run")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (bound->parsed()) return cmd_bound(runlog_path, out);
        for (const auto& [name, sub] : subs) {
            if (!sub->parsed()) continue;
            const auto overrides = parse_overrides(sub->remaining());
            const auto config =
                Config::load(config_path.empty() ? std::nullopt : std::optional(config_path), overrides);
            if (name == "gen-workload") return cmd_gen_workload(config, out);
            if (name == "run") return cmd_run(config, out);
            if (name == "compare") return cmd_compare(config, out);
            if (name == "sweep") return cmd_sweep(config, out);
            if (name == "ingest") return cmd_ingest(config, out);
        }
        err << "error: no command\n";
        return 2;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace aoicache
