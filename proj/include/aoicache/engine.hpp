#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aoicache/core.hpp"
#include "aoicache/dt.hpp"
#include "aoicache/predictor.hpp"
#include "aoicache/strategies.hpp"

namespace aoicache {

struct RunOptions {
    SimClock clock = SimClock::make(10, 3000);
    EconomicParams params;
    UpdateSchedule schedule;
    /// Optional second strategy planned on the same boundary context as the
    /// main one (same cache, fees and purchasable set) and scored against the
    /// true requests without being executed. Must not revise mid-period.
    Strategy* shadow = nullptr;
};

/// One (content, period) with a non-empty realized prefix.
struct ContentPeriodRecord {
    std::int64_t period = 0;
    ContentId id = 0;
    bool purchase = false;
    /// Realized number of leading cached slots.
    std::int64_t prefix_len = 0;
    /// R'_n(l): requests served while cached.
    std::int64_t served = 0;
    /// Sum of served * delivery AoI.
    std::int64_t aoi_weighted_sum = 0;
    Money fee;
    std::int64_t size = 1;
    Money price;
    Money utility;
};

struct PeriodTotals {
    std::int64_t period = 0;
    Money utility;
    std::int64_t requests = 0;
    std::int64_t served = 0;
    std::int64_t aoi_weighted_sum = 0;
    /// Sum of slot occupancies over the period.
    std::int64_t occupancy_sum = 0;
    std::int64_t purchases = 0;
    std::optional<Money> shadow_utility;
};

struct RunMeta {
    std::string strategy;
    std::string predictor;
    std::int64_t b = 1;
    Slot total_slots = 0;
    EconomicParams params;
    Slot update_interval = 1;
    std::uint64_t trace_checksum = 0;
    std::int64_t total_requests = 0;
    std::int64_t fallback_events = 0;
    std::int64_t ignored_releases = 0;
};

struct RunLog {
    RunMeta meta;
    std::vector<ContentPeriodRecord> rows;
    std::vector<PeriodTotals> periods;
    /// Occupied cache units while serving each slot.
    std::vector<std::int64_t> occupancy;
    Money total_utility;
};

/// Runs the slot loop. Per slot: twin update, boundary decisions, mid-period
/// revisions, serving, caching cost. Throws CapacityExceeded or PlanError when
/// the strategy breaks the rules.
RunLog run_simulation(const World& world, const RunOptions& options, Strategy& strategy,
                      Predictor* predictor = nullptr);

struct Metrics {
    Money total_utility;
    std::int64_t requests = 0;
    std::int64_t served = 0;
    double hit_rate = 0.0;
    /// True when the trace holds no requests (hit_rate is then 0).
    bool no_requests = false;
    /// Request-weighted delivery AoI over served requests; nullopt if none.
    std::optional<double> avg_aoi;
    /// Mean occupancy as a fraction of s_max.
    double mean_occupancy = 0.0;
    std::int64_t peak_occupancy = 0;
};

Metrics compute_metrics(const RunLog& log);

struct DoubleEntryReport {
    bool ok = true;
    std::vector<std::string> mismatches;
};

/// Recomputes every row with realized_utility from the true trace and checks
/// rows, period totals and the run total against it.
DoubleEntryReport verify_double_entry(const RunLog& log, const World& world);

struct CrBound {
    std::optional<double> alpha;
    std::optional<std::int64_t> min_served;
    std::optional<double> beta;
    /// 1 + 1 / (alpha * R - beta - 1) when the denominator is positive.
    std::optional<double> value;
};

/// Bound components over the cached content-periods of a run.
CrBound cr_bound(const RunLog& log);
/// 1 + 1 / (alpha * r - beta - 1), or nullopt when the denominator is <= 0.
std::optional<double> cr_bound_value(double alpha, double r, double beta);

/// offline / online, or nullopt when the online utility is not positive.
std::optional<double> empirical_cr(Money offline_optimum, Money online_utility);

struct ReportEntry {
    std::string strategy;
    std::string param;
    const RunLog* log = nullptr;
};

/// Per-period rows: strategy;param;period;utility;hit_rate;avg_aoi;occupancy.
void emit_report(const std::string& path, const std::vector<ReportEntry>& entries);
/// One row per run with whole-run metrics.
void emit_summary(const std::string& path, const std::vector<ReportEntry>& entries);

/// Content-period rows with a "# key=value" metadata preamble.
void write_runlog(const std::string& path, const RunLog& log);
/// Reads what write_runlog wrote (metadata and rows only).
RunLog read_runlog(const std::string& path);

}  // namespace aoicache
