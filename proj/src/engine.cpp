#include "aoicache/engine.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "aoicache/csv_io.hpp"
#include "aoicache/errors.hpp"
#include "aoicache/log.hpp"

namespace aoicache {

namespace {

struct ActiveRow {
    const ContentCatalogEntry* entry = nullptr;
    bool purchase = false;
    /// Planned release offset: cached for offsets [0, end).
    std::int64_t end = 0;
    Money fee;
    std::int64_t slots = 0;
    std::int64_t served = 0;
    std::int64_t aoi_sum = 0;
    Money utility;
};

Money purchase_cost(const ContentCatalogEntry& e, const EconomicParams& p) { return e.price + p.c_d * e.size; }

void validate_plan(const PeriodPlan& plan, const StrategyContext& ctx, const std::string& who) {
    for (const auto& [id, row] : plan) {
        const std::string tag = who + ": content " + std::to_string(id) + " in period " + std::to_string(ctx.period);
        if (row.prefix_len < 0 || row.prefix_len > ctx.period_length)
            throw PlanError(tag + " has prefix " + std::to_string(row.prefix_len) + " outside [0, b]");
        if (row.purchase && row.prefix_len < 1) throw PlanError(tag + " is purchased but never cached");
        if (row.purchase && !std::binary_search(ctx.purchasable.begin(), ctx.purchasable.end(), id))
            throw PlanError(tag + " is purchased outside the purchasable set");
        if (!row.purchase && row.prefix_len > 0 && !ctx.is_cached(id))
            throw PlanError(tag + " is kept without purchase but was not cached");
    }
}

std::vector<std::int64_t> period_requests(const RequestTrace& trace, ContentId id, Slot start, std::int64_t b) {
    std::vector<std::int64_t> out(static_cast<std::size_t>(b));
    trace.copy_counts(id, start, out);
    return out;
}

Money shadow_utility(const PeriodPlan& plan, const StrategyContext& ctx, const World& world) {
    std::int64_t used = 0;
    Money total;
    for (const auto& [id, row] : plan) {
        if (row.prefix_len == 0) continue;
        const auto& e = world.catalog->at(id);
        used += e.size;
        total += realized_utility(e, row, ctx.fee(id), period_requests(*world.trace, id, ctx.now, ctx.period_length),
                                  ctx.params);
    }
    if (used > ctx.params.s_max)
        throw CapacityExceeded("shadow plan for period " + std::to_string(ctx.period) + " needs " +
                               std::to_string(used) + " units");
    return total;
}

}  // namespace

RunLog run_simulation(const World& world, const RunOptions& options, Strategy& strategy, Predictor* predictor) {
    options.params.validate();
    options.schedule.validate();
    const auto& clock = options.clock;
    const auto& params = options.params;
    const std::int64_t b = clock.period_length();
    const auto& catalog = *world.catalog;
    const auto& trace = *world.trace;

    RunLog log;
    log.meta.strategy = strategy.name();
    log.meta.predictor = predictor != nullptr ? predictor->name() : "none";
    log.meta.b = b;
    log.meta.total_slots = clock.total_slots();
    log.meta.params = params;
    log.meta.update_interval = options.schedule.interval;
    log.meta.trace_checksum = trace.checksum();
    const auto slot_totals = trace.slot_totals(clock.total_slots());
    for (auto n : slot_totals) log.meta.total_requests += n;
    log.occupancy.assign(static_cast<std::size_t>(clock.total_slots()), 0);

    CacheState state;
    std::optional<DtSnapshot> snapshot;
    std::map<ContentId, AverageAoi> previous;  // served AoI of the period before

    for (std::int64_t l = 0; l < clock.periods(); ++l) {
        const Slot start = clock.first_slot(l);
        PeriodTotals totals;
        totals.period = l;
        std::map<ContentId, ActiveRow> active;
        FeeTable fees;

        for (std::int64_t d = 0; d < b; ++d) {
            const Slot t = start + d;
            if (options.schedule.is_update(t)) snapshot.emplace(take_snapshot(world, t, params.phi));

            if (d == 0) {
                StrategyContext ctx;
                ctx.period = l;
                ctx.now = t;
                ctx.period_length = b;
                ctx.snapshot = &*snapshot;
                ctx.purchasable = visible_purchasable_set(*snapshot, t, params.phi);
                for (const auto& [id, size] : state.cached()) ctx.cached.push_back(id);
                for (ContentId id : ctx.candidates()) {
                    const auto& e = catalog.at(id);
                    auto it = previous.find(id);
                    fees[id] = service_fee(e, it == previous.end() ? std::nullopt : std::optional(it->second),
                                           aoi(t, e.t_gen), params);
                }
                ctx.fees = &fees;
                ctx.params = params;
                ctx.predictor = predictor;

                const PeriodPlan plan = strategy.plan_period(ctx);
                validate_plan(plan, ctx, strategy.name());
                if (options.shadow != nullptr) {
                    const PeriodPlan shadow_plan = options.shadow->plan_period(ctx);
                    validate_plan(shadow_plan, ctx, options.shadow->name());
                    totals.shadow_utility = shadow_utility(shadow_plan, ctx, world);
                }

                std::vector<ContentId> release;
                for (ContentId id : ctx.cached) {
                    auto it = plan.find(id);
                    if (it == plan.end() || it->second.prefix_len == 0 || it->second.purchase) release.push_back(id);
                }
                std::vector<CacheAdmission> admit;
                for (const auto& [id, row] : plan)
                    if (row.purchase) admit.push_back({id, catalog.at(id).size});
                auto txn = apply_cache_transaction(state, release, admit, params.s_max);
                state = std::move(txn.state);
                log.meta.ignored_releases += static_cast<std::int64_t>(txn.ignored_releases.size());

                for (const auto& [id, row] : plan) {
                    if (row.prefix_len == 0) continue;
                    ActiveRow a;
                    a.entry = &catalog.at(id);
                    a.purchase = row.purchase;
                    a.end = row.prefix_len;
                    a.fee = fees.at(id);
                    if (row.purchase) {
                        a.utility -= purchase_cost(*a.entry, params);
                        ++totals.purchases;
                    }
                    active.emplace(id, a);
                }
            } else {
                std::vector<ContentId> due;
                for (const auto& [id, size] : state.cached())
                    if (active.at(id).end == d) due.push_back(id);
                if (!due.empty()) state = apply_cache_transaction(state, due, {}, params.s_max).state;

                if (options.schedule.is_update(t) && !state.cached().empty()) {
                    MidPeriodContext mid;
                    mid.period = l;
                    mid.now = t;
                    mid.period_length = b;
                    mid.offset = d;
                    mid.snapshot = &*snapshot;
                    for (const auto& [id, size] : state.cached()) mid.cached.emplace_back(id, active.at(id).end);
                    mid.fees = &fees;
                    mid.params = params;
                    mid.predictor = predictor;
                    std::vector<ContentId> now_released;
                    for (const auto& rev : strategy.revise(mid)) {
                        if (!state.contains(rev.id))
                            throw PlanError(strategy.name() + ": revision for non-cached content " +
                                            std::to_string(rev.id));
                        if (rev.remaining < 0 || rev.remaining > b - d)
                            throw PlanError(strategy.name() + ": revision for content " + std::to_string(rev.id) +
                                            " runs past the period");
                        active.at(rev.id).end = d + rev.remaining;
                        if (rev.remaining == 0) now_released.push_back(rev.id);
                    }
                    if (!now_released.empty())
                        state = apply_cache_transaction(state, now_released, {}, params.s_max).state;
                }
            }

            for (const auto& [id, size] : state.cached()) {
                auto& a = active.at(id);
                const std::int64_t r = trace.count(id, t);
                const Money margin = a.fee + params.c_d * size;
                a.utility += margin * r - params.c_a * size;
                a.served += r;
                a.aoi_sum += r * aoi(t + 1, a.entry->t_gen);
                ++a.slots;
            }
            if (state.occupied() > params.s_max)
                throw CapacityExceeded("occupancy " + std::to_string(state.occupied()) + " at slot " +
                                       std::to_string(t));
            log.occupancy[static_cast<std::size_t>(t)] = state.occupied();
            totals.occupancy_sum += state.occupied();
            totals.requests += slot_totals[static_cast<std::size_t>(t)];
        }

        previous.clear();
        std::vector<ContentOutcome> outcomes;
        for (const auto& [id, a] : active) {
            ContentPeriodRecord rec;
            rec.period = l;
            rec.id = id;
            rec.purchase = a.purchase;
            rec.prefix_len = a.slots;
            rec.served = a.served;
            rec.aoi_weighted_sum = a.aoi_sum;
            rec.fee = a.fee;
            rec.size = a.entry->size;
            rec.price = a.entry->price;
            rec.utility = a.utility;
            log.rows.push_back(rec);
            totals.utility += a.utility;
            totals.served += a.served;
            totals.aoi_weighted_sum += a.aoi_sum;
            previous[id] = {a.aoi_sum, a.served};
            outcomes.push_back({id, a.utility});
        }
        strategy.observe_period(l, outcomes);
        log.total_utility += totals.utility;
        log.periods.push_back(totals);
    }
    if (predictor != nullptr) log.meta.fallback_events = predictor->fallback_events();
    return log;
}

Metrics compute_metrics(const RunLog& log) {
    Metrics m;
    m.total_utility = log.total_utility;
    m.requests = log.meta.total_requests;
    std::int64_t aoi_sum = 0;
    for (const auto& p : log.periods) {
        m.served += p.served;
        aoi_sum += p.aoi_weighted_sum;
    }
    m.no_requests = m.requests == 0;
    if (!m.no_requests) m.hit_rate = static_cast<double>(m.served) / static_cast<double>(m.requests);
    if (m.served > 0) m.avg_aoi = static_cast<double>(aoi_sum) / static_cast<double>(m.served);
    std::int64_t occ = 0;
    for (auto o : log.occupancy) {
        occ += o;
        m.peak_occupancy = std::max(m.peak_occupancy, o);
    }
    if (!log.occupancy.empty() && log.meta.params.s_max > 0)
        m.mean_occupancy = static_cast<double>(occ) /
                           (static_cast<double>(log.occupancy.size()) * static_cast<double>(log.meta.params.s_max));
    return m;
}

DoubleEntryReport verify_double_entry(const RunLog& log, const World& world) {
    DoubleEntryReport rep;
    auto mismatch = [&](std::string what) {
        rep.ok = false;
        rep.mismatches.push_back(std::move(what));
    };
    const std::int64_t b = log.meta.b;
    std::map<std::int64_t, Money> by_period;
    Money total;
    for (const auto& row : log.rows) {
        const auto& e = world.catalog->at(row.id);
        const auto requests = period_requests(*world.trace, row.id, b * row.period, b);
        const Money expect = realized_utility(e, {row.purchase, row.prefix_len}, row.fee, requests, log.meta.params);
        if (expect != row.utility)
            mismatch("period " + std::to_string(row.period) + " content " + std::to_string(row.id) + ": logged " +
                     row.utility.to_string() + ", recomputed " + expect.to_string());
        std::int64_t served = 0;
        for (std::int64_t d = 0; d < row.prefix_len; ++d) served += requests[static_cast<std::size_t>(d)];
        if (served != row.served)
            mismatch("period " + std::to_string(row.period) + " content " + std::to_string(row.id) + ": served " +
                     std::to_string(row.served) + ", recounted " + std::to_string(served));
        by_period[row.period] += expect;
        total += expect;
    }
    for (const auto& p : log.periods) {
        const Money expect = by_period.count(p.period) ? by_period[p.period] : Money{};
        if (expect != p.utility)
            mismatch("period " + std::to_string(p.period) + " total " + p.utility.to_string() + ", recomputed " +
                     expect.to_string());
    }
    if (total != log.total_utility)
        mismatch("run total " + log.total_utility.to_string() + ", recomputed " + total.to_string());
    return rep;
}

std::optional<double> cr_bound_value(double alpha, double r, double beta) {
    const double denom = alpha * r - beta - 1.0;
    if (!(denom > 0.0)) return std::nullopt;
    return 1.0 + 1.0 / denom;
}

CrBound cr_bound(const RunLog& log) {
    CrBound out;
    const auto& p = log.meta.params;
    bool degenerate = false;
    for (const auto& row : log.rows) {
        if (row.prefix_len < 1) continue;
        const Money cost = row.price + p.c_d * row.size;
        if (cost <= Money{}) {
            degenerate = true;
            continue;
        }
        const double a = (row.fee + p.c_d * row.size).to_double() / cost.to_double();
        const double be = (p.c_a * (log.meta.b * row.size)).to_double() / cost.to_double();
        out.alpha = out.alpha ? std::min(*out.alpha, a) : a;
        out.beta = out.beta ? std::max(*out.beta, be) : be;
        out.min_served = out.min_served ? std::min(*out.min_served, row.served) : row.served;
    }
    if (out.alpha && !degenerate)
        out.value = cr_bound_value(*out.alpha, static_cast<double>(*out.min_served), *out.beta);
    return out;
}

std::optional<double> empirical_cr(Money offline_optimum, Money online_utility) {
    if (online_utility <= Money{}) return std::nullopt;
    return offline_optimum.to_double() / online_utility.to_double();
}

namespace {

std::string ratio(std::int64_t num, std::int64_t den) {
    return den > 0 ? io::format_double(static_cast<double>(num) / static_cast<double>(den)) : std::string{};
}

}  // namespace

void emit_report(const std::string& path, const std::vector<ReportEntry>& entries) {
    io::LineWriter out(path);
    out.write_line("strategy;param;period;utility;hit_rate;avg_aoi;occupancy");
    for (const auto& e : entries) {
        const auto s_max = e.log->meta.params.s_max;
        for (const auto& p : e.log->periods) {
            const std::string hit = p.requests > 0 ? ratio(p.served, p.requests) : "0";
            out.write_line(e.strategy + ";" + e.param + ";" + std::to_string(p.period) + ";" + p.utility.to_string() +
                           ";" + hit + ";" + ratio(p.aoi_weighted_sum, p.served) + ";" +
                           ratio(p.occupancy_sum, s_max * e.log->meta.b));
        }
    }
    out.close();
}

void emit_summary(const std::string& path, const std::vector<ReportEntry>& entries) {
    io::LineWriter out(path);
    out.write_line(
        "strategy;param;utility;hit_rate;avg_aoi;occupancy;requests;served;purchases;fallback_events;trace_checksum");
    for (const auto& e : entries) {
        const auto m = compute_metrics(*e.log);
        std::int64_t purchases = 0;
        for (const auto& p : e.log->periods) purchases += p.purchases;
        out.write_line(e.strategy + ";" + e.param + ";" + m.total_utility.to_string() + ";" +
                       io::format_double(m.hit_rate) + ";" + (m.avg_aoi ? io::format_double(*m.avg_aoi) : "") + ";" +
                       io::format_double(m.mean_occupancy) + ";" + std::to_string(m.requests) + ";" +
                       std::to_string(m.served) + ";" + std::to_string(purchases) + ";" +
                       std::to_string(e.log->meta.fallback_events) + ";" +
                       std::to_string(e.log->meta.trace_checksum));
    }
    out.close();
}

namespace {

constexpr const char* kRunlogHeader = "period;id;purchase;prefix_len;served;aoi_weighted_sum;fee;size;price;utility";

}  // namespace

void write_runlog(const std::string& path, const RunLog& log) {
    io::LineWriter out(path);
    const auto& m = log.meta;
    out.write_line("# strategy=" + m.strategy);
    out.write_line("# predictor=" + m.predictor);
    out.write_line("# b=" + std::to_string(m.b));
    out.write_line("# T=" + std::to_string(m.total_slots));
    out.write_line("# lambda=" + m.params.lambda.to_string());
    out.write_line("# c_d=" + m.params.c_d.to_string());
    out.write_line("# c_a=" + m.params.c_a.to_string());
    out.write_line("# phi=" + std::to_string(m.params.phi));
    out.write_line("# s_max=" + std::to_string(m.params.s_max));
    out.write_line("# dt_interval=" + std::to_string(m.update_interval));
    out.write_line("# trace_checksum=" + std::to_string(m.trace_checksum));
    out.write_line("# total_requests=" + std::to_string(m.total_requests));
    out.write_line("# fallback_events=" + std::to_string(m.fallback_events));
    out.write_line("# total_utility=" + log.total_utility.to_string());
    out.write_line(kRunlogHeader);
    for (const auto& r : log.rows) {
        out.write_line(std::to_string(r.period) + ";" + std::to_string(r.id) + ";" + (r.purchase ? "1" : "0") + ";" +
                       std::to_string(r.prefix_len) + ";" + std::to_string(r.served) + ";" +
                       std::to_string(r.aoi_weighted_sum) + ";" + r.fee.to_string() + ";" + std::to_string(r.size) +
                       ";" + r.price.to_string() + ";" + r.utility.to_string());
    }
    out.close();
}

RunLog read_runlog(const std::string& path) {
    io::LineReader in(path);
    RunLog log;
    std::map<std::string, std::string> meta;
    std::string line;
    bool header = false;
    auto fail = [&](const std::string& msg) { throw ParseError(path, in.line_number(), msg); };
    while (in.next(line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = line.substr(1, eq - 1);
            key.erase(0, key.find_first_not_of(' '));
            meta[key] = line.substr(eq + 1);
            continue;
        }
        if (!header) {
            if (line != kRunlogHeader) fail("expected header '" + std::string(kRunlogHeader) + "'");
            header = true;
            continue;
        }
        const auto f = io::split(line);
        if (f.size() != 10) fail("expected 10 fields, got " + std::to_string(f.size()));
        try {
            ContentPeriodRecord r;
            r.period = io::parse_int(f[0]);
            r.id = static_cast<ContentId>(io::parse_int(f[1]));
            r.purchase = io::parse_int(f[2]) != 0;
            r.prefix_len = io::parse_int(f[3]);
            r.served = io::parse_int(f[4]);
            r.aoi_weighted_sum = io::parse_int(f[5]);
            r.fee = Money::parse(f[6]);
            r.size = io::parse_int(f[7]);
            r.price = Money::parse(f[8]);
            r.utility = Money::parse(f[9]);
            log.total_utility += r.utility;
            log.rows.push_back(r);
        } catch (const std::invalid_argument& e) {
            fail(e.what());
        }
    }
    if (!header) throw ParseError(path, in.line_number(), "missing runlog header");
    auto get = [&](const char* key) -> const std::string& {
        auto it = meta.find(key);
        if (it == meta.end()) throw ParseError(path, 0, std::string("missing metadata '") + key + "'");
        return it->second;
    };
    try {
        auto& m = log.meta;
        m.strategy = get("strategy");
        m.predictor = meta.count("predictor") ? meta["predictor"] : "none";
        m.b = io::parse_int(get("b"));
        m.total_slots = io::parse_int(get("T"));
        m.params.lambda = Money::parse(get("lambda"));
        m.params.c_d = Money::parse(get("c_d"));
        m.params.c_a = Money::parse(get("c_a"));
        m.params.phi = io::parse_int(get("phi"));
        m.params.s_max = io::parse_int(get("s_max"));
        if (meta.count("dt_interval")) m.update_interval = io::parse_int(meta["dt_interval"]);
        if (meta.count("trace_checksum")) m.trace_checksum = std::stoull(meta["trace_checksum"]);
        if (meta.count("total_requests")) m.total_requests = io::parse_int(meta["total_requests"]);
        if (meta.count("fallback_events")) m.fallback_events = io::parse_int(meta["fallback_events"]);
    } catch (const std::invalid_argument& e) {
        throw ParseError(path, 0, std::string("bad metadata: ") + e.what());
    }
    return log;
}

}  // namespace aoicache
