#include "aoicache/workload.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "aoicache/csv_io.hpp"
#include "aoicache/errors.hpp"
#include "aoicache/log.hpp"

namespace aoicache {

void RequestTrace::set_series(ContentId id, Slot first_slot, std::vector<std::uint32_t> counts) {
    series_[id] = Series{first_slot, std::move(counts)};
}

void RequestTrace::add(ContentId id, Slot t, std::uint32_t count) {
    auto [it, inserted] = series_.try_emplace(id, Series{t, {}});
    Series& s = it->second;
    if (inserted || s.counts.empty()) {
        s.first_slot = t;
        s.counts.assign(1, count);
        return;
    }
    if (t < s.first_slot) {
        s.counts.insert(s.counts.begin(), static_cast<std::size_t>(s.first_slot - t), 0);
        s.first_slot = t;
    }
    const auto idx = static_cast<std::size_t>(t - s.first_slot);
    if (idx >= s.counts.size()) s.counts.resize(idx + 1, 0);
    s.counts[idx] += count;
}

std::uint32_t RequestTrace::count(ContentId id, Slot t) const {
    auto it = series_.find(id);
    if (it == series_.end()) return 0;
    const Series& s = it->second;
    if (t < s.first_slot) return 0;
    const auto idx = static_cast<std::size_t>(t - s.first_slot);
    return idx < s.counts.size() ? s.counts[idx] : 0;
}

const RequestTrace::Series* RequestTrace::series(ContentId id) const {
    auto it = series_.find(id);
    return it == series_.end() ? nullptr : &it->second;
}

std::int64_t RequestTrace::total(ContentId id) const {
    const Series* s = series(id);
    if (s == nullptr) return 0;
    std::int64_t sum = 0;
    for (auto c : s->counts) sum += c;
    return sum;
}

std::int64_t RequestTrace::total_requests() const {
    std::int64_t sum = 0;
    for (const auto& [id, s] : series_)
        for (auto c : s.counts) sum += c;
    return sum;
}

std::vector<std::int64_t> RequestTrace::slot_totals(Slot total_slots) const {
    std::vector<std::int64_t> totals(static_cast<std::size_t>(std::max<Slot>(total_slots, 0)), 0);
    for (const auto& [id, s] : series_) {
        for (std::size_t i = 0; i < s.counts.size(); ++i) {
            const Slot t = s.first_slot + static_cast<Slot>(i);
            if (t >= 0 && t < total_slots) totals[static_cast<std::size_t>(t)] += s.counts[i];
        }
    }
    return totals;
}

void RequestTrace::copy_counts(ContentId id, Slot from, std::span<std::int64_t> out) const {
    std::fill(out.begin(), out.end(), 0);
    const Series* s = series(id);
    if (s == nullptr) return;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const Slot t = from + static_cast<Slot>(i);
        if (t < s->first_slot) continue;
        const auto idx = static_cast<std::size_t>(t - s->first_slot);
        if (idx >= s->counts.size()) break;
        out[i] = s->counts[idx];
    }
}

std::uint64_t RequestTrace::checksum() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xff;
            h *= 0x100000001b3ULL;
        }
    };
    for_each_cell([&](ContentId id, Slot t, std::uint32_t c) {
        feed(id);
        feed(static_cast<std::uint64_t>(t));
        feed(c);
    });
    return h;
}

bool operator==(const RequestTrace& a, const RequestTrace& b) {
    std::vector<std::tuple<ContentId, Slot, std::uint32_t>> ca, cb;
    a.for_each_cell([&](ContentId id, Slot t, std::uint32_t c) { ca.emplace_back(id, t, c); });
    b.for_each_cell([&](ContentId id, Slot t, std::uint32_t c) { cb.emplace_back(id, t, c); });
    return ca == cb;
}

const char* to_string(PopularityKind kind) {
    switch (kind) {
        case PopularityKind::age_shaped_poisson: return "age-shaped-poisson";
        case PopularityKind::constant_poisson: return "constant-poisson";
        case PopularityKind::trace: return "trace";
    }
    return "?";
}

PopularityKind parse_popularity_kind(std::string_view text) {
    if (text == "age-shaped-poisson") return PopularityKind::age_shaped_poisson;
    if (text == "constant-poisson") return PopularityKind::constant_poisson;
    if (text == "trace") return PopularityKind::trace;
    throw std::invalid_argument("unknown popularity kind '" + std::string(text) + "'");
}

double PopularityProfile::shape(Slot age) const {
    if (age <= 0) return 0.0;
    const double x = static_cast<double>(age) / rise_slot;
    return x * std::exp(1.0 - x);
}

void PopularityProfile::validate() const {
    if (!(peak_rate_scale >= 0)) throw ConfigError("workload.peak_rate_scale", "must be >= 0");
    if (!(pareto_shape > 0)) throw ConfigError("workload.pareto_shape", "must be > 0");
    if (!(peak_rate_cap >= 0)) throw ConfigError("workload.peak_rate_cap", "must be >= 0");
    if (!(constant_rate >= 0)) throw ConfigError("workload.constant_rate", "must be >= 0");
    if (!(rise_slot > 0)) throw ConfigError("workload.rise_slot", "must be > 0");
    if (max_age < 0) throw ConfigError("workload.max_age", "must be >= 0");
}

void WorkloadConfig::validate() const {
    if (total_contents < 1) throw ConfigError("workload.contents", "must be >= 1");
    if (total_slots < 1) throw ConfigError("clock.T", "must be >= 1");
    if (size_range.min < 1 || size_range.max < size_range.min)
        throw ConfigError("workload.size_min", "size range must be non-empty with min >= 1");
    if (price_range.min < 0 || price_range.max < price_range.min)
        throw ConfigError("workload.price_min", "price range must be non-empty and non-negative");
    if (fee_ceiling < Money{}) throw ConfigError("workload.fee_ceiling", "must be >= 0");
    popularity.validate();
}

Catalog generate_catalog(const WorkloadConfig& config, Rng& rng) {
    config.validate();
    std::uniform_int_distribution<Slot> gen_slot(0, config.total_slots - 1);
    std::uniform_int_distribution<std::int64_t> size(config.size_range.min, config.size_range.max);
    std::uniform_int_distribution<std::int64_t> price(config.price_range.min, config.price_range.max);
    std::vector<ContentCatalogEntry> entries;
    entries.reserve(static_cast<std::size_t>(config.total_contents));
    for (std::int64_t n = 0; n < config.total_contents; ++n) {
        ContentCatalogEntry e;
        e.id = static_cast<ContentId>(n);
        e.t_gen = gen_slot(rng);
        e.size = size(rng);
        e.price = Money::from_units(price(rng));
        e.fee_ceiling = config.fee_ceiling;
        entries.push_back(e);
    }
    return Catalog(std::move(entries));
}

RequestTrace generate_requests(const Catalog& catalog, const PopularityProfile& profile, Slot total_slots,
                               std::uint64_t seed) {
    profile.validate();
    if (profile.kind == PopularityKind::trace)
        throw std::invalid_argument("trace popularity profiles are ingested, not generated");
    RequestTrace trace;
    for (const auto& e : catalog.entries()) {
        Rng rng(derive_seed(seed, e.id, 0x7265717565737473ULL));
        double peak = profile.constant_rate;
        if (profile.kind == PopularityKind::age_shaped_poisson) {
            // Inverse-CDF Pareto draw; 1 - u keeps the argument in (0, 1].
            const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            peak = std::min(profile.peak_rate_cap, profile.peak_rate_scale * std::pow(1.0 - u, -1.0 / profile.pareto_shape));
        }
        const Slot first = std::max<Slot>(e.t_gen + 1, 0);
        Slot last = total_slots - 1;
        if (profile.max_age > 0) last = std::min(last, e.t_gen + profile.max_age);
        if (last < first || peak <= 0.0) continue;
        std::vector<std::uint32_t> counts(static_cast<std::size_t>(last - first + 1), 0);
        bool any = false;
        for (Slot t = first; t <= last; ++t) {
            double rate = peak;
            if (profile.kind == PopularityKind::age_shaped_poisson) rate *= profile.shape(aoi(t, e.t_gen));
            if (rate <= 0.0) continue;
            const auto c = std::poisson_distribution<std::uint32_t>(rate)(rng);
            counts[static_cast<std::size_t>(t - first)] = c;
            any = any || c != 0;
        }
        if (any) trace.set_series(e.id, first, std::move(counts));
    }
    return trace;
}

namespace {

constexpr std::string_view kCatalogHeader = "id;t_gen;size;price;fee_ceiling";
constexpr std::string_view kTraceHeader = "id;slot;count";

// Reads past comment and blank lines; returns false at EOF.
bool next_data_line(io::LineReader& in, std::string& line) {
    while (in.next(line)) {
        if (line.empty() || line.front() == '#') continue;
        return true;
    }
    return false;
}

void expect_header(io::LineReader& in, std::string_view header) {
    std::string line;
    if (!next_data_line(in, line)) throw ParseError(in.path(), in.line_number(), "missing header line");
    if (line != header)
        throw ParseError(in.path(), in.line_number(), "expected header '" + std::string(header) + "'");
}

}  // namespace

Catalog read_catalog_csv(const std::string& path) {
    io::LineReader in(path);
    expect_header(in, kCatalogHeader);
    std::vector<ContentCatalogEntry> entries;
    std::unordered_set<ContentId> seen;
    std::string line;
    while (next_data_line(in, line)) {
        const auto fields = io::split(line);
        if (fields.size() != 5) throw ParseError(path, in.line_number(), "expected 5 fields");
        ContentCatalogEntry e;
        try {
            const auto id = io::parse_int(fields[0]);
            if (id < 0) throw std::invalid_argument("negative id");
            e.id = static_cast<ContentId>(id);
            e.t_gen = io::parse_int(fields[1]);
            e.size = io::parse_int(fields[2]);
            e.price = Money::parse(fields[3]);
            e.fee_ceiling = Money::parse(fields[4]);
        } catch (const std::exception& ex) {
            throw ParseError(path, in.line_number(), ex.what());
        }
        if (e.size < 1) throw ParseError(path, in.line_number(), "size must be >= 1");
        if (e.price < Money{}) throw ParseError(path, in.line_number(), "price must be >= 0");
        if (e.fee_ceiling < Money{}) throw ParseError(path, in.line_number(), "fee ceiling must be >= 0");
        if (!seen.insert(e.id).second)
            throw ParseError(path, in.line_number(), "duplicate id " + std::to_string(e.id));
        entries.push_back(e);
    }
    return Catalog(std::move(entries));
}

IngestResult ingest_trace(const std::string& catalog_file, const std::string& trace_file,
                          const IngestOptions& options) {
    IngestResult result;
    Catalog catalog = read_catalog_csv(catalog_file);

    io::LineReader in(trace_file);
    expect_header(in, kTraceHeader);
    std::string line;
    while (next_data_line(in, line)) {
        const auto fields = io::split(line);
        if (fields.size() != 3) throw ParseError(trace_file, in.line_number(), "expected 3 fields");
        std::int64_t id = 0, slot = 0, count = 0;
        try {
            id = io::parse_int(fields[0]);
            slot = io::parse_int(fields[1]);
            count = io::parse_int(fields[2]);
        } catch (const std::exception& ex) {
            throw ParseError(trace_file, in.line_number(), ex.what());
        }
        if (count < 0 || count > std::int64_t{UINT32_MAX})
            throw ParseError(trace_file, in.line_number(), "count out of range");
        const auto* entry = id >= 0 ? catalog.find(static_cast<ContentId>(id)) : nullptr;
        if (entry == nullptr)
            throw ParseError(trace_file, in.line_number(), "content id " + std::to_string(id) + " not in catalog");
        if (slot <= entry->t_gen) {
            result.diagnostics.push_back(trace_file + ":" + std::to_string(in.line_number()) + ": slot " +
                                         std::to_string(slot) + " not after generation slot " +
                                         std::to_string(entry->t_gen) + " of content " + std::to_string(id) +
                                         "; row rejected");
            log::warning(result.diagnostics.back());
            continue;
        }
        if (count > 0) result.trace.add(entry->id, slot, static_cast<std::uint32_t>(count));
    }

    if (options.min_total_requests > 0) {
        std::vector<ContentCatalogEntry> kept;
        for (const auto& e : catalog.entries()) {
            if (result.trace.total(e.id) >= options.min_total_requests) {
                kept.push_back(e);
            } else {
                result.trace.erase(e.id);
            }
        }
        catalog = Catalog(std::move(kept));
    }
    result.catalog = std::move(catalog);
    return result;
}

void write_catalog_csv(const std::string& path, const Catalog& catalog, const std::string& comment) {
    io::LineWriter out(path);
    if (!comment.empty()) out.write_line("# " + comment);
    out.write_line(kCatalogHeader);
    std::vector<ContentCatalogEntry> sorted(catalog.entries().begin(), catalog.entries().end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    for (const auto& e : sorted) {
        out.write_line(std::to_string(e.id) + ";" + std::to_string(e.t_gen) + ";" + std::to_string(e.size) + ";" +
                       e.price.to_string() + ";" + e.fee_ceiling.to_string());
    }
    out.close();
}

void write_trace_csv(const std::string& path, const RequestTrace& trace, const std::string& comment) {
    io::LineWriter out(path);
    if (!comment.empty()) out.write_line("# " + comment);
    out.write_line(kTraceHeader);
    trace.for_each_cell([&](ContentId id, Slot t, std::uint32_t c) {
        out.write_line(std::to_string(id) + ";" + std::to_string(t) + ";" + std::to_string(c));
    });
    out.close();
}

}  // namespace aoicache
