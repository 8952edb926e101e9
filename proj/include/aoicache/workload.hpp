#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "aoicache/core.hpp"
#include "aoicache/random.hpp"

namespace aoicache {

/// Per-slot request counts r_n(t), stored as one dense series per content.
class RequestTrace {
public:
    struct Series {
        Slot first_slot = 0;
        std::vector<std::uint32_t> counts;
    };

    void set_series(ContentId id, Slot first_slot, std::vector<std::uint32_t> counts);
    /// Adds `count` requests at slot t (accumulates).
    void add(ContentId id, Slot t, std::uint32_t count);
    void erase(ContentId id) { series_.erase(id); }

    std::uint32_t count(ContentId id, Slot t) const;
    const Series* series(ContentId id) const;
    const std::map<ContentId, Series>& all() const { return series_; }

    std::int64_t total(ContentId id) const;
    std::int64_t total_requests() const;
    /// Sum over contents for each slot in [0, total_slots).
    std::vector<std::int64_t> slot_totals(Slot total_slots) const;
    /// Copies counts for slots [from, from + out.size()).
    void copy_counts(ContentId id, Slot from, std::span<std::int64_t> out) const;

    /// FNV-1a over the non-zero cells in (id, slot) order.
    std::uint64_t checksum() const;

    /// Calls fn(id, slot, count) for every non-zero cell in (id, slot) order.
    template <class Fn>
    void for_each_cell(Fn&& fn) const {
        for (const auto& [id, s] : series_)
            for (std::size_t i = 0; i < s.counts.size(); ++i)
                if (s.counts[i] != 0) fn(id, s.first_slot + static_cast<Slot>(i), s.counts[i]);
    }

    /// Same non-zero cells.
    friend bool operator==(const RequestTrace& a, const RequestTrace& b);

private:
    std::map<ContentId, Series> series_;
};

struct IntRange {
    std::int64_t min = 0;
    std::int64_t max = 0;
};

struct MoneyRange {
    Money min;
    Money max;
};

enum class PopularityKind { age_shaped_poisson, constant_poisson, trace };

const char* to_string(PopularityKind kind);
/// Throws std::invalid_argument.
PopularityKind parse_popularity_kind(std::string_view text);

/// Request intensity model. For age-shaped profiles content n receives
/// Poisson(peak_n * shape(age)) requests per slot, with
/// shape(a) = (a / a0) * exp(1 - a / a0) peaking at a = a0 and peak_n drawn
/// from a Pareto(peak_rate_scale, pareto_shape) capped at peak_rate_cap.
struct PopularityProfile {
    PopularityKind kind = PopularityKind::age_shaped_poisson;
    double peak_rate_scale = 0.15;
    double pareto_shape = 1.2;
    double peak_rate_cap = 40.0;
    double constant_rate = 1.0;
    double rise_slot = 4.0;
    /// Requests are generated for ages 1..max_age (0 = until the end of the run).
    Slot max_age = 120;

    double shape(Slot age) const;
    void validate() const;
};

struct WorkloadConfig {
    std::int64_t total_contents = 30'000;
    Slot total_slots = 3'000;
    IntRange size_range{2, 50};
    IntRange price_range{20, 200};
    Money fee_ceiling = Money::from_units(30);
    PopularityProfile popularity;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Uniform generation slots over [0, total_slots), sizes and integer prices
/// uniform over their ranges; ids are 0..total_contents-1.
Catalog generate_catalog(const WorkloadConfig& config, Rng& rng);

/// Requests for every content, one random substream per (seed, id).
RequestTrace generate_requests(const Catalog& catalog, const PopularityProfile& profile, Slot total_slots,
                               std::uint64_t seed);

struct IngestOptions {
    /// Contents with fewer total requests are dropped from catalog and trace.
    std::int64_t min_total_requests = 0;
};

struct IngestResult {
    Catalog catalog;
    RequestTrace trace;
    /// Row-numbered notes for rejected rows.
    std::vector<std::string> diagnostics;
};

/// Reads "id;t_gen;size;price;fee_ceiling" and "id;slot;count" files (header
/// line required, '#' lines ignored, ".gz" accepted). Throws ParseError on
/// malformed rows or trace ids missing from the catalog.
IngestResult ingest_trace(const std::string& catalog_file, const std::string& trace_file,
                          const IngestOptions& options = {});

Catalog read_catalog_csv(const std::string& path);

/// Optional `comment` is written as a leading "# ..." line.
void write_catalog_csv(const std::string& path, const Catalog& catalog, const std::string& comment = {});
void write_trace_csv(const std::string& path, const RequestTrace& trace, const std::string& comment = {});

}  // namespace aoicache
