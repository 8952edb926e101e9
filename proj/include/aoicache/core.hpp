#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "aoicache/money.hpp"

namespace aoicache {

using Slot = std::int64_t;
using ContentId = std::uint64_t;

/// Age of a content at slot t: t - t_gen once generated, zero before.
constexpr Slot aoi(Slot t, Slot t_gen) { return t > t_gen ? t - t_gen : 0; }

struct PeriodPosition {
    std::int64_t period = 0;
    std::int64_t offset = 0;
    friend bool operator==(const PeriodPosition&, const PeriodPosition&) = default;
};

/// Floor division of a (non-negative) slot into (period, offset). b >= 1.
PeriodPosition slot_to_period(Slot t, std::int64_t b);

/// Two-timescale clock: T slots grouped into L periods of b slots.
class SimClock {
public:
    /// Throws ConfigError unless b >= 1, T >= 1 and T is a multiple of b
    /// (and T == b * L when L is given).
    static SimClock make(std::int64_t b, Slot total_slots, std::optional<std::int64_t> periods = std::nullopt);

    std::int64_t period_length() const { return b_; }
    Slot total_slots() const { return total_slots_; }
    std::int64_t periods() const { return total_slots_ / b_; }

    PeriodPosition position(Slot t) const { return slot_to_period(t, b_); }
    Slot first_slot(std::int64_t l) const { return b_ * l; }
    Slot last_slot(std::int64_t l) const { return b_ * l + (b_ - 1); }
    bool is_period_start(Slot t) const { return t % b_ == 0; }

    /// Slot duration; metadata only.
    double slot_seconds = 1.0;

private:
    SimClock(std::int64_t b, Slot total) : b_(b), total_slots_(total) {}
    std::int64_t b_;
    Slot total_slots_;
};

struct ContentCatalogEntry {
    ContentId id = 0;
    Slot t_gen = 0;
    std::int64_t size = 1;
    Money price;
    Money fee_ceiling;

    friend bool operator==(const ContentCatalogEntry&, const ContentCatalogEntry&) = default;
};

/// Immutable set of contents ordered by (t_gen, id) with id lookup.
class Catalog {
public:
    Catalog() = default;
    /// Throws std::invalid_argument on duplicate ids, size < 1 or negative prices.
    explicit Catalog(std::vector<ContentCatalogEntry> entries);

    std::span<const ContentCatalogEntry> entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    bool contains(ContentId id) const { return index_.count(id) != 0; }
    /// Throws std::out_of_range for unknown ids.
    const ContentCatalogEntry& at(ContentId id) const;
    const ContentCatalogEntry* find(ContentId id) const;

    /// Entries with t_gen in [first, last], in catalog order.
    std::span<const ContentCatalogEntry> generated_between(Slot first, Slot last) const;

    std::int64_t max_size() const;

    friend bool operator==(const Catalog& a, const Catalog& b) { return a.entries_ == b.entries_; }

private:
    std::vector<ContentCatalogEntry> entries_;
    std::unordered_map<ContentId, std::size_t> index_;
};

struct EconomicParams {
    Money lambda = Money::from_units(1);
    Money c_d = Money::from_units(1);
    Money c_a = Money::from_micros(100'000);
    Slot phi = 30;
    std::int64_t s_max = 300;

    /// Throws ConfigError on negative values.
    void validate() const;
};

/// One group of served requests: `count` requests delivered with `delivery_aoi`.
struct ServedSample {
    Slot slot = 0;
    std::int64_t count = 0;
    Slot delivery_aoi = 0;
};

/// Request-weighted mean AoI kept as an exact ratio.
struct AverageAoi {
    std::int64_t weighted_sum = 0;
    std::int64_t count = 0;
    double value() const { return static_cast<double>(weighted_sum) / static_cast<double>(count); }
};

/// nullopt when the samples carry no requests.
std::optional<AverageAoi> average_aoi(std::span<const ServedSample> served);

/// fee_ceiling - lambda * average AoI of the previous period, or the fallback
/// AoI when there is no such average. Not clamped; may be negative.
Money service_fee(const ContentCatalogEntry& entry, std::optional<AverageAoi> prev_avg_aoi, Slot fallback_aoi,
                  const EconomicParams& params);

/// Per-period decision for one content: purchase flag and the number of
/// leading slots it stays cached.
struct PlanRow {
    bool purchase = false;
    std::int64_t prefix_len = 0;
    friend bool operator==(const PlanRow&, const PlanRow&) = default;
};

using PeriodPlan = std::map<ContentId, PlanRow>;

/// Realized utility of one content over one period from actual request counts.
/// `requests` holds the period's per-slot counts (at least prefix_len entries).
Money realized_utility(const ContentCatalogEntry& entry, const PlanRow& plan, Money fee,
                       std::span<const std::int64_t> requests, const EconomicParams& params);

struct CacheAdmission {
    ContentId id = 0;
    std::int64_t size = 0;
};

struct CacheTransaction;
class CacheState;

/// Applies releases, then admissions. Atomic: throws CapacityExceeded (and
/// leaves `state` untouched) if the result exceeds s_max, std::invalid_argument
/// if an admitted id is still cached after the releases.
CacheTransaction apply_cache_transaction(const CacheState& state, std::span<const ContentId> release,
                                         std::span<const CacheAdmission> admit, std::int64_t s_max);

/// Cached contents and their total size.
class CacheState {
public:
    const std::map<ContentId, std::int64_t>& cached() const { return cached_; }
    std::int64_t occupied() const { return occupied_; }
    bool contains(ContentId id) const { return cached_.count(id) != 0; }

    friend CacheTransaction apply_cache_transaction(const CacheState&, std::span<const ContentId>,
                                                    std::span<const CacheAdmission>, std::int64_t);

private:
    std::map<ContentId, std::int64_t> cached_;
    std::int64_t occupied_ = 0;
};

struct CacheTransaction {
    CacheState state;
    /// Release requests that named non-cached ids (ignored).
    std::vector<ContentId> ignored_releases;
};

}  // namespace aoicache
