#include "aoicache/core.hpp"

#include <algorithm>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <string>

#include "aoicache/errors.hpp"
#include "aoicache/log.hpp"

namespace aoicache {

namespace log {
namespace {
Level g_level = Level::warning;
std::mutex g_mutex;
constexpr const char* kNames[] = {"debug", "info", "warning", "error", "off"};
}  // namespace

void set_level(Level level) { g_level = level; }
Level level() { return g_level; }

void write(Level lvl, std::string_view message) {
    if (lvl < g_level) return;
    std::lock_guard lock(g_mutex);
    std::cerr << "[" << kNames[static_cast<int>(lvl)] << "] " << message << '\n';
}
}  // namespace log

PeriodPosition slot_to_period(Slot t, std::int64_t b) {
    if (b < 1) throw std::invalid_argument("slots per period must be >= 1");
    std::int64_t l = t / b;
    if (t % b != 0 && t < 0) --l;
    return {l, t - b * l};
}

SimClock SimClock::make(std::int64_t b, Slot total_slots, std::optional<std::int64_t> periods) {
    if (b < 1) throw ConfigError("clock.b", "slots per period must be >= 1");
    if (total_slots < 1) throw ConfigError("clock.T", "total slots must be >= 1");
    if (total_slots % b != 0)
        throw ConfigError("clock.T", "total slots " + std::to_string(total_slots) + " is not a multiple of b=" +
                                         std::to_string(b));
    if (periods && *periods * b != total_slots)
        throw ConfigError("clock.L", "T=" + std::to_string(total_slots) + " != b*L=" + std::to_string(*periods * b));
    return SimClock{b, total_slots};
}

Catalog::Catalog(std::vector<ContentCatalogEntry> entries) : entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) {
        return a.t_gen != b.t_gen ? a.t_gen < b.t_gen : a.id < b.id;
    });
    index_.reserve(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        const auto& e = entries_[i];
        if (e.size < 1) throw std::invalid_argument("content " + std::to_string(e.id) + ": size must be >= 1");
        if (e.price < Money{}) throw std::invalid_argument("content " + std::to_string(e.id) + ": negative price");
        if (e.fee_ceiling < Money{})
            throw std::invalid_argument("content " + std::to_string(e.id) + ": negative fee ceiling");
        if (!index_.emplace(e.id, i).second)
            throw std::invalid_argument("duplicate content id " + std::to_string(e.id));
    }
}

const ContentCatalogEntry& Catalog::at(ContentId id) const {
    const auto* e = find(id);
    if (e == nullptr) throw std::out_of_range("unknown content id " + std::to_string(id));
    return *e;
}

const ContentCatalogEntry* Catalog::find(ContentId id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &entries_[it->second];
}

std::span<const ContentCatalogEntry> Catalog::generated_between(Slot first, Slot last) const {
    if (last < first) return {};
    auto lo = std::lower_bound(entries_.begin(), entries_.end(), first,
                               [](const ContentCatalogEntry& e, Slot s) { return e.t_gen < s; });
    auto hi = std::upper_bound(lo, entries_.end(), last,
                               [](Slot s, const ContentCatalogEntry& e) { return s < e.t_gen; });
    return {lo, hi};
}

std::int64_t Catalog::max_size() const {
    std::int64_t m = 0;
    for (const auto& e : entries_) m = std::max(m, e.size);
    return m;
}

void EconomicParams::validate() const {
    if (lambda < Money{}) throw ConfigError("economics.lambda", "must be >= 0");
    if (c_d < Money{}) throw ConfigError("economics.c_d", "must be >= 0");
    if (c_a < Money{}) throw ConfigError("economics.c_a", "must be >= 0");
    if (phi < 0) throw ConfigError("economics.phi", "must be >= 0");
    if (s_max < 0) throw ConfigError("economics.s_max", "must be >= 0");
}

std::optional<AverageAoi> average_aoi(std::span<const ServedSample> served) {
    AverageAoi avg;
    for (const auto& s : served) {
        if (s.count < 0) throw std::invalid_argument("negative served count");
        avg.count += s.count;
        avg.weighted_sum += s.count * s.delivery_aoi;
    }
    if (avg.count == 0) return std::nullopt;
    return avg;
}

namespace {

__extension__ typedef __int128 Wide;

// round(num / den) half away from zero, den > 0.
std::int64_t div_round(Wide num, Wide den) {
    const Wide q = num / den;
    const Wide r = num % den;
    const Wide twice = (r < 0 ? -r : r) * 2;
    if (twice >= den) return static_cast<std::int64_t>(num < 0 ? q - 1 : q + 1);
    return static_cast<std::int64_t>(q);
}

}  // namespace

Money service_fee(const ContentCatalogEntry& entry, std::optional<AverageAoi> prev_avg_aoi, Slot fallback_aoi,
                  const EconomicParams& params) {
    if (fallback_aoi < 0) throw std::invalid_argument("fallback AoI must be >= 0");
    const AverageAoi avg = prev_avg_aoi && prev_avg_aoi->count > 0 ? *prev_avg_aoi : AverageAoi{fallback_aoi, 1};
    const Wide num = static_cast<Wide>(params.lambda.micros()) * avg.weighted_sum;
    return entry.fee_ceiling - Money::from_micros(div_round(num, avg.count));
}

Money realized_utility(const ContentCatalogEntry& entry, const PlanRow& plan, Money fee,
                       std::span<const std::int64_t> requests, const EconomicParams& params) {
    if (plan.prefix_len < 0) throw std::invalid_argument("negative prefix length");
    if (plan.purchase && plan.prefix_len < 1) throw std::invalid_argument("purchased content must be cached");
    if (static_cast<std::size_t>(plan.prefix_len) > requests.size())
        throw std::invalid_argument("prefix longer than the request window");
    const Money margin = fee + params.c_d * entry.size;
    const Money holding = params.c_a * entry.size;
    Money total;
    for (std::int64_t d = 0; d < plan.prefix_len; ++d) total += margin * requests[d] - holding;
    if (plan.purchase) total -= entry.price + params.c_d * entry.size;
    return total;
}

CacheTransaction apply_cache_transaction(const CacheState& state, std::span<const ContentId> release,
                                         std::span<const CacheAdmission> admit, std::int64_t s_max) {
    CacheTransaction out{state, {}};
    for (ContentId id : release) {
        auto it = out.state.cached_.find(id);
        if (it == out.state.cached_.end()) {
            out.ignored_releases.push_back(id);
            log::warning("release of non-cached content " + std::to_string(id) + " ignored");
            continue;
        }
        out.state.occupied_ -= it->second;
        out.state.cached_.erase(it);
    }
    for (const auto& a : admit) {
        if (a.size < 1) throw std::invalid_argument("admitted content " + std::to_string(a.id) + " has size < 1");
        if (!out.state.cached_.emplace(a.id, a.size).second)
            throw std::invalid_argument("content " + std::to_string(a.id) + " is already cached");
        out.state.occupied_ += a.size;
    }
    if (out.state.occupied_ > s_max)
        throw CapacityExceeded("occupancy " + std::to_string(out.state.occupied_) + " would exceed capacity " +
                               std::to_string(s_max));
    return out;
}

}  // namespace aoicache
