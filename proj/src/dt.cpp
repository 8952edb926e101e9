#include "aoicache/dt.hpp"

#include <algorithm>
#include <stdexcept>

#include "aoicache/errors.hpp"

namespace aoicache {

void UpdateSchedule::validate() const {
    if (interval < 1) throw ConfigError("dt.interval", "must be >= 1");
}

Slot last_update_slot(Slot t, const UpdateSchedule& schedule) {
    if (t < 0) throw std::invalid_argument("slot must be >= 0");
    schedule.validate();
    return schedule.interval * (t / schedule.interval);
}

DtSnapshot::DtSnapshot(World world, Slot taken_at, std::vector<ContentId> purchasable)
    : world_(std::move(world)), taken_at_(taken_at), purchasable_(std::move(purchasable)) {
    std::sort(purchasable_.begin(), purchasable_.end());
}

bool DtSnapshot::visible(ContentId id) const { return entry(id) != nullptr; }

const ContentCatalogEntry* DtSnapshot::entry(ContentId id) const {
    const auto* e = world_.catalog->find(id);
    return e != nullptr && e->t_gen <= taken_at_ ? e : nullptr;
}

std::vector<ContentCatalogEntry> DtSnapshot::visible_catalog() const {
    std::vector<ContentCatalogEntry> out;
    for (const auto& e : world_.catalog->entries()) {
        if (e.t_gen > taken_at_) break;  // catalog is ordered by t_gen
        out.push_back(e);
    }
    return out;
}

std::vector<std::int64_t> DtSnapshot::history(ContentId id) const {
    const auto* e = entry(id);
    if (e == nullptr) return {};
    const Slot first = std::max<Slot>(e->t_gen + 1, 0);
    if (taken_at_ <= first) return {};
    std::vector<std::int64_t> out(static_cast<std::size_t>(taken_at_ - first));
    world_.trace->copy_counts(id, first, out);
    return out;
}

std::vector<std::int64_t> DtSnapshot::recent_history(ContentId id, Slot window) const {
    const auto* e = entry(id);
    if (e == nullptr || window <= 0) return {};
    const Slot first = std::max({e->t_gen + 1, Slot{0}, taken_at_ - window});
    if (taken_at_ <= first) return {};
    std::vector<std::int64_t> out(static_cast<std::size_t>(taken_at_ - first));
    world_.trace->copy_counts(id, first, out);
    return out;
}

void DtSnapshot::dump(const std::string& prefix) const {
    const std::string comment = "taken_at=" + std::to_string(taken_at_);
    write_catalog_csv(prefix + ".catalog.csv", Catalog(visible_catalog()), comment);
    RequestTrace observed;
    for (const auto& e : visible_catalog()) {
        const auto h = history(e.id);
        const Slot first = std::max<Slot>(e.t_gen + 1, 0);
        for (std::size_t i = 0; i < h.size(); ++i)
            if (h[i] != 0) observed.add(e.id, first + static_cast<Slot>(i), static_cast<std::uint32_t>(h[i]));
    }
    write_trace_csv(prefix + ".trace.csv", observed, comment);
}

DtSnapshot take_snapshot(const World& world, Slot t, Slot phi) {
    std::vector<ContentId> purchasable;
    // 0 < t - t_gen <= phi  <=>  t - phi <= t_gen <= t - 1
    for (const auto& e : world.catalog->generated_between(t - phi, t - 1)) purchasable.push_back(e.id);
    return DtSnapshot(world, t, std::move(purchasable));
}

std::vector<ContentId> visible_purchasable_set(const DtSnapshot& snapshot, Slot now, Slot phi) {
    if (now < snapshot.taken_at()) throw std::invalid_argument("snapshot is from the future");
    std::vector<ContentId> out;
    for (ContentId id : snapshot.purchasable()) {
        const auto* e = snapshot.entry(id);
        if (e != nullptr && aoi(now, e->t_gen) <= phi) out.push_back(id);
    }
    return out;
}

}  // namespace aoicache
