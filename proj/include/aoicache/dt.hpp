#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "aoicache/core.hpp"
#include "aoicache/workload.hpp"

namespace aoicache {

/// DT refresh every `interval` slots, aligned to slot 0.
struct UpdateSchedule {
    Slot interval = 1;

    bool is_update(Slot t) const { return t % interval == 0; }
    void validate() const;
};

/// Most recent update slot at or before t.
Slot last_update_slot(Slot t, const UpdateSchedule& schedule);

/// The physical world the twin mirrors: ground-truth catalog and requests.
struct World {
    std::shared_ptr<const Catalog> catalog;
    std::shared_ptr<const RequestTrace> trace;
};

/// Immutable twin view taken at one slot. Only contents generated at or before
/// `taken_at` are visible, and request history stops before `taken_at` (the
/// requests of slot `taken_at` have not arrived when the twin refreshes).
class DtSnapshot {
public:
    DtSnapshot(World world, Slot taken_at, std::vector<ContentId> purchasable);

    Slot taken_at() const { return taken_at_; }
    /// N_p' at the snapshot: ascending ids with 0 < AoI(taken_at) <= phi.
    const std::vector<ContentId>& purchasable() const { return purchasable_; }

    bool visible(ContentId id) const;
    /// Catalog entry of a visible content; nullptr otherwise.
    const ContentCatalogEntry* entry(ContentId id) const;
    /// Visible entries in catalog order.
    std::vector<ContentCatalogEntry> visible_catalog() const;

    /// Observed counts for slots max(t_gen + 1, 0) .. taken_at - 1, most recent
    /// last. Empty for invisible contents.
    std::vector<std::int64_t> history(ContentId id) const;
    /// The last `window` observed slots (fewer when the content is younger).
    std::vector<std::int64_t> recent_history(ContentId id, Slot window) const;

    /// Writes "<prefix>.catalog.csv" and "<prefix>.trace.csv" with a taken_at comment.
    void dump(const std::string& prefix) const;

private:
    World world_;
    Slot taken_at_;
    std::vector<ContentId> purchasable_;
};

/// Refreshes the twin at slot t: visible catalog, history, and N_p'.
DtSnapshot take_snapshot(const World& world, Slot t, Slot phi);

/// N_p' minus the contents whose AoI at `now` exceeds phi. Ascending ids.
std::vector<ContentId> visible_purchasable_set(const DtSnapshot& snapshot, Slot now, Slot phi);

}  // namespace aoicache
