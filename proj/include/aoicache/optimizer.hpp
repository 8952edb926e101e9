#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "aoicache/core.hpp"

namespace aoicache {

class RequestTrace;

/// Per-slot economics of keeping one content cached.
struct SlotEconomics {
    Money fee;
    std::int64_t size = 1;
    Money c_d;
    Money c_a;

    /// Earned per served request: service fee plus the backhaul saving.
    Money margin() const { return fee + c_d * size; }
    /// Paid per cached slot.
    Money holding_cost() const { return c_a * size; }
    /// predicted * margin, rounded to the money resolution.
    Money revenue(double predicted) const { return margin().scaled(predicted); }
};

struct PrefixEvaluation {
    Money best_utility;
    std::int64_t best_prefix_len = 0;
    friend bool operator==(const PrefixEvaluation&, const PrefixEvaluation&) = default;
};

/// Best caching prefix for a content cached at the period's first slot:
/// maximizes sum_{d<k} revenue(predicted[d]) - k * holding - purchase_cost over
/// k in [1, b]. Ties go to the larger k. `predicted` must hold exactly
/// `period_length` entries (std::invalid_argument otherwise).
PrefixEvaluation best_prefix_utility(std::span<const double> predicted, std::int64_t period_length,
                                     const SlotEconomics& econ, Money purchase_cost);

/// Re-optimization for the rest of a period: k in [0, horizon], k = 0 releases
/// now. Horizon must be in [1, period_length - 1].
PrefixEvaluation best_remaining_prefix(std::span<const double> remaining, std::int64_t period_length,
                                       const SlotEconomics& econ);

struct KnapsackItem {
    ContentId id = 0;
    Money value;
    std::int64_t weight = 1;
};

struct KnapsackSolution {
    Money total;
    std::int64_t weight = 0;
    /// Ascending ids.
    std::vector<ContentId> selected;
    friend bool operator==(const KnapsackSolution&, const KnapsackSolution&) = default;
};

/// Exact 0-1 knapsack by dynamic programming over integer weights,
/// O(n * capacity). Among optimal selections prefers the smaller total weight,
/// then the lexicographically smallest ascending id list. Items with
/// non-positive value are never selected.
KnapsackSolution knapsack_01(std::span<const KnapsackItem> items, std::int64_t capacity);

/// Exhaustive subset search with the same tie-breaking. At most 20 items.
KnapsackSolution knapsack_bruteforce(std::span<const KnapsackItem> items, std::int64_t capacity);

/// Maximum total utility over every joint purchase/prefix assignment for a tiny
/// instance (<= 8 contents, <= 3 periods, b <= 4), using true requests, the
/// purchasable-set rule, carryover and previous-period fees. Every assignment
/// is enumerated per content; capacity coupling is resolved exhaustively.
Money offline_optimal_bruteforce(const Catalog& catalog, const RequestTrace& trace, const EconomicParams& params,
                                 const SimClock& clock);

/// Size limits enforced by offline_optimal_bruteforce.
inline constexpr std::size_t kOfflineMaxContents = 8;
inline constexpr std::int64_t kOfflineMaxPeriods = 3;
inline constexpr std::int64_t kOfflineMaxPeriodLength = 4;

}  // namespace aoicache
