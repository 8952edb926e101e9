#include "aoicache/optimizer.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <map>
#include <stdexcept>
#include <string>

#include "aoicache/workload.hpp"

namespace aoicache {

PrefixEvaluation best_prefix_utility(std::span<const double> predicted, std::int64_t period_length,
                                     const SlotEconomics& econ, Money purchase_cost) {
    if (period_length < 1 || predicted.size() != static_cast<std::size_t>(period_length))
        throw std::invalid_argument("prediction horizon " + std::to_string(predicted.size()) +
                                    " does not match period length " + std::to_string(period_length));
    const Money holding = econ.holding_cost();
    Money running = -purchase_cost;
    PrefixEvaluation best{Money{}, 0};
    for (std::size_t d = 0; d < predicted.size(); ++d) {
        running += econ.revenue(predicted[d]) - holding;
        if (d == 0 || running >= best.best_utility) best = {running, static_cast<std::int64_t>(d + 1)};
    }
    return best;
}

PrefixEvaluation best_remaining_prefix(std::span<const double> remaining, std::int64_t period_length,
                                       const SlotEconomics& econ) {
    if (remaining.empty()) throw std::invalid_argument("empty remaining horizon");
    if (static_cast<std::int64_t>(remaining.size()) > period_length - 1)
        throw std::invalid_argument("remaining horizon " + std::to_string(remaining.size()) +
                                    " exceeds period length - 1");
    const Money holding = econ.holding_cost();
    Money running;
    PrefixEvaluation best{Money{}, 0};
    for (std::size_t d = 0; d < remaining.size(); ++d) {
        running += econ.revenue(remaining[d]) - holding;
        if (running >= best.best_utility) best = {running, static_cast<std::int64_t>(d + 1)};
    }
    return best;
}

KnapsackSolution knapsack_01(std::span<const KnapsackItem> items, std::int64_t capacity) {
    if (capacity < 0) throw std::invalid_argument("negative knapsack capacity");
    std::vector<KnapsackItem> useful;
    for (const auto& it : items) {
        if (it.weight < 1) throw std::invalid_argument("knapsack item weight must be >= 1");
        if (it.value > Money{} && it.weight <= capacity) useful.push_back(it);
    }
    std::sort(useful.begin(), useful.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

    const std::size_t n = useful.size();
    const auto width = static_cast<std::size_t>(capacity) + 1;
    // Suffix DP: row i holds the best selection from items [i, n) for each
    // capacity, ordered by (value desc, weight asc, ids lexicographic asc).
    // Taking item i beats skipping it on a (value, weight) tie because the
    // taken set starts with the smallest id.
    std::vector<Money> value(width), next_value(width);
    std::vector<std::int64_t> weight(width, 0), next_weight(width, 0);
    std::vector<std::vector<bool>> take(n, std::vector<bool>(width, false));
    for (std::size_t i = n; i-- > 0;) {
        const auto w = static_cast<std::size_t>(useful[i].weight);
        for (std::size_t c = 0; c < width; ++c) {
            value[c] = next_value[c];
            weight[c] = next_weight[c];
            if (w > c) continue;
            const Money v_in = next_value[c - w] + useful[i].value;
            const std::int64_t w_in = next_weight[c - w] + useful[i].weight;
            if (v_in > value[c] || (v_in == value[c] && w_in <= weight[c])) {
                value[c] = v_in;
                weight[c] = w_in;
                take[i][c] = true;
            }
        }
        std::swap(value, next_value);
        std::swap(weight, next_weight);
    }

    KnapsackSolution sol;
    std::size_t c = width - 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (!take[i][c]) continue;
        sol.selected.push_back(useful[i].id);
        sol.total += useful[i].value;
        sol.weight += useful[i].weight;
        c -= static_cast<std::size_t>(useful[i].weight);
    }
    return sol;
}

KnapsackSolution knapsack_bruteforce(std::span<const KnapsackItem> items, std::int64_t capacity) {
    if (items.size() > 20) throw std::invalid_argument("brute-force knapsack limited to 20 items");
    if (capacity < 0) throw std::invalid_argument("negative knapsack capacity");
    std::vector<KnapsackItem> sorted(items.begin(), items.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    const std::size_t n = sorted.size();

    // Ascending-id sequence comparison on bitmasks (bit i = i-th smallest id).
    auto lex_less = [](std::uint32_t a, std::uint32_t b) {
        const std::uint32_t diff = a ^ b;
        if (diff == 0) return false;
        const int j = std::countr_zero(diff);
        const bool a_has = (a >> j) & 1U;
        const std::uint32_t other_rest = (a_has ? b : a) >> (j + 1);
        // The set holding element j is smaller unless the other set stops at j.
        return a_has ? other_rest != 0 : other_rest == 0;
    };

    std::uint32_t best_mask = 0;
    Money best_value;
    std::int64_t best_weight = 0;
    std::uint32_t mask = 0;
    Money v;
    std::int64_t w = 0;
    const std::uint64_t count = std::uint64_t{1} << n;
    for (std::uint64_t step = 1; step < count; ++step) {
        // Gray-code walk: flip one item per step.
        const int bit = std::countr_zero(step);
        mask ^= 1U << bit;
        if ((mask >> bit) & 1U) {
            v += sorted[bit].value;
            w += sorted[bit].weight;
        } else {
            v -= sorted[bit].value;
            w -= sorted[bit].weight;
        }
        if (w > capacity) continue;
        if (v > best_value || (v == best_value && (w < best_weight || (w == best_weight && lex_less(mask, best_mask))))) {
            best_value = v;
            best_weight = w;
            best_mask = mask;
        }
    }
    KnapsackSolution sol{best_value, best_weight, {}};
    for (std::size_t i = 0; i < n; ++i)
        if ((best_mask >> i) & 1U) sol.selected.push_back(sorted[i].id);
    return sol;
}

namespace {

struct ContentTrajectories {
    std::int64_t size = 0;
    // Best utility per occupancy pattern (bit l set = cached at period l's
    // first slot); nullopt when no feasible trajectory has that pattern.
    std::vector<std::optional<Money>> best;
};

ContentTrajectories enumerate_trajectories(const ContentCatalogEntry& e, const RequestTrace& trace,
                                           const EconomicParams& params, std::int64_t b, std::int64_t periods) {
    ContentTrajectories out;
    out.size = e.size;
    out.best.assign(std::size_t{1} << periods, std::nullopt);

    std::vector<std::int64_t> requests(static_cast<std::size_t>(b * periods));
    trace.copy_counts(e.id, 0, requests);

    std::vector<std::int64_t> k(static_cast<std::size_t>(periods), 0);
    const Money margin_cost = params.c_d * e.size;
    while (true) {
        bool feasible = true;
        Money total;
        unsigned pattern = 0;
        for (std::int64_t l = 0; l < periods && feasible; ++l) {
            const std::int64_t kl = k[static_cast<std::size_t>(l)];
            if (kl == 0) continue;
            pattern |= 1U << l;
            const Slot start = l * b;
            const std::int64_t kprev = l > 0 ? k[static_cast<std::size_t>(l - 1)] : 0;
            const bool carried = l > 0 && kprev == b;
            if (!carried) {
                const Slot age = aoi(start, e.t_gen);
                if (!(age > 0 && age <= params.phi)) {
                    feasible = false;
                    break;
                }
                total -= e.price + margin_cost;
            }
            std::vector<ServedSample> prev;
            for (std::int64_t d = 0; d < kprev; ++d) {
                const Slot t = start - b + d;
                prev.push_back({t, requests[static_cast<std::size_t>(t)], aoi(t + 1, e.t_gen)});
            }
            const Money fee = service_fee(e, average_aoi(prev), aoi(start, e.t_gen), params);
            for (std::int64_t d = 0; d < kl; ++d) {
                total += (fee + margin_cost) * requests[static_cast<std::size_t>(start + d)];
                total -= params.c_a * e.size;
            }
        }
        if (feasible) {
            auto& slot = out.best[pattern];
            if (!slot || total > *slot) slot = total;
        }
        // Next assignment in {0..b}^periods.
        std::int64_t l = 0;
        while (l < periods && ++k[static_cast<std::size_t>(l)] > b) k[static_cast<std::size_t>(l++)] = 0;
        if (l == periods) break;
    }
    return out;
}

}  // namespace

Money offline_optimal_bruteforce(const Catalog& catalog, const RequestTrace& trace, const EconomicParams& params,
                                 const SimClock& clock) {
    const std::int64_t b = clock.period_length();
    const std::int64_t periods = clock.periods();
    if (catalog.size() > kOfflineMaxContents || periods > kOfflineMaxPeriods || b > kOfflineMaxPeriodLength)
        throw std::invalid_argument("instance too large for exhaustive offline search (limits: " +
                                    std::to_string(kOfflineMaxContents) + " contents, " +
                                    std::to_string(kOfflineMaxPeriods) + " periods, b <= " +
                                    std::to_string(kOfflineMaxPeriodLength) + ")");
    std::vector<ContentTrajectories> contents;
    for (const auto& e : catalog.entries()) contents.push_back(enumerate_trajectories(e, trace, params, b, periods));

    using Used = std::array<std::int64_t, kOfflineMaxPeriods>;
    std::map<std::pair<std::size_t, Used>, Money> memo;
    // Best total over contents [i, n) given per-period capacity already used.
    auto solve = [&](auto&& self, std::size_t i, const Used& used) -> Money {
        if (i == contents.size()) return Money{};
        auto key = std::make_pair(i, used);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        const auto& c = contents[i];
        Money best = self(self, i + 1, used);  // pattern 0 is always feasible with utility 0
        for (std::size_t pattern = 1; pattern < c.best.size(); ++pattern) {
            if (!c.best[pattern]) continue;
            Used next = used;
            bool fits = true;
            for (std::int64_t l = 0; l < periods; ++l) {
                if (!((pattern >> l) & 1U)) continue;
                next[static_cast<std::size_t>(l)] += c.size;
                fits = fits && next[static_cast<std::size_t>(l)] <= params.s_max;
            }
            if (!fits) continue;
            best = std::max(best, *c.best[pattern] + self(self, i + 1, next));
        }
        memo.emplace(key, best);
        return best;
    };
    return solve(solve, 0, Used{});
}

}  // namespace aoicache
