#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "aoicache/core.hpp"
#include "aoicache/dt.hpp"
#include "aoicache/optimizer.hpp"
#include "aoicache/predictor.hpp"

namespace aoicache {

using FeeTable = std::unordered_map<ContentId, Money>;

/// What a strategy sees at a period boundary.
struct StrategyContext {
    std::int64_t period = 0;
    Slot now = 0;
    std::int64_t period_length = 1;
    const DtSnapshot* snapshot = nullptr;
    /// N_p†: ascending ids the twin believes purchasable now.
    std::vector<ContentId> purchasable;
    /// N_c: ascending ids cached at the last slot of the previous period
    /// (carryover-eligible).
    std::vector<ContentId> cached;
    /// Service fee of every content in N_p† ∪ N_c for this period.
    const FeeTable* fees = nullptr;
    EconomicParams params;
    Predictor* predictor = nullptr;

    Money fee(ContentId id) const;
    /// Catalog entry of a candidate (from the snapshot).
    const ContentCatalogEntry& entry(ContentId id) const;
    bool is_cached(ContentId id) const;
    /// N_p† ∪ N_c, ascending.
    std::vector<ContentId> candidates() const;
};

/// What a strategy sees at a mid-period twin update.
struct MidPeriodContext {
    std::int64_t period = 0;
    Slot now = 0;
    std::int64_t period_length = 1;
    /// Offset of `now` inside the period (>= 1).
    std::int64_t offset = 0;
    const DtSnapshot* snapshot = nullptr;
    /// Contents cached at slot now - 1, with their current planned prefix.
    std::vector<std::pair<ContentId, std::int64_t>> cached;
    const FeeTable* fees = nullptr;
    EconomicParams params;
    Predictor* predictor = nullptr;

    std::int64_t remaining() const { return period_length - offset; }
};

/// New plan for the rest of the period: keep the content for `remaining`
/// more slots starting at `now` (0 releases it immediately).
struct PrefixRevision {
    ContentId id = 0;
    std::int64_t remaining = 0;
};

/// Realized outcome of one content over a finished period.
struct ContentOutcome {
    ContentId id = 0;
    Money utility;
};

class Strategy {
public:
    virtual ~Strategy() = default;
    virtual std::string name() const = 0;

    /// Purchase and prefix decisions for the period. Contents of N_c absent
    /// from the plan (or with prefix 0) are released at the boundary.
    virtual PeriodPlan plan_period(const StrategyContext& ctx) = 0;
    /// Mid-period re-optimization; empty means keep the current plan.
    virtual std::vector<PrefixRevision> revise(const MidPeriodContext&) { return {}; }
    /// Realized per-content utilities of the period that just ended.
    virtual void observe_period(std::int64_t /*period*/, const std::vector<ContentOutcome>&) {}
};

/// Predictions over `horizon` slots from ctx.now for every id, batched.
std::vector<PredictionResponse> predict_for(Predictor& predictor, const DtSnapshot& snapshot,
                                            std::span<const ContentId> ids, Slot now, std::int64_t horizon);

/// The online knapsack strategy: per-content best prefix from predictions
/// (purchase cost only for contents not in N_c), knapsack over the cache
/// capacity, and prefix re-optimization at every mid-period twin update.
class DtOcaStrategy final : public Strategy {
public:
    /// Uses ctx.predictor; `label` distinguishes e.g. "dtoca" and "dtoca-pp".
    explicit DtOcaStrategy(std::string label = "dtoca") : label_(std::move(label)) {}
    std::string name() const override { return label_; }
    PeriodPlan plan_period(const StrategyContext& ctx) override;
    std::vector<PrefixRevision> revise(const MidPeriodContext& ctx) override;

private:
    std::string label_;
};

/// Releases everything at each boundary and solves the period with perfect
/// knowledge, paying the purchase cost for every content it caches.
class GreedyOfflineStrategy final : public Strategy {
public:
    explicit GreedyOfflineStrategy(std::shared_ptr<const RequestTrace> trace) : oracle_(std::move(trace)) {}
    std::string name() const override { return "greedy-offline"; }
    PeriodPlan plan_period(const StrategyContext& ctx) override;

private:
    PerfectPredictor oracle_;
};

/// Fills the cache in rank order, skipping what does not fit; selected
/// contents are kept the whole period. Ranking ties go to the lower id.
PeriodPlan rank_and_fill(const StrategyContext& ctx, const std::vector<std::pair<ContentId, double>>& scores);

/// Ranks N_p† ∪ N_c by predicted requests over the coming period.
class OpLfuStrategy final : public Strategy {
public:
    std::string name() const override { return "oplfu"; }
    PeriodPlan plan_period(const StrategyContext& ctx) override;
};

/// Ranks by observed requests in the last `window` slots of twin history.
class WLfuStrategy final : public Strategy {
public:
    explicit WLfuStrategy(std::int64_t window);
    std::string name() const override { return "wlfu"; }
    PeriodPlan plan_period(const StrategyContext& ctx) override;

private:
    std::int64_t window_;
};

/// Freshest first.
class FifoStrategy final : public Strategy {
public:
    std::string name() const override { return "fifo"; }
    PeriodPlan plan_period(const StrategyContext& ctx) override;
};

/// Follow the perturbed leader: exponential initial perturbation per content
/// plus the realized utility it has accumulated in this run.
class FtplStrategy final : public Strategy {
public:
    FtplStrategy(double eta, std::uint64_t seed);
    std::string name() const override { return "ftpl"; }
    PeriodPlan plan_period(const StrategyContext& ctx) override;
    void observe_period(std::int64_t period, const std::vector<ContentOutcome>& outcomes) override;

    double perturbation(ContentId id) const;
    double score(ContentId id) const;

private:
    double eta_;
    std::uint64_t seed_;
    std::unordered_map<ContentId, Money> accumulated_;
};

/// Uniformly shuffled fill.
class RandomStrategy final : public Strategy {
public:
    explicit RandomStrategy(std::uint64_t seed) : rng_(seed) {}
    std::string name() const override { return "random"; }
    PeriodPlan plan_period(const StrategyContext& ctx) override;

private:
    Rng rng_;
};

}  // namespace aoicache
