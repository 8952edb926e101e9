#include "aoicache/strategies.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace aoicache {

Money StrategyContext::fee(ContentId id) const {
    auto it = fees->find(id);
    if (it == fees->end()) throw std::out_of_range("no service fee for content " + std::to_string(id));
    return it->second;
}

const ContentCatalogEntry& StrategyContext::entry(ContentId id) const {
    const auto* e = snapshot->entry(id);
    if (e == nullptr) throw std::out_of_range("content " + std::to_string(id) + " is not visible to the twin");
    return *e;
}

bool StrategyContext::is_cached(ContentId id) const { return std::binary_search(cached.begin(), cached.end(), id); }

std::vector<ContentId> StrategyContext::candidates() const {
    std::vector<ContentId> out;
    std::set_union(purchasable.begin(), purchasable.end(), cached.begin(), cached.end(), std::back_inserter(out));
    return out;
}

std::vector<PredictionResponse> predict_for(Predictor& predictor, const DtSnapshot& snapshot,
                                            std::span<const ContentId> ids, Slot now, std::int64_t horizon) {
    std::vector<PredictionRequest> requests;
    requests.reserve(ids.size());
    for (ContentId id : ids) {
        const auto* e = snapshot.entry(id);
        if (e == nullptr) throw std::out_of_range("content " + std::to_string(id) + " is not visible to the twin");
        requests.push_back({id, snapshot.history(id), horizon, {snapshot.taken_at(), e->t_gen, now}});
    }
    return predictor.predict_batch(requests);
}

namespace {

SlotEconomics economics_of(const ContentCatalogEntry& e, Money fee, const EconomicParams& p) {
    return {fee, e.size, p.c_d, p.c_a};
}

Money purchase_cost(const ContentCatalogEntry& e, const EconomicParams& p) { return e.price + p.c_d * e.size; }

// Per-content best prefixes plus the knapsack over them.
PeriodPlan solve_period(const StrategyContext& ctx, std::span<const ContentId> ids,
                        const std::vector<PredictionResponse>& predictions, bool free_carryover) {
    std::vector<KnapsackItem> items;
    std::unordered_map<ContentId, PlanRow> rows;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const ContentId id = ids[i];
        const auto& e = ctx.entry(id);
        const bool carried = free_carryover && ctx.is_cached(id);
        const auto eval = best_prefix_utility(predictions[i].predicted, ctx.period_length,
                                              economics_of(e, ctx.fee(id), ctx.params),
                                              carried ? Money{} : purchase_cost(e, ctx.params));
        items.push_back({id, eval.best_utility, e.size});
        rows[id] = {!carried, eval.best_prefix_len};
    }
    PeriodPlan plan;
    for (ContentId id : knapsack_01(items, ctx.params.s_max).selected) plan[id] = rows.at(id);
    return plan;
}

}  // namespace

PeriodPlan DtOcaStrategy::plan_period(const StrategyContext& ctx) {
    if (ctx.predictor == nullptr) throw std::logic_error("dtoca needs a predictor");
    const auto ids = ctx.candidates();
    const auto predictions = predict_for(*ctx.predictor, *ctx.snapshot, ids, ctx.now, ctx.period_length);
    return solve_period(ctx, ids, predictions, true);
}

std::vector<PrefixRevision> DtOcaStrategy::revise(const MidPeriodContext& ctx) {
    if (ctx.predictor == nullptr) throw std::logic_error("dtoca needs a predictor");
    std::vector<ContentId> ids;
    for (const auto& [id, planned] : ctx.cached) ids.push_back(id);
    const auto predictions = predict_for(*ctx.predictor, *ctx.snapshot, ids, ctx.now, ctx.remaining());
    std::vector<PrefixRevision> out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto* e = ctx.snapshot->entry(ids[i]);
        const auto eval = best_remaining_prefix(predictions[i].predicted, ctx.period_length,
                                                economics_of(*e, ctx.fees->at(ids[i]), ctx.params));
        out.push_back({ids[i], eval.best_prefix_len});
    }
    return out;
}

PeriodPlan GreedyOfflineStrategy::plan_period(const StrategyContext& ctx) {
    const auto predictions = predict_for(oracle_, *ctx.snapshot, ctx.purchasable, ctx.now, ctx.period_length);
    return solve_period(ctx, ctx.purchasable, predictions, false);
}

PeriodPlan rank_and_fill(const StrategyContext& ctx, const std::vector<std::pair<ContentId, double>>& scores) {
    std::vector<std::pair<ContentId, double>> ranked = scores;
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    PeriodPlan plan;
    std::int64_t room = ctx.params.s_max;
    for (const auto& [id, score] : ranked) {
        const auto size = ctx.entry(id).size;
        if (size > room) continue;
        room -= size;
        plan[id] = {!ctx.is_cached(id), ctx.period_length};
    }
    return plan;
}

PeriodPlan OpLfuStrategy::plan_period(const StrategyContext& ctx) {
    if (ctx.predictor == nullptr) throw std::logic_error("oplfu needs a predictor");
    const auto ids = ctx.candidates();
    const auto predictions = predict_for(*ctx.predictor, *ctx.snapshot, ids, ctx.now, ctx.period_length);
    std::vector<std::pair<ContentId, double>> scores;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto& p = predictions[i].predicted;
        scores.emplace_back(ids[i], std::accumulate(p.begin(), p.end(), 0.0));
    }
    return rank_and_fill(ctx, scores);
}

WLfuStrategy::WLfuStrategy(std::int64_t window) : window_(window) {
    if (window < 1) throw std::invalid_argument("W-LFU window must be >= 1");
}

PeriodPlan WLfuStrategy::plan_period(const StrategyContext& ctx) {
    std::vector<std::pair<ContentId, double>> scores;
    for (ContentId id : ctx.candidates()) {
        const auto h = ctx.snapshot->recent_history(id, window_);
        scores.emplace_back(id, static_cast<double>(std::accumulate(h.begin(), h.end(), std::int64_t{0})));
    }
    return rank_and_fill(ctx, scores);
}

PeriodPlan FifoStrategy::plan_period(const StrategyContext& ctx) {
    std::vector<std::pair<ContentId, double>> scores;
    for (ContentId id : ctx.candidates()) scores.emplace_back(id, static_cast<double>(ctx.entry(id).t_gen));
    return rank_and_fill(ctx, scores);
}

FtplStrategy::FtplStrategy(double eta, std::uint64_t seed) : eta_(eta), seed_(seed) {
    if (!(eta >= 0)) throw std::invalid_argument("FTPL noise scale must be >= 0");
}

double FtplStrategy::perturbation(ContentId id) const {
    if (eta_ == 0.0) return 0.0;
    Rng rng(derive_seed(seed_, id, 0x6674706cULL));
    return std::exponential_distribution<double>(1.0 / eta_)(rng);
}

double FtplStrategy::score(ContentId id) const {
    auto it = accumulated_.find(id);
    return perturbation(id) + (it == accumulated_.end() ? 0.0 : it->second.to_double());
}

PeriodPlan FtplStrategy::plan_period(const StrategyContext& ctx) {
    std::vector<std::pair<ContentId, double>> scores;
    for (ContentId id : ctx.candidates()) scores.emplace_back(id, score(id));
    return rank_and_fill(ctx, scores);
}

void FtplStrategy::observe_period(std::int64_t, const std::vector<ContentOutcome>& outcomes) {
    for (const auto& o : outcomes) accumulated_[o.id] += o.utility;
}

PeriodPlan RandomStrategy::plan_period(const StrategyContext& ctx) {
    auto ids = ctx.candidates();
    std::shuffle(ids.begin(), ids.end(), rng_);
    std::vector<std::pair<ContentId, double>> scores;
    for (std::size_t i = 0; i < ids.size(); ++i) scores.emplace_back(ids[i], static_cast<double>(ids.size() - i));
    return rank_and_fill(ctx, scores);
}

}  // namespace aoicache
