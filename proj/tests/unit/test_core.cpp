#include <doctest.h>

#include <algorithm>
#include <random>

#include "aoicache/core.hpp"
#include "aoicache/errors.hpp"

using namespace aoicache;

namespace {

Money units(double v) { return Money::from_double(v); }

ContentCatalogEntry content(ContentId id, Slot t_gen, std::int64_t size, double price, double ceiling = 30) {
    return {id, t_gen, size, units(price), units(ceiling)};
}

}  // namespace

TEST_CASE("money is exact fixed point") {
    CHECK(Money::parse("12.5").micros() == 12'500'000);
    CHECK(Money::parse("-0.000001").micros() == -1);
    CHECK(Money::parse("7").to_string() == "7");
    CHECK(Money::parse("21.200000").to_string() == "21.2");
    CHECK_THROWS_AS(Money::parse("1.0000001"), std::invalid_argument);
    CHECK_THROWS_AS(Money::parse("abc"), std::invalid_argument);
    CHECK(Money::from_micros(100'000) * 3 == Money::parse("0.3"));
    CHECK(Money::from_units(2).scaled(0.5) == Money::from_units(1));
}

TEST_CASE("aoi follows the generation slot") {
    CHECK(aoi(5, 3) == 2);
    CHECK(aoi(3, 3) == 0);
    CHECK(aoi(2, 5) == 0);
}

TEST_CASE("aoi grows by one per slot after generation") {
    for (Slot g = 0; g < 20; ++g)
        for (Slot t = 0; t < 40; ++t) {
            const Slot next = aoi(t + 1, g);
            CHECK((next == 0 || next == aoi(t, g) + 1));
            if (t >= g) CHECK(aoi(t + 1, g) >= aoi(t, g));
        }
}

TEST_CASE("slot_to_period splits slots") {
    CHECK(slot_to_period(13, 10) == PeriodPosition{1, 3});
    CHECK(slot_to_period(10, 10) == PeriodPosition{1, 0});
    CHECK(slot_to_period(0, 1) == PeriodPosition{0, 0});
    for (Slot t = 0; t < 100; ++t)
        for (std::int64_t b = 1; b < 12; ++b) {
            const auto p = slot_to_period(t, b);
            CHECK(t == b * p.period + p.offset);
            CHECK(p.offset >= 0);
            CHECK(p.offset < b);
        }
}

TEST_CASE("clock requires T = b * L") {
    const auto c = SimClock::make(10, 3000, 300);
    CHECK(c.periods() == 300);
    CHECK(c.first_slot(2) == 20);
    CHECK(c.last_slot(2) == 29);
    CHECK_THROWS_AS(SimClock::make(10, 3000, 299), ConfigError);
    CHECK_THROWS_AS(SimClock::make(7, 3000), ConfigError);
    CHECK_THROWS_AS(SimClock::make(0, 3000), ConfigError);
}

TEST_CASE("average_aoi weights by served requests") {
    // t_gen = 9, counts [2, 0, 1] at slots 10..12, delivered one slot later
    const std::vector<ServedSample> s{{10, 2, aoi(11, 9)}, {11, 0, aoi(12, 9)}, {12, 1, aoi(13, 9)}};
    const auto avg = average_aoi(s);
    REQUIRE(avg);
    CHECK(avg->weighted_sum == 8);
    CHECK(avg->count == 3);
    CHECK(avg->value() == doctest::Approx(8.0 / 3.0));

    const std::vector<ServedSample> single{{4, 1, 7}};
    CHECK(average_aoi(single)->value() == 7.0);

    const std::vector<ServedSample> uniform{{0, 5, 1}, {1, 5, 2}, {2, 5, 3}};
    CHECK(average_aoi(uniform)->value() == 2.0);

    CHECK_FALSE(average_aoi({}).has_value());
    const std::vector<ServedSample> none{{0, 0, 3}};
    CHECK_FALSE(average_aoi(none).has_value());
}

TEST_CASE("service fee from the previous period") {
    EconomicParams p;
    const auto e = content(1, 0, 4, 10, 30);
    CHECK(service_fee(e, AverageAoi{12, 1}, 3, p) == units(18));
    p.lambda = Money{};
    CHECK(service_fee(e, AverageAoi{50, 2}, 3, p) == units(30));
    p.lambda = units(1);
    CHECK(service_fee(e, std::nullopt, 5, p) == units(25));
    // exact ratio: 8/3 AoI at lambda 1 rounds at the micro resolution
    CHECK(service_fee(e, AverageAoi{8, 3}, 0, p) == Money::from_micros(30'000'000 - 2'666'667));
    // not clamped
    CHECK(service_fee(e, AverageAoi{45, 1}, 0, p) == units(-15));
    CHECK_THROWS_AS(service_fee(e, std::nullopt, -1, p), std::invalid_argument);
}

TEST_CASE("realized utility per the period utility formula") {
    EconomicParams p;  // c_d = 1, c_a = 0.1
    const auto e = content(1, 0, 4, 10);
    const std::vector<std::int64_t> r{3, 1, 5, 5};
    CHECK(realized_utility(e, {true, 2}, units(5), r, p) == units(21.2));
    CHECK(realized_utility(e, {false, 0}, units(5), r, p) == Money{});
    const std::vector<std::int64_t> zero{0};
    CHECK(realized_utility(e, {false, 1}, units(123), zero, p) == units(-0.4));
    CHECK_THROWS_AS(realized_utility(e, {true, 0}, units(5), r, p), std::invalid_argument);
    CHECK_THROWS_AS(realized_utility(e, {false, 5}, units(5), r, p), std::invalid_argument);
}

TEST_CASE("realized utility with no requests is pure cost") {
    EconomicParams p;
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        const auto size = std::uniform_int_distribution<std::int64_t>(1, 50)(rng);
        const auto price = std::uniform_int_distribution<std::int64_t>(0, 200)(rng);
        const auto k = std::uniform_int_distribution<std::int64_t>(1, 10)(rng);
        const bool purchase = rng() % 2 == 0;
        const auto e = content(1, 0, size, static_cast<double>(price));
        const std::vector<std::int64_t> r(10, 0);
        const Money expect = -(p.c_a * size * k) - (purchase ? e.price + p.c_d * size : Money{});
        CHECK(realized_utility(e, {purchase, k}, units(17), r, p) == expect);
    }
}

TEST_CASE("realized utility is additive over slot groups") {
    EconomicParams p;
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        const auto e = content(1, 0, std::uniform_int_distribution<std::int64_t>(1, 50)(rng), 57);
        std::vector<std::int64_t> r(10);
        for (auto& x : r) x = std::uniform_int_distribution<std::int64_t>(0, 9)(rng);
        const auto k = std::uniform_int_distribution<std::int64_t>(1, 10)(rng);
        const auto split = std::uniform_int_distribution<std::int64_t>(0, k)(rng);
        const Money fee = Money::from_micros(std::uniform_int_distribution<std::int64_t>(-5'000'000, 30'000'000)(rng));
        const Money whole = realized_utility(e, {true, k}, fee, r, p);
        const Money first = realized_utility(e, {false, split}, fee, r, p);
        const std::vector<std::int64_t> rest(r.begin() + split, r.end());
        const Money second = realized_utility(e, {false, k - split}, fee, rest, p);
        CHECK(whole == first + second - (e.price + p.c_d * e.size));
    }
}

TEST_CASE("cache transactions respect capacity") {
    CacheState s;
    const std::vector<CacheAdmission> fill{{1, 20}, {2, 270}};
    s = apply_cache_transaction(s, {}, fill, 300).state;
    CHECK(s.occupied() == 290);

    const std::vector<ContentId> rel{1};
    const std::vector<CacheAdmission> add{{3, 25}};
    const auto next = apply_cache_transaction(s, rel, add, 300).state;
    CHECK(next.occupied() == 295);
    CHECK(next.contains(3));
    CHECK_FALSE(next.contains(1));

    const std::vector<CacheAdmission> over{{4, 11}};
    CHECK_THROWS_AS(apply_cache_transaction(s, {}, over, 300), CapacityExceeded);
    CHECK(s.occupied() == 290);  // untouched

    const std::vector<ContentId> ghost{99};
    const auto txn = apply_cache_transaction(s, ghost, {}, 300);
    CHECK(txn.state.occupied() == 290);
    CHECK(txn.ignored_releases == std::vector<ContentId>{99});

    const std::vector<CacheAdmission> again{{2, 270}};
    CHECK_THROWS_AS(apply_cache_transaction(s, {}, again, 300), std::invalid_argument);
}

TEST_CASE("occupancy equals the sum of cached sizes over random transactions") {
    std::mt19937_64 rng(3);
    CacheState s;
    for (int step = 0; step < 2000; ++step) {
        std::vector<ContentId> rel;
        for (const auto& [id, size] : s.cached())
            if (rng() % 3 == 0) rel.push_back(id);
        std::vector<CacheAdmission> add;
        for (int j = 0; j < 3; ++j) {
            const ContentId id = rng() % 40;
            const bool stays = s.contains(id) && std::find(rel.begin(), rel.end(), id) == rel.end();
            const bool dup = std::any_of(add.begin(), add.end(), [&](const auto& a) { return a.id == id; });
            if (!stays && !dup) add.push_back({id, static_cast<std::int64_t>(1 + rng() % 50)});
        }
        try {
            s = apply_cache_transaction(s, rel, add, 300).state;
        } catch (const CapacityExceeded&) {
        }
        std::int64_t sum = 0;
        for (const auto& [id, size] : s.cached()) sum += size;
        CHECK(sum == s.occupied());
        CHECK(s.occupied() <= 300);
    }
}

TEST_CASE("catalog validates entries") {
    CHECK_THROWS_AS(Catalog({content(1, 0, 0, 1)}), std::invalid_argument);
    CHECK_THROWS_AS(Catalog({content(1, 0, 1, -1)}), std::invalid_argument);
    CHECK_THROWS_AS(Catalog({content(1, 0, 1, 1), content(1, 3, 1, 1)}), std::invalid_argument);
    const Catalog c({content(5, 9, 1, 1), content(2, 3, 1, 1), content(7, 3, 2, 1)});
    CHECK(c.entries()[0].id == 2);
    CHECK(c.entries()[1].id == 7);
    CHECK(c.generated_between(3, 8).size() == 2);
    CHECK(c.generated_between(4, 9).size() == 1);
    CHECK(c.max_size() == 2);
}
