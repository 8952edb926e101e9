#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>

#include "aoicache/errors.hpp"
#include "aoicache/workload.hpp"
#include "test_util.hpp"

using namespace aoicache;

TEST_CASE("catalog marginals at full scale") {
    WorkloadConfig w;
    w.total_contents = 300'000;
    w.total_slots = 30'000;
    Rng rng(5);
    const auto c = generate_catalog(w, rng);
    REQUIRE(c.size() == 300'000);
    double size_sum = 0;
    for (const auto& e : c.entries()) {
        size_sum += static_cast<double>(e.size);
        CHECK(e.t_gen >= 0);
        CHECK(e.t_gen < 30'000);
        CHECK(e.size >= 2);
        CHECK(e.size <= 50);
        CHECK(e.price >= Money::from_units(20));
        CHECK(e.price <= Money::from_units(200));
    }
    CHECK(std::abs(size_sum / 300'000.0 - 26.0) <= 0.5);
}

TEST_CASE("single-content catalog") {
    WorkloadConfig w;
    w.total_contents = 1;
    Rng rng(1);
    const auto c = generate_catalog(w, rng);
    REQUIRE(c.size() == 1);
    CHECK(c.entries()[0].t_gen >= 0);
    CHECK(c.entries()[0].t_gen < w.total_slots);
}

TEST_CASE("catalog and trace generation are deterministic") {
    WorkloadConfig w;
    w.total_contents = 2000;
    Rng a(9), b(9);
    const auto ca = generate_catalog(w, a);
    const auto cb = generate_catalog(w, b);
    CHECK(ca == cb);
    const auto ta = generate_requests(ca, w.popularity, w.total_slots, 42);
    const auto tb = generate_requests(cb, w.popularity, w.total_slots, 42);
    CHECK(ta == tb);
    CHECK(ta.checksum() == tb.checksum());
    const auto tc = generate_requests(ca, w.popularity, w.total_slots, 43);
    CHECK(ta.checksum() != tc.checksum());

    test::TempDir dir;
    write_catalog_csv(dir.file("c1.csv"), ca);
    write_catalog_csv(dir.file("c2.csv"), cb);
    write_trace_csv(dir.file("t1.csv"), ta);
    write_trace_csv(dir.file("t2.csv"), tb);
    CHECK(test::read_file(dir.file("c1.csv")) == test::read_file(dir.file("c2.csv")));
    CHECK(test::read_file(dir.file("t1.csv")) == test::read_file(dir.file("t2.csv")));
}

TEST_CASE("no requests at or before generation") {
    WorkloadConfig w;
    w.total_contents = 3000;
    Rng rng(2);
    const auto c = generate_catalog(w, rng);
    const auto t = generate_requests(c, w.popularity, w.total_slots, 2);
    CHECK(t.total_requests() > 0);
    t.for_each_cell([&](ContentId id, Slot s, std::uint32_t) { CHECK(s > c.at(id).t_gen); });
}

TEST_CASE("zero shape yields an empty trace") {
    WorkloadConfig w;
    w.total_contents = 500;
    w.popularity.peak_rate_scale = 0;
    Rng rng(2);
    const auto c = generate_catalog(w, rng);
    CHECK(generate_requests(c, w.popularity, w.total_slots, 2).total_requests() == 0);
}

TEST_CASE("constant Poisson rate has the configured mean") {
    const Catalog c({{0, -1, 1, Money{}, Money{}}});
    PopularityProfile p;
    p.kind = PopularityKind::constant_poisson;
    p.constant_rate = 2.0;
    p.max_age = 0;
    const auto t = generate_requests(c, p, 10'000, 17);
    const double mean = static_cast<double>(t.total_requests()) / 10'000.0;
    CHECK(mean >= 1.94);
    CHECK(mean <= 2.06);
}

TEST_CASE("age-shaped demand peaks at the rise slot") {
    WorkloadConfig w;
    w.total_contents = 20'000;
    w.total_slots = 3000;
    Rng rng(4);
    const auto c = generate_catalog(w, rng);
    const auto& p = w.popularity;
    const auto t = generate_requests(c, p, w.total_slots, 4);
    std::map<Slot, double> by_age;
    std::int64_t n = 0;
    for (const auto& e : c.entries()) {
        if (e.t_gen + p.max_age >= w.total_slots) continue;
        ++n;
        for (Slot a = 1; a <= 30; ++a) by_age[a] += t.count(e.id, e.t_gen + a);
    }
    Slot best = 0;
    double best_mean = -1;
    for (const auto& [a, sum] : by_age)
        if (sum > best_mean) {
            best_mean = sum;
            best = a;
        }
    CHECK(best == static_cast<Slot>(p.rise_slot));
    // the empirical curve follows shape() up to the common peak-rate factor
    const double scale = by_age[static_cast<Slot>(p.rise_slot)] / p.shape(static_cast<Slot>(p.rise_slot));
    for (Slot a : {1, 2, 8, 12, 20}) CHECK(by_age[a] == doctest::Approx(scale * p.shape(a)).epsilon(0.1));
    CHECK(n > 10'000);
}

TEST_CASE("ingest round trip of the documented format") {
    test::TempDir dir;
    test::write_file(dir.file("cat.csv"), "id;t_gen;size;price;fee_ceiling\n7;0;3;12.5;100\n");
    test::write_file(dir.file("tr.csv"), "id;slot;count\n7;4;2\n");
    const auto r = ingest_trace(dir.file("cat.csv"), dir.file("tr.csv"));
    REQUIRE(r.catalog.size() == 1);
    const auto& e = r.catalog.at(7);
    CHECK(e.t_gen == 0);
    CHECK(e.size == 3);
    CHECK(e.price == Money::parse("12.5"));
    CHECK(e.fee_ceiling == Money::from_units(100));
    CHECK(r.trace.count(7, 4) == 2);
    CHECK(r.trace.total_requests() == 2);
    CHECK(r.diagnostics.empty());
}

TEST_CASE("ingest rejects requests before generation") {
    test::TempDir dir;
    test::write_file(dir.file("cat.csv"), "id;t_gen;size;price;fee_ceiling\n1;10;3;5;30\n");
    test::write_file(dir.file("tr.csv"), "id;slot;count\n1;5;2\n1;10;1\n1;11;4\n");
    const auto r = ingest_trace(dir.file("cat.csv"), dir.file("tr.csv"));
    CHECK(r.trace.total_requests() == 4);
    REQUIRE(r.diagnostics.size() == 2);
    CHECK(r.diagnostics[0].find(":2:") != std::string::npos);
    CHECK(r.diagnostics[1].find(":3:") != std::string::npos);
}

TEST_CASE("ingest minimum-requests filter") {
    test::TempDir dir;
    test::write_file(dir.file("cat.csv"), "id;t_gen;size;price;fee_ceiling\n1;0;3;5;30\n2;0;3;5;30\n");
    test::write_file(dir.file("tr.csv"), "id;slot;count\n1;1;3\n2;1;5\n2;2;1\n");
    const auto r = ingest_trace(dir.file("cat.csv"), dir.file("tr.csv"), {5});
    CHECK_FALSE(r.catalog.contains(1));
    CHECK(r.catalog.contains(2));
    CHECK(r.trace.total(1) == 0);
    CHECK(r.trace.total(2) == 6);
}

TEST_CASE("ingest errors carry line numbers") {
    test::TempDir dir;
    test::write_file(dir.file("cat.csv"), "id;t_gen;size;price;fee_ceiling\n1;0;3;5;30\n2;0;x;5;30\n");
    test::write_file(dir.file("tr.csv"), "id;slot;count\n");
    try {
        (void)ingest_trace(dir.file("cat.csv"), dir.file("tr.csv"));
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    test::write_file(dir.file("cat.csv"), "id;t_gen;size;price;fee_ceiling\n1;0;3;5;30\n");
    test::write_file(dir.file("tr.csv"), "# comment\nid;slot;count\n1;2;1\n9;2;1\n");
    try {
        (void)ingest_trace(dir.file("cat.csv"), dir.file("tr.csv"));
        FAIL("expected a referential error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 4);
        CHECK(std::string(e.what()).find("not in catalog") != std::string::npos);
    }
    test::write_file(dir.file("tr.csv"), "slot;id;count\n");
    CHECK_THROWS_AS(ingest_trace(dir.file("cat.csv"), dir.file("tr.csv")), ParseError);
}

TEST_CASE("ingest then serialize is a fixed point, plain and gzip") {
    WorkloadConfig w;
    w.total_contents = 400;
    w.total_slots = 400;
    Rng rng(8);
    const auto c = generate_catalog(w, rng);
    const auto t = generate_requests(c, w.popularity, w.total_slots, 8);
    test::TempDir dir;
    for (const std::string ext : {".csv", ".csv.gz"}) {
        write_catalog_csv(dir.file("c" + ext), c);
        write_trace_csv(dir.file("t" + ext), t);
        const auto r1 = ingest_trace(dir.file("c" + ext), dir.file("t" + ext));
        CHECK(r1.catalog == c);
        CHECK(r1.trace == t);
        write_catalog_csv(dir.file("c2" + ext), r1.catalog);
        write_trace_csv(dir.file("t2" + ext), r1.trace);
        const auto r2 = ingest_trace(dir.file("c2" + ext), dir.file("t2" + ext));
        CHECK(r2.catalog == r1.catalog);
        CHECK(r2.trace == r1.trace);
    }
    CHECK(test::read_file(dir.file("c.csv")) == test::read_file(dir.file("c2.csv")));
    CHECK(test::read_file(dir.file("t.csv")) == test::read_file(dir.file("t2.csv")));
}
