#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <sstream>

#include "aoicache/commands.hpp"
#include "test_util.hpp"

using namespace aoicache;

namespace {

struct CliResult {
    int code = 0;
    std::string out;
    std::string err;
};

CliResult cli(std::vector<std::string> args) {
    args.insert(args.begin(), "aoicache");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

int shell(const std::string& command) {
    const int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

bool contains(const std::string& text, const std::string& part) { return text.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("usage errors exit with 2") {
    CHECK(cli({}).code == 2);
    CHECK(cli({"frobnicate"}).code == 2);
    CHECK(cli({"run", "--preset=tiny", "--no-such-option=1"}).code == 2);
    CHECK(cli({"run", "--preset=tiny", "--lambda"}).code == 2);
    CHECK(cli({"run", "--preset=tiny", "--lambda=abc"}).code == 2);
    CHECK(cli({"run", "--preset=tiny", "--lambda=-1"}).code == 2);
    CHECK(cli({"run", "--preset=nonexistent"}).code == 2);
    CHECK(cli({"run", "/no/such/config.cfg"}).code == 2);
    CHECK(cli({"bound"}).code == 2);
}

TEST_CASE("overrides show up in the effective configuration") {
    test::TempDir dir;
    const auto r = cli({"run", "--preset=tiny", "--lambda=2", "--strategy=fifo", "--out=" + dir.path().string()});
    CHECK(r.code == 0);
    CHECK(contains(r.out, "economics.lambda=2\n"));
    CHECK(contains(r.out, "strategy.name=fifo\n"));
    for (const char* f : {"report.csv", "summary.csv", "runlog.csv", "meta.txt"})
        CHECK(std::filesystem::exists(dir.path() / f));
}

TEST_CASE("config files are layered under overrides") {
    test::TempDir dir;
    const auto cfg = dir.file("c.cfg");
    test::write_file(cfg, "# comment\npreset = tiny\neconomics.phi = 12\nclock.b = 6\n");
    const auto r = cli({"run", cfg, "--b", "5", "--strategy=oplfu", "--out=" + dir.path().string()});
    CHECK(r.code == 0);
    CHECK(contains(r.out, "economics.phi=12\n"));
    CHECK(contains(r.out, "clock.b=5\n"));
    test::write_file(cfg, "economics.unknown = 3\n");
    CHECK(cli({"run", cfg}).code == 2);
    test::write_file(cfg, "just words\n");
    CHECK(cli({"run", cfg}).code == 2);
}

TEST_CASE("a missing trace file is a configuration error naming the path") {
    const auto r = cli({"run", "--preset=tiny", "--workload.source=ingested",
                        "--workload.catalog_file=/no/such/catalog.csv", "--workload.trace_file=/no/such/trace.csv"});
    CHECK(r.code == 2);
    CHECK(contains(r.err, "/no/such/"));
}

TEST_CASE("duplicate strategies and empty sweeps are rejected") {
    CHECK(cli({"compare", "--preset=tiny", "--strategies=fifo,fifo"}).code == 2);
    CHECK(cli({"compare", "--preset=tiny", "--strategies=fifo,bogus"}).code == 2);
    CHECK(cli({"sweep", "--preset=tiny"}).code == 2);
    CHECK(cli({"sweep", "--preset=tiny", "--axis=lambda", "--values="}).code == 2);
    CHECK(cli({"sweep", "--preset=tiny", "--axis=nonsense", "--values=1"}).code == 2);
}

TEST_CASE("runtime failures exit with 1") {
    test::TempDir dir;
    test::write_file(dir.file("catalog.csv"), "id;t_gen;size;price;fee_ceiling\n1;0;1;1;1\n");
    test::write_file(dir.file("trace.csv"), "wrong;header\n");
    const auto r = cli({"ingest", "--workload.catalog_file=" + dir.file("catalog.csv"),
                        "--workload.trace_file=" + dir.file("trace.csv"), "--out=" + dir.path().string()});
    CHECK(r.code == 1);
    CHECK_FALSE(r.err.empty());
}

TEST_CASE("generate, ingest and run on the ingested workload") {
    test::TempDir gen, ing, run;
    REQUIRE(cli({"gen-workload", "--preset=tiny", "--seed=5", "--out=" + gen.path().string()}).code == 0);
    const auto r = cli({"ingest", "--workload.catalog_file=" + gen.file("catalog.csv"),
                        "--workload.trace_file=" + gen.file("trace.csv"), "--out=" + ing.path().string()});
    REQUIRE(r.code == 0);
    CHECK(contains(r.out, "rejected_rows=0"));
    // normalized files are a fixed point of ingest
    CHECK(test::read_file(ing.file("trace.csv")) ==
          test::read_file(gen.file("trace.csv")).substr(test::read_file(gen.file("trace.csv")).find('\n') + 1));
    const auto direct = cli({"run", "--preset=tiny", "--seed=5", "--strategy=dtoca-pp", "--out=" + run.file("a")});
    const auto ingested = cli({"run", "--preset=tiny", "--workload.source=ingested", "--strategy=dtoca-pp",
                               "--workload.catalog_file=" + ing.file("catalog.csv"),
                               "--workload.trace_file=" + ing.file("trace.csv"), "--out=" + run.file("b")});
    REQUIRE(direct.code == 0);
    REQUIRE(ingested.code == 0);
    CHECK(test::read_file(run.file("a/report.csv")) == test::read_file(run.file("b/report.csv")));
}

TEST_CASE("compare shares one trace and reruns are byte-identical") {
    test::TempDir a, b;
    const std::vector<std::string> base{"compare", "--preset=tiny", "--jobs=2"};
    auto args = base;
    args.push_back("--out=" + a.path().string());
    const auto r1 = cli(args);
    args.back() = "--out=" + b.path().string();
    const auto r2 = cli(args);
    REQUIRE(r1.code == 0);
    REQUIRE(r2.code == 0);
    CHECK(contains(r1.out, "trace_checksum="));
    for (const char* f : {"report.csv", "summary.csv"})
        CHECK(test::read_file(a.file(f)) == test::read_file(b.file(f)));
    const auto summary = test::read_file(a.file("summary.csv"));
    CHECK(std::count(summary.begin(), summary.end(), '\n') == 8);
}

TEST_CASE("sweep writes one row per point and period") {
    test::TempDir dir;
    const auto r = cli({"sweep", "--preset=tiny", "--strategies=dtoca,fifo", "--axis=delta", "--values=1,2,5",
                        "--out=" + dir.path().string()});
    REQUIRE(r.code == 0);
    const auto summary = test::read_file(dir.file("sweep_dt.interval_summary.csv"));
    CHECK(std::count(summary.begin(), summary.end(), '\n') == 7);
    CHECK(std::filesystem::exists(dir.path() / "sweep_dt.interval.csv"));
}

TEST_CASE("bound reads a run log") {
    test::TempDir dir;
    REQUIRE(cli({"run", "--preset=tiny", "--strategy=dtoca-pp", "--out=" + dir.path().string()}).code == 0);
    const auto r = cli({"bound", dir.file("runlog.csv")});
    CHECK(r.code == 0);
    CHECK(contains(r.out, "alpha="));
    CHECK(contains(r.out, "bound="));
    CHECK(cli({"bound", dir.file("missing.csv")}).code == 2);

    test::write_file(dir.file("empty.csv"),
                     "# strategy=x\n# b=2\n# T=4\n# lambda=1\n# c_d=1\n# c_a=0.1\n# phi=30\n# s_max=10\n"
                     "period;id;purchase;prefix_len;served;aoi_weighted_sum;fee;size;price;utility\n");
    const auto u = cli({"bound", dir.file("empty.csv")});
    CHECK(u.code == 0);
    CHECK(contains(u.out, "bound=undefined"));
}

TEST_CASE("the installed binary reports exit codes") {
    const std::string bin = std::string("'") + CLI_PATH + "'";
    CHECK(shell(bin + " --help > /dev/null") == 0);
    CHECK(shell(bin + " run --preset=tiny --bogus=1 > /dev/null 2>&1") == 2);
    test::TempDir dir;
    CHECK(shell(bin + " run --preset=tiny --strategy=fifo --out='" + dir.path().string() + "' > /dev/null") == 0);
}
