#include <catch2/catch.hpp>

#include <array>
#include <cstdio>
#include <fstream>
#include <string>

#include "test_util.hpp"

namespace {

struct RunResult {
    int status = -1;
    std::string out;
};

RunResult run(const std::string& args) {
    std::string cmd = std::string(BOOSQL_CLI) + " " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p);
    RunResult r;
    std::array<char, 4096> buf;
    while (size_t n = fread(buf.data(), 1, buf.size(), p)) r.out.append(buf.data(), n);
    int rc = pclose(p);
    r.status = WEXITSTATUS(rc);
    return r;
}

std::string hrs_path() { return std::string(BOOSQL_MODELS_DIR) + "/hrs.boo"; }

} // namespace

TEST_CASE("compile emits the schema and the reserve procedure") {
    RunResult r = run("compile " + hrs_path());
    CHECK(r.status == 0);
    CHECK(boosql::test::contains_normalized(
        r.out, "CREATE TABLE `Reservation`(`oid` INTEGER AUTO_INCREMENT, "
               "PRIMARY KEY (`oid`), `status` CHAR(30));"));
    CHECK(boosql::test::contains_normalized(r.out, "CREATE PROCEDURE `Hotel_reserve`"));
    CHECK(boosql::test::contains_normalized(r.out, "SET `r!` = last_insert_id ();"));
}

TEST_CASE("compile output is byte-deterministic") {
    RunResult a = run("compile " + hrs_path());
    RunResult b = run("compile " + hrs_path());
    CHECK(a.out == b.out);
}

TEST_CASE("emit-schema prints DDL only") {
    RunResult r = run("emit-schema " + hrs_path());
    CHECK(r.status == 0);
    CHECK(r.out.find("CREATE TABLE") != std::string::npos);
    CHECK(r.out.find("CREATE PROCEDURE") == std::string::npos);
}

TEST_CASE("interpret prints the after-state of a named operation") {
    std::string state = std::string(BOOSQL_MODELS_DIR) + "/../build-test-state.txt";
    std::string tmp = "/tmp/boosql-cli-state.txt";
    {
        std::ofstream f(tmp);
        f << "extent Hotel 1\nextent Room 1\n"
             "Hotel 1 limit = 2\nHotel 1 allocations = { #1 }\nRoom 1 hotel = #1\n";
    }
    RunResult r = run("interpret " + hrs_path() + " --op Hotel.reserve --state " + tmp +
                      " --input 'this = #1' --input 'm? = #1'"
                      " --input 'dates? = { Date.d1 }'");
    CHECK(r.status == 0);
    CHECK(r.out.find("after-states: 1") != std::string::npos);
    CHECK(r.out.find("status = \"unconfirmed\"") != std::string::npos);
    (void)state;
}

TEST_CASE("verify exits zero on a healthy build") {
    RunResult r = run("verify --seed 0 --cases 25");
    CHECK(r.status == 0);
    CHECK(r.out.find("violations: 0") != std::string::npos);
}

TEST_CASE("verify without generated cases still runs the fixture suite") {
    RunResult r = run("verify --seed 0 --cases 0");
    CHECK(r.status == 0);
    CHECK(r.out.find("+2 fixture") != std::string::npos);
}

TEST_CASE("a mutated backend makes verify fail") {
    RunResult r = run("verify --seed 0 --cases 80 --mutation drop-index-shift");
    CHECK(r.status == 1);
    CHECK(r.out.find("violation") != std::string::npos);
}

TEST_CASE("usage errors exit with status two") {
    CHECK(run("").status == 2);
    CHECK(run("frobnicate").status == 2);
    CHECK(run("interpret " + hrs_path()).status == 2);
}

TEST_CASE("a model with diagnostics exits with status one") {
    std::string tmp = "/tmp/boosql-cli-bad.boo";
    {
        std::ofstream f(tmp);
        f << "class A { attributes p : B.q }\n";
    }
    RunResult r = run("compile " + tmp);
    CHECK(r.status == 1);
}

TEST_CASE("verify writes replayable violation reports") {
    std::string dir = "/tmp/boosql-cli-reports";
    run("verify --seed 0 --cases 80 --mutation drop-index-shift --report-dir " + dir);
    RunResult ls = run("verify --cases 0 > /dev/null; ls " + dir);
    std::ifstream probe(dir + "/violation-6.txt");
    bool have_any = probe.good();
    if (!have_any) {
        // the detecting seed may differ; accept any report file
        FILE* p = popen(("ls " + dir + "/violation-*.txt 2>/dev/null | head -1").c_str(), "r");
        char buf[512] = {0};
        have_any = fgets(buf, sizeof buf, p) != nullptr;
        pclose(p);
    }
    CHECK(have_any);
    (void)ls;
}
