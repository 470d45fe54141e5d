#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mconn/cli.hpp"

using namespace mconn;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    int code = cli::run_command(args, out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path scratch()
{
    static const std::filesystem::path dir = [] {
        auto d = std::filesystem::temp_directory_path() / ("mconn_cli_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(d);
        return d;
    }();
    return dir;
}

std::string write(const std::string& name, const std::string& text)
{
    auto p = scratch() / name;
    std::ofstream(p) << text;
    return p.string();
}

std::string fixture(const std::string& name)
{
    auto p = (scratch() / (name + ".conn")).string();
    Run r = run({"fixtures", "emit", name, "-o", p});
    REQUIRE(r.code == 0);
    return p;
}

} // namespace

TEST_CASE("fixtures list and emit", "[cli]")
{
    Run l = run({"fixtures", "list"});
    REQUIRE(l.code == 0);
    json j = json::parse(l.out);
    CHECK(j["results"]["fixtures"].size() == 4);

    Run e = run({"fixtures", "emit", "euler-half"});
    REQUIRE(e.code == 0);
    CHECK(e.out.find("rank 1") != std::string::npos);
    Connection c = parse_connection_file(e.out);
    CHECK(c.matrix() == fixtures::euler_half().matrix);

    for (const auto& n : fixtures::names()) {
        Run v = run({"validate", fixture(n)});
        CHECK(v.code == 0);
        CHECK(json::parse(v.out)["results"]["ok"] == true);
    }
    CHECK(run({"fixtures", "emit", "nope"}).code == 2);
    CHECK(run({"fixtures", "frobnicate"}).code == 2);
}

TEST_CASE("bound", "[cli]")
{
    Run r = run({"bound", fixture("euler-half"), "--n", "2"});
    REQUIRE(r.code == 0);
    json j = json::parse(r.out);
    CHECK(j["results"]["bound"] == 3);
    CHECK(j["command"][0] == "bound");
    CHECK(j["input_digest"].get<std::string>().rfind("fnv1a64:", 0) == 0);

    Run t = run({"bound", fixture("triangle-diag"), "--n", "1", "--format", "text"});
    REQUIRE(t.code == 0);
    CHECK(t.out.find("bound: 6") != std::string::npos);
}

TEST_CASE("exact commands", "[cli]")
{
    std::string tri = fixture("triangle-nilpotent");
    Run d = run({"derive", tri, "--section", "1,t", "--order", "2"});
    REQUIRE(d.code == 0);
    CHECK(json::parse(d.out)["results"]["iterates"].size() == 3);

    Run w = run({"wronskian", fixture("two-point-reducible"), "--section", "1,t-11/2"});
    REQUIRE(w.code == 0);
    json jw = json::parse(w.out)["results"];
    CHECK(jw["generation_bound"] == 3);
    CHECK(jw["max_zero_multiplicity"] == 1);

    Run o = run({"ode", tri});
    REQUIRE(o.code == 0);
    json jo = json::parse(o.out)["results"];
    CHECK(jo["cyclic_identity"] == true);
    for (const auto& r : jo["residue_identity"]) CHECK(r["equal"] == true);

    Run c = run({"classify", tri, "--section", "1,t"});
    REQUIRE(c.code == 0);
    json jc = json::parse(c.out)["results"];
    CHECK(jc["apparent_singularities"].size() == 2);
    CHECK(jc["local_data"][0]["laurent"][0][0][1] == "1");
}

TEST_CASE("numeric commands", "[cli]")
{
    Run m = run({"monodromy", fixture("triangle-diag"), "--tol", "1e-12"});
    REQUIRE(m.code == 0);
    json jm = json::parse(m.out);
    CHECK(jm["results"]["product_defect"].get<double>() < 1e-8);
    CHECK(jm["results"]["irreducibility"]["verdict"] == "irreducible");
    CHECK(jm["tolerances"]["transport"] == 1e-12);

    Run a = run({"achieve", fixture("euler-half"), "--n", "2", "--at", "3"});
    REQUIRE(a.code == 0);
    json ja = json::parse(a.out)["results"];
    CHECK(ja["vanishing_ok"] == true);
    CHECK(ja["generic_equality"] == true);
    CHECK(ja["dimension"] == 3);
}

TEST_CASE("sample-h is reproducible", "[cli]")
{
    std::string f = fixture("triangle-diag");
    Run a = run({"sample-h", f, "--n", "1", "--samples", "20", "--seed", "7"});
    Run b = run({"sample-h", f, "--n", "1", "--samples", "20", "--seed", "7"});
    Run p = run({"sample-h", f, "--n", "1", "--samples", "20", "--seed", "7", "--parallel"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    json ja = json::parse(a.out), jp = json::parse(p.out);
    CHECK(ja["results"] == jp["results"]);
    CHECK(ja["seed"] == 7);
    CHECK(ja["results"]["violated"] == false);
    CHECK(ja.find("wall_time_ms") == ja.end());

    Run t = run({"sample-h", f, "--n", "1", "--samples", "2", "--timing"});
    CHECK(json::parse(t.out).contains("wall_time_ms"));
}

TEST_CASE("exit codes", "[cli]")
{
    CHECK(run({}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"bound"}).code == 2);
    CHECK(run({"bound", fixture("euler-half")}).code == 2);
    CHECK(run({"bound", fixture("euler-half"), "--n", "x"}).code == 2);
    CHECK(run({"monodromy", fixture("euler-half"), "--format", "yaml"}).code == 2);
    CHECK(run({"--help"}).code == 0);

    CHECK(run({"validate", (scratch() / "missing.conn").string()}).code == 1);

    std::string syntax = write("syntax.conn", "rank 1\nsplitting 0\npoint 0 order 0\nmatrix\n0\nend\n");
    Run s = run({"validate", syntax});
    CHECK(s.code == 1);
    CHECK(s.err.find("line 3") != std::string::npos);

    std::string invalid = write("invalid.conn", "rank 1\nsplitting 0\npoint 0 order 1\nmatrix\n1\nend\n");
    Run v = run({"validate", invalid});
    CHECK(v.code == 1);
    CHECK(json::parse(v.out)["results"]["ok"] == false);
    CHECK(run({"bound", invalid, "--n", "1"}).code == 1);

    std::string empty = write("empty.conn", "rank 1\nsplitting 0\nmatrix\n0\nend\n");
    Run e = run({"bound", empty, "--n", "1"});
    CHECK(e.code == 1);
    CHECK(e.err.find("empty") != std::string::npos);

    std::string tri = fixture("triangle-diag");
    CHECK(run({"wronskian", tri, "--section", "1"}).code == 1);
    CHECK(run({"wronskian", tri, "--section", "1,1/(t-7)"}).code == 1);
    CHECK(run({"sample-h", tri, "--n", "1", "--pole-divisor", "inf^3"}).code == 1);
    CHECK(run({"sample-h", tri, "--n", "1", "--pole-divisor", "0^0"}).code == 1);
}
