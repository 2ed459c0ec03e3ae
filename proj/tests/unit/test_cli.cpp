#include <doctest.h>

#include <algorithm>

#include <nlohmann/json.hpp>

#include "process.hpp"

using nlohmann::json;
using proc::carv;
using proc::fixture;
using proc::quote;

namespace {

json load(const std::filesystem::path& p) { return json::parse(proc::slurp(p)); }

std::size_t lines(const std::string& text) {
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_CASE("verify exit codes") {
    proc::ScratchDir dir("cli");
    const std::string out = quote((dir / "out.json").string());

    CHECK(carv("verify --scenario " + fixture("di.json") + " --method carv --out " + out) == 0);
    const json r = load(dir / "out.json");
    CHECK(r["result"]["safe"] == true);
    CHECK(r["method"] == "carv");
    CHECK(proc::validate("run_output.schema.json", dir / "out.json"));

    CHECK(carv("verify --scenario " + fixture("di.json") + " --method hybr --k-max 1 --out " + out) == 1);
    CHECK(load(dir / "out.json")["result"]["safe"] == false);
    CHECK(proc::validate("run_output.schema.json", dir / "out.json"));

    CHECK(carv("verify --scenario " + fixture("di.json") + " --method part --grid 2,2 --mc 100 --out " + out) == 1);
    const json p = load(dir / "out.json");
    CHECK(p["result"]["cell_count"] == 4);
    CHECK(p["soundness"]["samples"] == 100);
    CHECK(proc::validate("run_output.schema.json", dir / "out.json"));

    const std::string missing = quote((dir / "missing.json").string());
    CHECK(carv("verify --scenario " + missing + " --method carv --out " + out) == 2);
    CHECK(carv("verify --scenario " + fixture("di.json") + " --method magic --out " + out) == 2);
    CHECK(carv("verify --scenario " + fixture("di.json") + " --method part --grid 2,2,2 --out " + out) == 2);
    CHECK(carv("verify --scenario " + fixture("di.json") + " --method carv --k-max 0 --out " + out) == 2);
    CHECK(carv("verify --scenario " + fixture("di.json") + " --method carv") == 2);
    CHECK(carv("verify --scenario " + fixture("di.json") + " --bogus --out " + out) == 2);
    CHECK(carv("verify --scenario " + fixture("di.json") + " --out " +
               quote((dir / "no" / "dir" / "x.json").string())) == 2);
    CHECK(carv("") == 2);
    CHECK(carv("frobnicate") == 2);
    CHECK(carv("--help") == 0);
}

TEST_CASE("symb budget") {
    proc::ScratchDir dir("cli");
    const std::string out = quote((dir / "out.json").string());
    CHECK(carv("verify --scenario " + fixture("gr.json") + " --method symb --budget-secs 0 --out " + out) == 1);
    const json r = load(dir / "out.json");
    CHECK(r["result"]["timed_out"] == true);
    CHECK(r["result"]["safe"] == false);
    CHECK(proc::validate("run_output.schema.json", dir / "out.json"));
}

TEST_CASE("diagnostics go to stderr") {
    proc::ScratchDir dir("cli");
    const std::string out = quote((dir / "out.json").string());
    CHECK(proc::shell("CARV_LOG=debug " + quote(CARV_CLI_PATH) + " verify --scenario " + fixture("di.json") +
                          " --method carv --out " + out,
                      dir / "stdout.txt", dir / "stderr.txt") == 0);
    CHECK(proc::slurp(dir / "stdout.txt").empty());
    CHECK_FALSE(proc::slurp(dir / "stderr.txt").empty());
    CHECK(proc::shell(quote(CARV_CLI_PATH) + " verify --scenario " + fixture("di.json") +
                          " --method carv --out " + out,
                      dir / "stdout.txt", dir / "stderr.txt") == 0);
    CHECK(proc::slurp(dir / "stderr.txt").empty());
}

TEST_CASE("sweeps") {
    proc::ScratchDir dir("cli");
    const std::string csv = quote((dir / "k.csv").string());
    CHECK(carv("sweep-kmax --scenario " + fixture("di.json") + " --methods carv,hybr --k-values 14..16 --jobs 2 --out " + csv) == 0);
    const std::string k = proc::slurp(dir / "k.csv");
    CHECK(k.rfind("parameter,method,verified,seconds,concrete_calls,symbolic_calls\n", 0) == 0);
    CHECK(lines(k) == 7);
    CHECK(k.find("\n15,carv,true,") != std::string::npos);

    CHECK(carv("sweep-kmax --scenario " + fixture("di.json") + " --methods carv --k-values 3,15 --out " + csv) == 0);
    CHECK(lines(proc::slurp(dir / "k.csv")) == 3);
    CHECK(carv("sweep-kmax --scenario " + fixture("di.json") + " --methods part --k-values 3 --out " + csv) == 2);
    CHECK(carv("sweep-kmax --scenario " + fixture("di.json") + " --methods carv --k-values 9..3 --out " + csv) == 2);

    const std::string rcsv = quote((dir / "r.csv").string());
    CHECK(carv("sweep-radius --scenario " + fixture("gr.json") +
               " --methods carv,hybr,part --deltas 0:0.1:0.05 --k-max 16 --jobs 2 --out " + rcsv) == 0);
    const std::string r = proc::slurp(dir / "r.csv");
    CHECK(lines(r) == 10);
    CHECK(r.find("\n0,carv,true,") != std::string::npos);
    CHECK(r.find("\n0.05,part,") != std::string::npos);
    CHECK(r.find("\n0.1,hybr,") != std::string::npos);
    CHECK(carv("sweep-radius --scenario " + fixture("gr.json") + " --methods carv --deltas 0:x:1 --out " + rcsv) == 2);
}

TEST_CASE("mc-check") {
    proc::ScratchDir dir("cli");
    const std::string res = quote((dir / "res.json").string());
    const std::string rep = quote((dir / "rep.json").string());
    REQUIRE(carv("verify --scenario " + fixture("gr.json") + " --method carv --k-max 16 --out " + res) == 0);
    CHECK(carv("mc-check --scenario " + fixture("gr.json") + " --result " + res + " --n 500 --out " + rep) == 0);
    const json r = load(dir / "rep.json");
    CHECK(r["samples"] == 500);
    CHECK(r["contained"] == true);
    CHECK(r["verdict_consistent"] == true);
    CHECK(proc::validate("mc_check.schema.json", dir / "rep.json"));

    CHECK(carv("mc-check --scenario " + fixture("gr.json") + " --result " + res + " --n 50", dir / "stdout.json") == 0);
    CHECK(load(dir / "stdout.json")["samples"] == 50);

    // shrink one box well inside the reachable set
    json tampered = load(dir / "res.json");
    auto& box = tampered["result"]["rsoas"][20];
    const double mid = 0.5 * (box["lower"][0].get<double>() + box["upper"][0].get<double>());
    box["lower"][0] = mid;
    box["upper"][0] = mid;
    std::ofstream(dir / "bad.json") << tampered.dump();
    CHECK(carv("mc-check --scenario " + fixture("gr.json") + " --result " + quote((dir / "bad.json").string()) +
               " --n 200 --out " + rep) == 1);
    CHECK(load(dir / "rep.json")["contained"] == false);

    CHECK(carv("mc-check --scenario " + fixture("gr.json") + " --result " + quote((dir / "none.json").string())) == 2);
}

TEST_CASE("plot") {
    proc::ScratchDir dir("cli");
    const std::string res = quote((dir / "res.json").string());
    REQUIRE(carv("verify --scenario " + fixture("gr.json") + " --method carv --k-max 16 --out " + res) == 0);
    const std::string a = quote((dir / "a.svg").string());
    const std::string b = quote((dir / "b.svg").string());
    CHECK(carv("plot --result " + res + " --proj 0,1 --out " + a) == 0);
    CHECK(carv("plot --result " + res + " --proj 0,1 --out " + b) == 0);
    const std::string svg = proc::slurp(dir / "a.svg");
    CHECK(svg == proc::slurp(dir / "b.svg"));
    CHECK(svg.find("cx=\"-6\" cy=\"-0.5\" r=\"2.2\"") != std::string::npos);
    CHECK(svg.find("cx=\"-1.25\" cy=\"1.75\" r=\"1.6\"") != std::string::npos);

    CHECK(carv("plot --result " + res + " --proj 0,1 --scenario " + fixture("gr.json") +
               " --samples 5 --seed 3 --out " + a) == 0);
    CHECK(carv("plot --result " + res + " --proj 0,1 --scenario " + fixture("gr.json") +
               " --samples 5 --seed 3 --out " + b) == 0);
    CHECK(proc::slurp(dir / "a.svg") == proc::slurp(dir / "b.svg"));
    CHECK(proc::slurp(dir / "a.svg").find("class=\"sample\"") != std::string::npos);

    CHECK(carv("plot --result " + res + " --proj 0,3 --out " + a) == 2);
    CHECK(carv("plot --result " + res + " --proj 0 --out " + a) == 2);
    CHECK(carv("plot --result " + res + " --samples 3 --out " + a) == 2);
}
