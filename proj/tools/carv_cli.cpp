// carv: command-line front end for closed-loop reachability and verification.
//
// Exit codes: 0 verified / completed, 1 not verified, 2 usage or I/O error.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "carv/harness.hpp"
#include "carv/model_io.hpp"
#include "carv/report.hpp"

namespace fs = std::filesystem;
using namespace carv;

namespace {

enum class LogLevel { error = 0, info = 1, debug = 2 };

LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("CARV_LOG");
        const std::string v = env ? env : "error";
        if (v == "debug") return LogLevel::debug;
        if (v == "info") return LogLevel::info;
        return LogLevel::error;
    }();
    return level;
}

void log(LogLevel level, const std::string& msg) {
    if (level > log_level()) return;
    static const char* names[] = {"error", "info", "debug"};
    std::cerr << "carv [" << names[static_cast<int>(level)] << "] " << msg << '\n';
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("cannot open " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) {
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

std::size_t parse_count(const std::string& s) {
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &pos);
    } catch (const std::exception&) {
        throw Error("not an integer: '" + s + "'");
    }
    if (pos != s.size() || v < 0) throw Error("not a non-negative integer: '" + s + "'");
    return static_cast<std::size_t>(v);
}

double parse_real(const std::string& s) {
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw Error("not a number: '" + s + "'");
    }
    if (pos != s.size() || !std::isfinite(v)) throw Error("not a number: '" + s + "'");
    return v;
}

// "6..24" (inclusive) or "6,8,10"
std::vector<std::size_t> parse_k_values(const std::string& s) {
    std::vector<std::size_t> out;
    if (const auto dots = s.find(".."); dots != std::string::npos) {
        const std::size_t a = parse_count(s.substr(0, dots));
        const std::size_t b = parse_count(s.substr(dots + 2));
        if (a > b) throw Error("empty k range '" + s + "'");
        for (std::size_t k = a; k <= b; ++k) out.push_back(k);
    } else {
        for (const auto& part : split(s, ',')) out.push_back(parse_count(part));
    }
    if (out.empty()) throw Error("no k values given");
    return out;
}

// "start:stop:step" (inclusive) or "0,0.1,0.2"
std::vector<double> parse_deltas(const std::string& s) {
    std::vector<double> out;
    const auto parts = split(s, ':');
    if (parts.size() == 3) {
        const double a = parse_real(parts[0]);
        const double b = parse_real(parts[1]);
        const double step = parse_real(parts[2]);
        if (!(step > 0.0) || b < a) throw Error("invalid delta range '" + s + "'");
        const auto n = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9));
        for (std::size_t i = 0; i <= n; ++i) out.push_back(a + step * static_cast<double>(i));
    } else if (parts.size() == 1) {
        for (const auto& part : split(s, ',')) out.push_back(parse_real(part));
    } else {
        throw Error("invalid delta list '" + s + "'");
    }
    if (out.empty()) throw Error("no deltas given");
    return out;
}

std::vector<Method> parse_methods(const std::string& s) {
    std::vector<Method> out;
    for (const auto& part : split(s, ',')) out.push_back(parse_method(part));
    if (out.empty()) throw Error("no methods given");
    return out;
}

PartitionGrid parse_grid(const std::string& s) {
    PartitionGrid g;
    for (const auto& part : split(s, ',')) g.counts.push_back(parse_count(part));
    return g;
}

std::pair<std::size_t, std::size_t> parse_projection(const std::string& s) {
    const auto parts = split(s, ',');
    if (parts.size() != 2) throw Error("projection must be 'i,j'");
    return {parse_count(parts[0]), parts.size() > 1 ? parse_count(parts[1]) : 0};
}

struct VerifyArgs {
    std::string scenario, method = "carv", grid, out;
    std::optional<std::size_t> k_max;
    std::optional<double> budget;
    std::optional<std::size_t> mc_n;
    std::optional<std::uint64_t> seed;
};

int cmd_verify(const VerifyArgs& a) {
    const auto t0 = Clock::now();
    const Method method = parse_method(a.method);
    Scenario s = load_scenario(a.scenario);
    if (a.k_max) {
        if (*a.k_max == 0) throw Error("--k-max must be >= 1");
        s.k_max = *a.k_max;
    }
    RunOutput out;
    out.scenario_digest = digest_bytes(read_bytes(a.scenario));
    out.method = std::string(to_string(method));
    out.scenario = scenario_to_json(s);
    out.timing.load_seconds = seconds_since(t0);
    log(LogLevel::info, "loaded " + a.scenario + " (t_f=" + std::to_string(s.t_f) +
                            ", k_max=" + std::to_string(s.k_max) + ")");

    MethodOptions opts;
    if (!a.grid.empty()) opts.grid = parse_grid(a.grid);
    opts.budget_seconds = a.budget;
    const auto t1 = Clock::now();
    out.result = run_method(s, method, opts);
    out.timing.verify_seconds = seconds_since(t1);
    log(LogLevel::info, out.method + ": " + (out.result.safe ? "verified" : "not verified") +
                            " in " + std::to_string(out.timing.verify_seconds) + " s");

    if (a.mc_n) {
        if (*a.mc_n == 0) throw Error("--mc must be >= 1");
        const auto t2 = Clock::now();
        out.soundness = mc_check(s, out.result, *a.mc_n, a.seed.value_or(s.mc.seed));
        out.timing.mc_seconds = seconds_since(t2);
    }
    out.timing.total_seconds = seconds_since(t0);
    write_text_atomic(a.out, run_output_to_json(out).dump(2) + "\n");
    return out.result.safe ? 0 : 1;
}

struct SweepArgs {
    std::string scenario, methods, values, out, grid;
    std::optional<std::size_t> k_max;
    std::optional<double> budget;
    std::size_t jobs = 1;
};

void log_sweep_errors(const std::vector<SweepRecord>& records) {
    for (const auto& r : records) {
        if (!r.error.empty()) {
            log(LogLevel::error, std::string(to_string(r.method)) + " at " +
                                     std::to_string(r.parameter) + ": " + r.error);
        }
    }
}

int cmd_sweep_kmax(const SweepArgs& a) {
    const Scenario s = load_scenario(a.scenario);
    const auto records = sweep_kmax(s, parse_methods(a.methods), parse_k_values(a.values), a.jobs);
    log_sweep_errors(records);
    write_text_atomic(a.out, sweep_csv(records));
    return 0;
}

int cmd_sweep_radius(const SweepArgs& a) {
    Scenario s = load_scenario(a.scenario);
    if (a.k_max) s.k_max = *a.k_max;
    MethodOptions opts;
    if (!a.grid.empty()) opts.grid = parse_grid(a.grid);
    opts.budget_seconds = a.budget;
    const auto records =
        sweep_radius(s, parse_methods(a.methods), parse_deltas(a.values), opts, a.jobs);
    log_sweep_errors(records);
    write_text_atomic(a.out, sweep_csv(records));
    return 0;
}

struct McArgs {
    std::string scenario, result, out;
    std::optional<std::size_t> n;
    std::optional<std::uint64_t> seed;
    double tol = 1e-9;
};

int cmd_mc_check(const McArgs& a) {
    const Scenario s = load_scenario(a.scenario);
    const RunOutput run = run_output_from_json(read_json_file(a.result, "result"));
    const std::string digest = digest_bytes(read_bytes(a.scenario));
    if (digest != run.scenario_digest) {
        log(LogLevel::error, "scenario digest differs from the one recorded in the result");
    }
    const std::size_t n = a.n.value_or(s.mc.n);
    if (n == 0) throw Error("--n must be >= 1");
    const SoundnessReport rep = mc_check(s, run.result, n, a.seed.value_or(s.mc.seed));
    const bool contained = rep.contained(a.tol);
    const bool verdict_ok = !run.result.safe || rep.constraint_hits.empty();
    nlohmann::json j = soundness_to_json(rep);
    j["tolerance"] = a.tol;
    j["contained"] = contained;
    j["verdict_consistent"] = verdict_ok;
    const std::string text = j.dump(2) + "\n";
    if (a.out.empty()) {
        std::cout << text;
    } else {
        write_text_atomic(a.out, text);
    }
    return contained && verdict_ok ? 0 : 1;
}

struct PlotArgs {
    std::string result, proj = "0,1", out, scenario;
    std::size_t samples = 0;
    std::optional<std::uint64_t> seed;
};

int cmd_plot(const PlotArgs& a) {
    const RunOutput run = run_output_from_json(read_json_file(a.result, "result"));
    const auto [i, j] = parse_projection(a.proj);
    std::vector<std::vector<Vec>> trajectories;
    if (a.samples > 0) {
        if (a.scenario.empty()) throw Error("--samples requires --scenario");
        const Scenario s = load_scenario(a.scenario);
        const std::size_t horizon = run.result.rsoas.size() - 1;
        for (const Vec& x0 : sample_uniform(s.x0, a.samples, a.seed.value_or(s.mc.seed))) {
            trajectories.push_back(simulate(s.dynamics, s.policy, x0, horizon));
        }
    }
    write_text_atomic(a.out, render_svg(run, i, j, trajectories));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reachability and constraint-aware safety verification for neural feedback loops"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    VerifyArgs va;
    auto* verify = app.add_subcommand("verify", "verify a scenario with one method");
    verify->add_option("--scenario", va.scenario, "scenario JSON")->required();
    verify->add_option("--method", va.method, "carv|part|symb|hybr");
    verify->add_option("--k-max", va.k_max, "override the scenario's k_max");
    verify->add_option("--grid", va.grid, "partition counts per dimension, e.g. 6,6,18");
    verify->add_option("--budget-secs", va.budget, "wall-clock budget for symb");
    verify->add_option("--mc", va.mc_n, "embed a Monte Carlo soundness check with N samples");
    verify->add_option("--seed", va.seed, "Monte Carlo seed");
    verify->add_option("--out", va.out, "result JSON")->required();

    SweepArgs ka;
    auto* skmax = app.add_subcommand("sweep-kmax", "verify over a range of k_max values");
    skmax->add_option("--scenario", ka.scenario)->required();
    skmax->add_option("--methods", ka.methods, "comma list of carv,hybr")->required();
    skmax->add_option("--k-values", ka.values, "range a..b or comma list")->required();
    skmax->add_option("--jobs", ka.jobs, "parallel sweep points");
    skmax->add_option("--out", ka.out, "CSV output")->required();

    SweepArgs ra;
    auto* srad = app.add_subcommand("sweep-radius", "verify with inflated obstacle radii");
    srad->add_option("--scenario", ra.scenario)->required();
    srad->add_option("--methods", ra.methods, "comma list of carv,part,symb,hybr")->required();
    srad->add_option("--deltas", ra.values, "start:stop:step or comma list")->required();
    srad->add_option("--k-max", ra.k_max);
    srad->add_option("--grid", ra.grid);
    srad->add_option("--budget-secs", ra.budget);
    srad->add_option("--jobs", ra.jobs);
    srad->add_option("--out", ra.out, "CSV output")->required();

    McArgs ma;
    auto* mc = app.add_subcommand("mc-check", "check a stored result against simulated samples");
    mc->add_option("--scenario", ma.scenario)->required();
    mc->add_option("--result", ma.result)->required();
    mc->add_option("--n", ma.n);
    mc->add_option("--seed", ma.seed);
    mc->add_option("--tol", ma.tol, "containment tolerance");
    mc->add_option("--out", ma.out, "report JSON (default: stdout)");

    PlotArgs pa;
    auto* plot = app.add_subcommand("plot", "draw a stored result as SVG");
    plot->add_option("--result", pa.result)->required();
    plot->add_option("--proj", pa.proj, "state indices i,j");
    plot->add_option("--out", pa.out)->required();
    plot->add_option("--scenario", pa.scenario, "scenario for sample trajectories");
    plot->add_option("--samples", pa.samples, "number of sample trajectories to draw");
    plot->add_option("--seed", pa.seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*verify) return cmd_verify(va);
        if (*skmax) return cmd_sweep_kmax(ka);
        if (*srad) return cmd_sweep_radius(ra);
        if (*mc) return cmd_mc_check(ma);
        if (*plot) return cmd_plot(pa);
    } catch (const std::exception& e) {
        log(LogLevel::error, e.what());
        return 2;
    }
    return 2;
}
