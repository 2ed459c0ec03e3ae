#include "carv/harness.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <limits>
#include <random>

namespace carv {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct SampleTrace {
    std::vector<double> excess;
    std::vector<std::size_t> hit_times;
};

SampleTrace trace_sample(const Scenario& s, const VerificationResult& r, const Vec& x0) {
    const std::size_t horizon = r.rsoas.size() - 1;
    const auto traj = simulate(s.dynamics, s.policy, x0, horizon);
    SampleTrace tr;
    tr.excess.resize(horizon + 1);
    for (std::size_t t = 0; t <= horizon; ++t) {
        tr.excess[t] = box_excess(r.rsoas[t].box, traj[t]);
        if (!eval_point(s.constraints, traj[t])) tr.hit_times.push_back(t);
    }
    return tr;
}

SoundnessReport reduce(std::vector<SampleTrace> traces, std::size_t horizon) {
    SoundnessReport rep;
    rep.samples = traces.size();
    rep.max_violation.assign(horizon + 1, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < traces.size(); ++i) {
        for (std::size_t t = 0; t <= horizon; ++t) {
            rep.max_violation[t] = std::max(rep.max_violation[t], traces[i].excess[t]);
        }
        for (std::size_t t : traces[i].hit_times) rep.constraint_hits.emplace_back(t, i);
    }
    std::sort(rep.constraint_hits.begin(), rep.constraint_hits.end());
    return rep;
}

void check_result(const VerificationResult& r) {
    if (r.rsoas.empty()) throw Error("mc_check: result holds no RSOAs");
}

}  // namespace

double SoundnessReport::worst() const {
    double w = -std::numeric_limits<double>::infinity();
    for (double v : max_violation) w = std::max(w, v);
    return w;
}

std::vector<Vec> sample_uniform(const Box& b, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Vec> out(n, Vec(b.dim()));
    for (auto& x : out) {
        for (std::size_t d = 0; d < b.dim(); ++d) {
            const double u = unit(rng);
            x[d] = std::min(b.upper()[d], b.lower()[d] + u * (b.upper()[d] - b.lower()[d]));
        }
    }
    return out;
}

SoundnessReport mc_check_serial(const Scenario& s, const VerificationResult& r, std::size_t n,
                                std::uint64_t seed) {
    check_result(r);
    const auto samples = sample_uniform(s.x0, n, seed);
    std::vector<SampleTrace> traces;
    traces.reserve(n);
    for (const Vec& x0 : samples) traces.push_back(trace_sample(s, r, x0));
    return reduce(std::move(traces), r.rsoas.size() - 1);
}

SoundnessReport mc_check(const Scenario& s, const VerificationResult& r, std::size_t n,
                         std::uint64_t seed) {
    check_result(r);
    const auto samples = sample_uniform(s.x0, n, seed);
    std::vector<SampleTrace> traces(n);
    std::exception_ptr failure;
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < count; ++i) {
        try {
            traces[i] = trace_sample(s, r, samples[i]);
        } catch (...) {
#pragma omp critical(carv_mc_error)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return reduce(std::move(traces), r.rsoas.size() - 1);
}

std::string_view to_string(Method m) {
    switch (m) {
        case Method::carv: return "carv";
        case Method::part: return "part";
        case Method::symb: return "symb";
        case Method::hybr: return "hybr";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    if (name == "carv") return Method::carv;
    if (name == "part") return Method::part;
    if (name == "symb") return Method::symb;
    if (name == "hybr") return Method::hybr;
    throw Error("unknown method '" + std::string(name) + "'");
}

VerificationResult run_method(const Scenario& s, Method method, const MethodOptions& options) {
    switch (method) {
        case Method::carv: return carv(s);
        case Method::part: {
            PartitionGrid grid = options.grid;
            if (grid.counts.empty()) grid.counts.assign(s.dynamics.state_dim(), 2);
            return run_partition(s, grid);
        }
        case Method::symb: return run_symbolic(s, options.budget_seconds);
        case Method::hybr: return run_hybrid(s, s.k_max);
    }
    throw Error("unknown method");
}

namespace {

struct Outcome {
    VerificationResult result;
    double seconds = 0.0;
    std::string error;
};

Outcome timed_run(const Scenario& s, Method m, const MethodOptions& options) {
    Outcome o;
    const auto start = Clock::now();
    try {
        o.result = run_method(s, m, options);
    } catch (const std::exception& e) {
        o.error = e.what();
    }
    o.seconds = seconds_since(start);
    return o;
}

SweepRecord to_record(double parameter, Method m, const Outcome& o) {
    SweepRecord rec;
    rec.parameter = parameter;
    rec.method = m;
    rec.seconds = o.seconds;
    rec.error = o.error;
    if (o.error.empty()) {
        rec.verified = o.result.safe;
        rec.concrete_calls = o.result.stats.concrete_calls;
        rec.symbolic_calls = o.result.stats.symbolic_calls();
    }
    return rec;
}

template <class Task>
void run_tasks(std::size_t count, std::size_t jobs, Task&& task) {
    const auto n = static_cast<long long>(count);
    const int threads = static_cast<int>(std::max<std::size_t>(1, jobs));
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (long long i = 0; i < n; ++i) task(static_cast<std::size_t>(i));
}

}  // namespace

std::vector<SweepRecord> sweep_kmax(const Scenario& s, const std::vector<Method>& methods,
                                    const std::vector<std::size_t>& k_values, std::size_t jobs) {
    if (k_values.empty()) throw Error("sweep_kmax: no k values");
    for (Method m : methods) {
        if (m != Method::carv && m != Method::hybr) {
            throw Error("sweep_kmax: only carv and hybr depend on k_max");
        }
    }
    std::vector<SweepRecord> records(k_values.size() * methods.size());
    run_tasks(records.size(), jobs, [&](std::size_t i) {
        const std::size_t k = k_values[i / methods.size()];
        const Method m = methods[i % methods.size()];
        Scenario local = s;
        local.k_max = k;
        records[i] = to_record(static_cast<double>(k), m, timed_run(local, m, {}));
    });
    std::stable_sort(records.begin(), records.end(),
                     [](const SweepRecord& a, const SweepRecord& b) {
                         return a.parameter < b.parameter;
                     });
    return records;
}

std::vector<SweepRecord> sweep_radius(const Scenario& s, const std::vector<Method>& methods,
                                      const std::vector<double>& deltas,
                                      const MethodOptions& options, std::size_t jobs) {
    if (deltas.empty()) throw Error("sweep_radius: no deltas");

    // Boxes of constraint-independent methods are computed once.
    std::vector<Method> fixed;
    for (Method m : methods) {
        if (m != Method::carv) fixed.push_back(m);
    }
    const bool has_carv = fixed.size() != methods.size();
    const std::size_t carv_tasks = has_carv ? deltas.size() : 0;

    std::vector<Outcome> fixed_runs(fixed.size());
    std::vector<Outcome> carv_runs(carv_tasks);
    run_tasks(fixed.size() + carv_tasks, jobs, [&](std::size_t i) {
        if (i < fixed.size()) {
            fixed_runs[i] = timed_run(s, fixed[i], options);
        } else {
            const std::size_t d = i - fixed.size();
            Scenario local = s;
            local.constraints = s.constraints.inflated(deltas[d]);
            carv_runs[d] = timed_run(local, Method::carv, options);
        }
    });

    std::vector<SweepRecord> records;
    for (std::size_t d = 0; d < deltas.size(); ++d) {
        const ConstraintSet inflated = s.constraints.inflated(deltas[d]);
        std::size_t fixed_idx = 0;
        for (Method m : methods) {
            if (m == Method::carv) {
                records.push_back(to_record(deltas[d], m, carv_runs[d]));
                continue;
            }
            const Outcome& o = fixed_runs[fixed_idx++];
            SweepRecord rec = to_record(deltas[d], m, o);
            if (o.error.empty()) {
                const auto start = Clock::now();
                rec.verified = !o.result.timed_out && !first_violation(o.result, inflated);
                rec.seconds += seconds_since(start);
            }
            records.push_back(std::move(rec));
        }
    }
    return records;
}

}  // namespace carv
