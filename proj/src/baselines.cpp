#include "carv/baselines.hpp"

#include <chrono>
#include <exception>


namespace carv {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void finish_verdict(VerificationResult& r, const ConstraintSet& c) {
    r.failure_time = first_violation(r, c);
    r.safe = !r.failure_time && !r.timed_out;
}

struct CellRun {
    std::vector<Box> boxes;
    RunStats stats;
};

CellRun chain_cell(const Scenario& s, const Box& cell) {
    CellRun run;
    run.stats.step_seconds.assign(s.t_f + 1, 0.0);
    BoundEngine engine(s.dynamics, s.policy, run.stats);
    Rsoa cur = initial_rsoa(cell);
    run.boxes.reserve(s.t_f + 1);
    run.boxes.push_back(cur.box);
    for (std::size_t t = 1; t <= s.t_f; ++t) {
        const auto start = Clock::now();
        cur = engine.concrete(cur);
        run.stats.step_seconds[t] = seconds_since(start);
        run.boxes.push_back(cur.box);
    }
    return run;
}

VerificationResult assemble_partition(const Scenario& s, std::vector<CellRun> runs) {
    VerificationResult r;
    r.method = "part";
    r.stats.step_seconds.assign(s.t_f + 1, 0.0);
    for (std::size_t t = 0; t <= s.t_f; ++t) {
        Box hull = runs.front().boxes[t];
        for (std::size_t c = 1; c < runs.size(); ++c) hull = box_hull(hull, runs[c].boxes[t]);
        r.rsoas.push_back(Rsoa{std::move(hull), t, t == 0 ? RsoaKind::initial : RsoaKind::concrete,
                               t == 0 ? 0 : t - 1});
    }
    r.cells.reserve(runs.size());
    for (CellRun& run : runs) {
        r.stats.merge(run.stats);
        r.cells.push_back(std::move(run.boxes));
    }
    finish_verdict(r, s.constraints);
    return r;
}

void check_grid(const Scenario& s, const PartitionGrid& grid) {
    if (grid.counts.size() != s.dynamics.state_dim()) {
        throw Error("partition grid dimension does not match the state dimension");
    }
}

}  // namespace

std::vector<Box> split_uniform(const Box& b, const PartitionGrid& grid) {
    if (grid.counts.size() != b.dim()) throw Error("split_uniform: grid dimension mismatch");
    std::size_t total = 1;
    for (std::size_t n : grid.counts) {
        if (n == 0) throw Error("split_uniform: counts must be >= 1");
        total *= n;
    }
    // edges[d][i] for i = 0..counts[d]
    std::vector<Vec> edges(b.dim());
    for (std::size_t d = 0; d < b.dim(); ++d) {
        const std::size_t n = grid.counts[d];
        const double lo = b.lower()[d];
        const double hi = b.upper()[d];
        edges[d].resize(n + 1);
        for (std::size_t i = 0; i <= n; ++i) {
            edges[d][i] = (i == n) ? hi : lo + (hi - lo) * static_cast<double>(i) / n;
        }
    }
    std::vector<Box> cells;
    cells.reserve(total);
    std::vector<std::size_t> idx(b.dim(), 0);
    for (std::size_t c = 0; c < total; ++c) {
        Vec lo(b.dim()), hi(b.dim());
        for (std::size_t d = 0; d < b.dim(); ++d) {
            lo[d] = edges[d][idx[d]];
            hi[d] = edges[d][idx[d] + 1];
        }
        cells.emplace_back(std::move(lo), std::move(hi));
        for (std::size_t d = b.dim(); d-- > 0;) {
            if (++idx[d] < grid.counts[d]) break;
            idx[d] = 0;
        }
    }
    return cells;
}

VerificationResult run_concrete(const Scenario& s) {
    s.validate();
    VerificationResult r;
    r.method = "concrete";
    r.stats.step_seconds.assign(s.t_f + 1, 0.0);
    BoundEngine engine(s.dynamics, s.policy, r.stats);
    r.rsoas.push_back(initial_rsoa(s.x0));
    for (std::size_t t = 1; t <= s.t_f; ++t) {
        const auto start = Clock::now();
        r.rsoas.push_back(engine.concrete(r.rsoas.back()));
        r.stats.step_seconds[t] = seconds_since(start);
    }
    finish_verdict(r, s.constraints);
    return r;
}

VerificationResult run_partition_serial(const Scenario& s, const PartitionGrid& grid) {
    s.validate();
    check_grid(s, grid);
    const std::vector<Box> cells = split_uniform(s.x0, grid);
    std::vector<CellRun> runs;
    runs.reserve(cells.size());
    for (const Box& cell : cells) runs.push_back(chain_cell(s, cell));
    return assemble_partition(s, std::move(runs));
}

VerificationResult run_partition(const Scenario& s, const PartitionGrid& grid) {
    s.validate();
    check_grid(s, grid);
    const std::vector<Box> cells = split_uniform(s.x0, grid);
    std::vector<CellRun> runs(cells.size());
    std::exception_ptr failure;
    const auto n = static_cast<long long>(cells.size());
#pragma omp parallel for schedule(dynamic)
    for (long long c = 0; c < n; ++c) {
        try {
            runs[c] = chain_cell(s, cells[c]);
        } catch (...) {
#pragma omp critical(carv_partition_error)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return assemble_partition(s, std::move(runs));
}

VerificationResult run_symbolic(const Scenario& s, std::optional<double> budget_seconds) {
    s.validate();
    VerificationResult r;
    r.method = "symb";
    r.stats.step_seconds.assign(s.t_f + 1, 0.0);
    BoundEngine engine(s.dynamics, s.policy, r.stats);
    r.rsoas.push_back(initial_rsoa(s.x0));
    const auto run_start = Clock::now();
    for (std::size_t t = 1; t <= s.t_f; ++t) {
        if (budget_seconds && seconds_since(run_start) > *budget_seconds) {
            r.timed_out = true;
            break;
        }
        const auto start = Clock::now();
        r.rsoas.push_back(engine.symbolic(r.rsoas.front(), t));
        r.stats.step_seconds[t] = seconds_since(start);
    }
    finish_verdict(r, s.constraints);
    return r;
}

VerificationResult run_hybrid(const Scenario& s, std::size_t k_max) {
    s.validate();
    if (k_max == 0) throw Error("run_hybrid: k_max must be positive");
    VerificationResult r;
    r.method = "hybr";
    r.stats.step_seconds.assign(s.t_f + 1, 0.0);
    BoundEngine engine(s.dynamics, s.policy, r.stats);
    r.rsoas.push_back(initial_rsoa(s.x0));
    for (std::size_t t = 1; t <= s.t_f; ++t) {
        const auto start = Clock::now();
        if (t % k_max == 0) {
            r.rsoas.push_back(engine.symbolic(r.rsoas[t - k_max], k_max));
        } else {
            r.rsoas.push_back(engine.concrete(r.rsoas.back()));
        }
        r.stats.step_seconds[t] = seconds_since(start);
    }
    finish_verdict(r, s.constraints);
    return r;
}

}  // namespace carv
