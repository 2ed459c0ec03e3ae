#include "carv/engine.hpp"

#include <sstream>

namespace carv {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_prefix(std::span<Rsoa> prefix) {
    if (prefix.empty()) throw Error("refine: empty RSOA list");
    for (std::size_t i = 0; i < prefix.size(); ++i) {
        if (prefix[i].t != i) throw Error("refine: RSOA list is not a contiguous prefix 0..t");
    }
}

}  // namespace

std::size_t RunStats::symbolic_calls() const {
    std::size_t total = 0;
    for (const auto& [h, n] : symbolic_calls_by_horizon) total += n;
    return total;
}

void RunStats::merge(const RunStats& other) {
    concrete_calls += other.concrete_calls;
    for (const auto& [h, n] : other.symbolic_calls_by_horizon) symbolic_calls_by_horizon[h] += n;
    if (step_seconds.size() < other.step_seconds.size()) {
        step_seconds.resize(other.step_seconds.size(), 0.0);
    }
    for (std::size_t i = 0; i < other.step_seconds.size(); ++i) {
        step_seconds[i] += other.step_seconds[i];
    }
    calls.insert(calls.end(), other.calls.begin(), other.calls.end());
}

Rsoa BoundEngine::concrete(const Rsoa& prev) {
    const auto start = Clock::now();
    Rsoa r = concrete_reachability(prev, dyn_, policy_);
    stats_.calls.push_back({RsoaKind::concrete, prev.t, r.t, seconds_since(start)});
    ++stats_.concrete_calls;
    return r;
}

Rsoa BoundEngine::symbolic(const Rsoa& anchor, std::size_t k) {
    const auto start = Clock::now();
    Rsoa r = symbolic_reachability(anchor, dyn_, policy_, k);
    stats_.calls.push_back({RsoaKind::symbolic, anchor.t, r.t, seconds_since(start)});
    ++stats_.symbolic_calls_by_horizon[k];
    return r;
}

void refine_sequence(std::span<Rsoa> prefix, std::size_t k_max, BoundEngine& engine) {
    check_prefix(prefix);
    const std::size_t t = prefix.size() - 1;
    if (t == 0) throw Error("refine_sequence: nothing to refine at t = 0");
    const std::size_t t_min = t > k_max ? t - k_max : 0;
    if (t_min == 0) {
        prefix[t] = engine.symbolic(prefix[0], t);
    } else {
        refine_sequence(prefix.first(t_min + 1), k_max, engine);
        // R_{t_min} is symbolic now
        prefix[t] = engine.symbolic(prefix[t_min], t - t_min);
    }
}

void refine(std::span<Rsoa> prefix, const ConstraintSet& c, std::size_t k_max,
            BoundEngine& engine) {
    check_prefix(prefix);
    if (k_max == 0) throw Error("refine: k_max must be positive");
    const auto t = static_cast<long long>(prefix.size() - 1);
    const long long t_min = std::max(t - static_cast<long long>(k_max), 0LL);
    for (long long k = t - 2; k >= t_min && !eval_box(c, prefix[t].box); --k) {
        if (is_symbolic(prefix[k])) {
            prefix[t] = engine.symbolic(prefix[k], static_cast<std::size_t>(t - k));
        } else if (k == t_min) {
            refine_sequence(prefix, k_max, engine);
        }
    }
}

VerificationResult carv(const Scenario& scenario) {
    scenario.validate();
    VerificationResult result;
    result.method = "carv";
    result.stats.step_seconds.assign(scenario.t_f + 1, 0.0);
    BoundEngine engine(scenario.dynamics, scenario.policy, result.stats);

    result.rsoas.push_back(initial_rsoa(scenario.x0));
    if (!eval_box(scenario.constraints, scenario.x0)) {
        result.failure_time = 0;
        return result;
    }
    for (std::size_t t = 1; t <= scenario.t_f; ++t) {
        const auto start = Clock::now();
        try {
            result.rsoas.push_back(engine.concrete(result.rsoas.back()));
            if (!eval_box(scenario.constraints, result.rsoas[t].box)) {
                refine(result.rsoas, scenario.constraints, scenario.k_max, engine);
            }
        } catch (const Error& e) {
            std::ostringstream os;
            os << "carv failed at t=" << t << ": " << e.what();
            throw Error(os.str());
        }
        result.stats.step_seconds[t] = seconds_since(start);
        if (!eval_box(scenario.constraints, result.rsoas[t].box)) {
            result.safe = false;
            result.failure_time = t;
            return result;
        }
    }
    result.safe = true;
    return result;
}

std::optional<std::size_t> first_violation(const VerificationResult& result,
                                           const ConstraintSet& c) {
    if (!result.cells.empty()) {
        std::optional<std::size_t> first;
        for (const auto& cell : result.cells) {
            for (std::size_t t = 0; t < cell.size(); ++t) {
                if (!eval_box(c, cell[t])) {
                    if (!first || t < *first) first = t;
                    break;
                }
            }
        }
        return first;
    }
    for (const Rsoa& r : result.rsoas) {
        if (!eval_box(c, r.box)) return r.t;
    }
    return std::nullopt;
}

}  // namespace carv
