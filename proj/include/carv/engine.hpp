#pragma once

// Constraint-aware refinement: concrete RSOAs until one conflicts with the
// safe set, then symbolic recomputation with bounded horizon.

#include <chrono>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "carv/reach.hpp"

namespace carv {

struct BoundCall {
    RsoaKind kind = RsoaKind::concrete;
    std::size_t anchor_t = 0;
    std::size_t target_t = 0;
    double seconds = 0.0;

    std::size_t horizon() const { return target_t - anchor_t; }
};

struct RunStats {
    std::size_t concrete_calls = 0;
    std::map<std::size_t, std::size_t> symbolic_calls_by_horizon;
    std::vector<double> step_seconds;  // index t; entry 0 is unused
    std::vector<BoundCall> calls;

    std::size_t symbolic_calls() const;
    void merge(const RunStats& other);
};

struct VerificationResult {
    bool safe = false;
    std::vector<Rsoa> rsoas;  // index t
    RunStats stats;
    std::string method;
    std::optional<std::size_t> failure_time;
    bool timed_out = false;
    // Per-cell boxes [cell][t]; only set by the partitioning baseline.
    std::vector<std::vector<Box>> cells;
};

// Issues bound computations and records every call in the stats it was given.
class BoundEngine {
public:
    BoundEngine(const DynamicsSpec& dyn, const Network& policy, RunStats& stats)
        : dyn_(dyn), policy_(policy), stats_(stats) {}

    Rsoa concrete(const Rsoa& prev);
    Rsoa symbolic(const Rsoa& anchor, std::size_t k);

private:
    const DynamicsSpec& dyn_;
    const Network& policy_;
    RunStats& stats_;
};

// Alg. "refine": `prefix` holds R_0..R_t with R_t violating c; updates it in place.
void refine(std::span<Rsoa> prefix, const ConstraintSet& c, std::size_t k_max,
            BoundEngine& engine);

// Rebuilds R_t from symbolic hops of length k_max anchored back to R_0.
void refine_sequence(std::span<Rsoa> prefix, std::size_t k_max, BoundEngine& engine);

VerificationResult carv(const Scenario& scenario);

// Safety of the stored boxes (per-cell when present) against c; returns the first failing t.
std::optional<std::size_t> first_violation(const VerificationResult& result,
                                           const ConstraintSet& c);

}  // namespace carv
