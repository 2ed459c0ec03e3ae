#pragma once

// Monte Carlo soundness oracle and parameter sweeps.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "carv/baselines.hpp"

namespace carv {

struct SoundnessReport {
    std::size_t samples = 0;
    // Worst signed excursion of any sample outside R_t, per t (<= 0: all inside).
    std::vector<double> max_violation;
    // (t, sample index) pairs where the sampled state violates the constraints.
    std::vector<std::pair<std::size_t, std::size_t>> constraint_hits;

    double worst() const;
    bool contained(double tol) const { return worst() <= tol; }
};

// n uniform samples of b; deterministic for a given seed.
std::vector<Vec> sample_uniform(const Box& b, std::size_t n, std::uint64_t seed);

// Samples X0, simulates over the horizon covered by `result`, and compares
// trajectories against the stored boxes. Samples run in parallel.
SoundnessReport mc_check(const Scenario& scenario, const VerificationResult& result,
                         std::size_t n, std::uint64_t seed);
SoundnessReport mc_check_serial(const Scenario& scenario, const VerificationResult& result,
                                std::size_t n, std::uint64_t seed);

enum class Method { carv, part, symb, hybr };

std::string_view to_string(Method m);
Method parse_method(std::string_view name);

struct MethodOptions {
    PartitionGrid grid;  // empty: two cells per dimension
    std::optional<double> budget_seconds;
};

// Runs one method; carv and hybr use scenario.k_max.
VerificationResult run_method(const Scenario& scenario, Method method,
                              const MethodOptions& options = {});

struct SweepRecord {
    double parameter = 0.0;
    Method method = Method::carv;
    bool verified = false;
    double seconds = 0.0;
    std::size_t concrete_calls = 0;
    std::size_t symbolic_calls = 0;
    std::string error;  // empty unless the run threw
};

// One record per (k, method), ordered by k then by method as given.
std::vector<SweepRecord> sweep_kmax(const Scenario& scenario, const std::vector<Method>& methods,
                                    const std::vector<std::size_t>& k_values,
                                    std::size_t jobs = 1);

// Inflates every disk by each delta. carv is re-run per delta; the other
// methods compute their boxes once and re-check them against the inflated disks.
std::vector<SweepRecord> sweep_radius(const Scenario& scenario,
                                      const std::vector<Method>& methods,
                                      const std::vector<double>& deltas,
                                      const MethodOptions& options = {}, std::size_t jobs = 1);

}  // namespace carv
