#pragma once

// Comparison methods: uniform partitioning, pure symbolic, hybrid schedule.

#include <cstddef>
#include <optional>
#include <vector>

#include "carv/engine.hpp"

namespace carv {

struct PartitionGrid {
    std::vector<std::size_t> counts;
};

// Uniform split of b, last index varying fastest.
std::vector<Box> split_uniform(const Box& b, const PartitionGrid& grid);

// Concrete chain R_0..R_{t_f} from X0 with no refinement.
VerificationResult run_concrete(const Scenario& scenario);

// Cells are processed in parallel with OpenMP; results are identical to the serial kernel.
VerificationResult run_partition(const Scenario& scenario, const PartitionGrid& grid);
VerificationResult run_partition_serial(const Scenario& scenario, const PartitionGrid& grid);

// R_t bounded directly from X0 for every t. Stops early once the wall-clock
// budget is exhausted and flags the result as timed out.
VerificationResult run_symbolic(const Scenario& scenario,
                                std::optional<double> budget_seconds = std::nullopt);

// Symbolic hops every k_max steps from the previous anchor, concrete steps in between.
VerificationResult run_hybrid(const Scenario& scenario, std::size_t k_max);

}  // namespace carv
