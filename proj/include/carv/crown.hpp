#pragma once

// Backward linear bound propagation over computation graphs.
//
// For a graph G and an input box I the engine produces affine functions
//   Psi z + alpha <= G(z) <= Phi z + beta   for all z in I,
// by walking the graph in reverse topological order and replacing every
// nonlinear node with a pair of scalar lines that enclose it over the
// node's pre-activation range. Pre-activation ranges are themselves
// obtained by running the same backward pass on the sub-graph that ends
// at the node feeding the nonlinearity.

#include <optional>
#include <vector>

#include "carv/compgraph.hpp"
#include "carv/numerics.hpp"

namespace carv {

struct NodeRelaxation {
    double lower_slope = 0.0;
    double lower_intercept = 0.0;
    double upper_slope = 0.0;
    double upper_intercept = 0.0;

    double lower(double z) const { return lower_slope * z + lower_intercept; }
    double upper(double z) const { return upper_slope * z + upper_intercept; }
};

NodeRelaxation relax_relu(const Interval& pre);

enum class TrigKind { sin, cos };

NodeRelaxation relax_trig(TrigKind kind, const Interval& pre);

struct LinearBounds {
    Mat psi;
    Vec alpha;
    Mat phi;
    Vec beta;
    // Value range of every node that feeds a nonlinearity, indexed by node id.
    std::vector<std::optional<Box>> intermediate;
};

LinearBounds backward_crown(const CompGraph& graph, const Box& input);

Box concretize(const LinearBounds& lb, const Box& input);

}  // namespace carv
