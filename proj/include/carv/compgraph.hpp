#pragma once

// Computation graphs for policies, closed-loop steps, and k-step compositions.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "carv/numerics.hpp"

namespace carv {

enum class Activation { relu, linear };

struct Layer {
    Mat weights;  // out x in
    Vec bias;
    Activation activation = Activation::linear;
};

// Fully connected feed-forward policy.
class Network {
public:
    Network() = default;
    Network(std::size_t input_dim, std::vector<Layer> layers);

    std::size_t input_dim() const { return input_dim_; }
    std::size_t output_dim() const;
    const std::vector<Layer>& layers() const { return layers_; }

    Vec operator()(std::span<const double> x) const;

private:
    std::size_t input_dim_ = 0;
    std::vector<Layer> layers_;
};

enum class DynamicsKind { double_integrator, unicycle };

std::string_view to_string(DynamicsKind kind);

struct DynamicsSpec {
    DynamicsKind kind = DynamicsKind::double_integrator;
    double dt = 0.2;
    double v = 1.0;  // unicycle speed; unused for the double integrator

    std::size_t state_dim() const { return kind == DynamicsKind::unicycle ? 3 : 2; }
    std::size_t control_dim() const { return 1; }
    void validate() const;
};

// One step of the open-loop dynamics.
Vec step_exact(const DynamicsSpec& dyn, std::span<const double> x, std::span<const double> u);

enum class NodeOp { input, affine, relu, sin, cos, sum, scale };

bool is_nonlinear(NodeOp op);

struct Node {
    NodeOp op = NodeOp::input;
    std::vector<std::size_t> inputs;
    std::size_t dim = 0;
    Mat weights;   // affine only
    Vec bias;      // affine only
    double factor = 1.0;  // scale only
    std::optional<std::size_t> policy_copy;  // which unrolled policy instance owns the node
};

// DAG whose nodes are stored in topological order; node 0 is the unique input.
class CompGraph {
public:
    explicit CompGraph(std::size_t input_dim);

    std::size_t add_affine(std::size_t in, Mat weights, Vec bias);
    std::size_t add_relu(std::size_t in);
    std::size_t add_sin(std::size_t in);
    std::size_t add_cos(std::size_t in);
    std::size_t add_sum(std::vector<std::size_t> ins);
    std::size_t add_scale(std::size_t in, double factor);
    void set_output(std::size_t id);

    // Subsequent nodes are attributed to the given policy copy (nullopt: dynamics).
    void set_policy_copy(std::optional<std::size_t> copy) { current_copy_ = copy; }

    std::size_t input_dim() const { return nodes_.front().dim; }
    std::size_t output_dim() const { return nodes_[output_].dim; }
    std::size_t output() const { return output_; }
    const std::vector<Node>& nodes() const { return nodes_; }
    const Node& node(std::size_t id) const { return nodes_.at(id); }

    std::size_t policy_copies() const;

    Vec evaluate(std::span<const double> x) const;
    // Values of every node; used by tests and for sampling intermediate ranges.
    std::vector<Vec> evaluate_all(std::span<const double> x) const;

private:
    std::size_t push(Node n);
    const Node& checked_input(std::size_t id) const;

    std::vector<Node> nodes_;
    std::size_t output_ = 0;
    std::optional<std::size_t> current_copy_;
};

// Appends the policy sub-graph fed by node `in`; returns its output node.
std::size_t append_network(CompGraph& g, std::size_t in, const Network& policy);

// Graph of x -> f_cl^k(x).
CompGraph compose_closed_loop(const DynamicsSpec& dyn, const Network& policy, std::size_t k);

Vec evaluate(const CompGraph& graph, std::span<const double> x);

// Trajectory of length t+1 starting at x0.
std::vector<Vec> simulate(const DynamicsSpec& dyn, const Network& policy,
                          std::span<const double> x0, std::size_t t);

}  // namespace carv
