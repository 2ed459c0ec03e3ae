#include "carv/compgraph.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace carv {

Network::Network(std::size_t input_dim, std::vector<Layer> layers)
    : input_dim_(input_dim), layers_(std::move(layers)) {
    if (input_dim_ == 0) throw Error("network input_dim must be positive");
    if (layers_.empty()) throw Error("network has no layers");
    std::size_t expected_in = input_dim_;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const Layer& l = layers_[i];
        if (l.weights.cols() != expected_in) {
            std::ostringstream os;
            os << "layer " << i + 1 << " expects in=" << expected_in << ", got " << l.weights.cols();
            throw Error(os.str());
        }
        if (l.weights.rows() == 0) {
            std::ostringstream os;
            os << "layer " << i + 1 << " has no outputs";
            throw Error(os.str());
        }
        if (l.bias.size() != l.weights.rows()) {
            std::ostringstream os;
            os << "layer " << i + 1 << " bias has " << l.bias.size() << " entries, expected "
               << l.weights.rows();
            throw Error(os.str());
        }
        if (!all_finite(l.weights.data()) || !all_finite(l.bias)) {
            std::ostringstream os;
            os << "layer " << i + 1 << " has non-finite parameters";
            throw Error(os.str());
        }
        expected_in = l.weights.rows();
    }
    if (layers_.back().activation != Activation::linear) {
        throw Error("final layer activation must be linear");
    }
}

std::size_t Network::output_dim() const {
    return layers_.empty() ? 0 : layers_.back().weights.rows();
}

Vec Network::operator()(std::span<const double> x) const {
    if (x.size() != input_dim_) throw Error("network input dimension mismatch");
    Vec h(x.begin(), x.end());
    for (const Layer& l : layers_) {
        Vec z = matvec(l.weights, h);
        for (std::size_t i = 0; i < z.size(); ++i) {
            z[i] += l.bias[i];
            if (l.activation == Activation::relu) z[i] = std::max(0.0, z[i]);
        }
        h = std::move(z);
    }
    return h;
}

std::string_view to_string(DynamicsKind kind) {
    return kind == DynamicsKind::unicycle ? "unicycle" : "double_integrator";
}

void DynamicsSpec::validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw Error("dynamics dt must be positive");
    if (!std::isfinite(v)) throw Error("dynamics v must be finite");
}

Vec step_exact(const DynamicsSpec& dyn, std::span<const double> x, std::span<const double> u) {
    if (x.size() != dyn.state_dim() || u.size() != dyn.control_dim()) {
        throw Error("step_exact: dimension mismatch");
    }
    const double dt = dyn.dt;
    switch (dyn.kind) {
        case DynamicsKind::double_integrator:
            return {x[0] + dt * x[1] + 0.5 * dt * dt * u[0], x[1] + dt * u[0]};
        case DynamicsKind::unicycle:
            return {x[0] + dt * dyn.v * std::cos(x[2]), x[1] + dt * dyn.v * std::sin(x[2]),
                    x[2] + dt * u[0]};
    }
    throw Error("step_exact: unknown dynamics");
}

bool is_nonlinear(NodeOp op) {
    return op == NodeOp::relu || op == NodeOp::sin || op == NodeOp::cos;
}

CompGraph::CompGraph(std::size_t input_dim) {
    if (input_dim == 0) throw Error("graph input_dim must be positive");
    Node in;
    in.op = NodeOp::input;
    in.dim = input_dim;
    nodes_.push_back(std::move(in));
}

std::size_t CompGraph::push(Node n) {
    n.policy_copy = current_copy_;
    nodes_.push_back(std::move(n));
    output_ = nodes_.size() - 1;
    return output_;
}

const Node& CompGraph::checked_input(std::size_t id) const {
    if (id >= nodes_.size()) throw Error("graph edge refers to a node that does not precede it");
    return nodes_[id];
}

std::size_t CompGraph::add_affine(std::size_t in, Mat weights, Vec bias) {
    const Node& src = checked_input(in);
    if (weights.cols() != src.dim || bias.size() != weights.rows()) {
        throw Error("affine node: dimension mismatch");
    }
    Node n;
    n.op = NodeOp::affine;
    n.inputs = {in};
    n.dim = weights.rows();
    n.weights = std::move(weights);
    n.bias = std::move(bias);
    return push(std::move(n));
}

namespace {

Node unary(NodeOp op, std::size_t in, std::size_t dim) {
    Node n;
    n.op = op;
    n.inputs = {in};
    n.dim = dim;
    return n;
}

}  // namespace

std::size_t CompGraph::add_relu(std::size_t in) {
    return push(unary(NodeOp::relu, in, checked_input(in).dim));
}

std::size_t CompGraph::add_sin(std::size_t in) {
    return push(unary(NodeOp::sin, in, checked_input(in).dim));
}

std::size_t CompGraph::add_cos(std::size_t in) {
    return push(unary(NodeOp::cos, in, checked_input(in).dim));
}

std::size_t CompGraph::add_scale(std::size_t in, double factor) {
    if (!std::isfinite(factor)) throw Error("scale node: non-finite factor");
    Node n = unary(NodeOp::scale, in, checked_input(in).dim);
    n.factor = factor;
    return push(std::move(n));
}

std::size_t CompGraph::add_sum(std::vector<std::size_t> ins) {
    if (ins.empty()) throw Error("sum node needs at least one input");
    const std::size_t dim = checked_input(ins.front()).dim;
    for (std::size_t id : ins) {
        if (checked_input(id).dim != dim) throw Error("sum node: dimension mismatch");
    }
    Node n;
    n.op = NodeOp::sum;
    n.inputs = std::move(ins);
    n.dim = dim;
    return push(std::move(n));
}

void CompGraph::set_output(std::size_t id) {
    checked_input(id);
    output_ = id;
}

std::size_t CompGraph::policy_copies() const {
    std::set<std::size_t> copies;
    for (const Node& n : nodes_) {
        if (n.policy_copy) copies.insert(*n.policy_copy);
    }
    return copies.size();
}

std::vector<Vec> CompGraph::evaluate_all(std::span<const double> x) const {
    if (x.size() != input_dim()) throw Error("evaluate: dimension mismatch");
    std::vector<Vec> values(nodes_.size());
    values[0].assign(x.begin(), x.end());
    for (std::size_t id = 1; id < nodes_.size(); ++id) {
        const Node& n = nodes_[id];
        const Vec& a = values[n.inputs.front()];
        Vec out;
        switch (n.op) {
            case NodeOp::input:
                throw Error("evaluate: graph has more than one input node");
            case NodeOp::affine:
                out = matvec(n.weights, a);
                for (std::size_t i = 0; i < out.size(); ++i) out[i] += n.bias[i];
                break;
            case NodeOp::relu:
                out = a;
                for (double& v : out) v = std::max(0.0, v);
                break;
            case NodeOp::sin:
                out = a;
                for (double& v : out) v = std::sin(v);
                break;
            case NodeOp::cos:
                out = a;
                for (double& v : out) v = std::cos(v);
                break;
            case NodeOp::scale:
                out = a;
                for (double& v : out) v *= n.factor;
                break;
            case NodeOp::sum:
                out = a;
                for (std::size_t k = 1; k < n.inputs.size(); ++k) {
                    const Vec& b = values[n.inputs[k]];
                    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
                }
                break;
        }
        values[id] = std::move(out);
    }
    return values;
}

Vec CompGraph::evaluate(std::span<const double> x) const {
    return evaluate_all(x)[output_];
}

Vec evaluate(const CompGraph& graph, std::span<const double> x) { return graph.evaluate(x); }

std::size_t append_network(CompGraph& g, std::size_t in, const Network& policy) {
    std::size_t cur = in;
    for (const Layer& l : policy.layers()) {
        cur = g.add_affine(cur, l.weights, l.bias);
        if (l.activation == Activation::relu) cur = g.add_relu(cur);
    }
    return cur;
}

namespace {

std::size_t append_step(CompGraph& g, std::size_t x, const DynamicsSpec& dyn,
                        const Network& policy, std::size_t copy) {
    const double dt = dyn.dt;
    g.set_policy_copy(copy);
    const std::size_t u = append_network(g, x, policy);
    g.set_policy_copy(std::nullopt);

    switch (dyn.kind) {
        case DynamicsKind::double_integrator: {
            const std::size_t drift = g.add_affine(x, Mat(2, 2, {1.0, dt, 0.0, 1.0}), {0.0, 0.0});
            const std::size_t push =
                g.add_affine(u, Mat(2, 1, {0.5 * dt * dt, dt}), {0.0, 0.0});
            return g.add_sum({drift, push});
        }
        case DynamicsKind::unicycle: {
            const std::size_t heading = g.add_affine(x, Mat(1, 3, {0.0, 0.0, 1.0}), {0.0});
            const std::size_t c = g.add_cos(heading);
            const std::size_t s = g.add_sin(heading);
            const double step = dt * dyn.v;
            const std::size_t dx = g.add_affine(c, Mat(3, 1, {step, 0.0, 0.0}), {0.0, 0.0, 0.0});
            const std::size_t dy = g.add_affine(s, Mat(3, 1, {0.0, step, 0.0}), {0.0, 0.0, 0.0});
            const std::size_t dpsi = g.add_affine(u, Mat(3, 1, {0.0, 0.0, dt}), {0.0, 0.0, 0.0});
            return g.add_sum({x, dx, dy, dpsi});
        }
    }
    throw Error("unknown dynamics kind");
}

}  // namespace

CompGraph compose_closed_loop(const DynamicsSpec& dyn, const Network& policy, std::size_t k) {
    if (k == 0) throw Error("compose_closed_loop: k must be positive");
    dyn.validate();
    if (policy.input_dim() != dyn.state_dim()) {
        throw Error("compose_closed_loop: policy input_dim does not match state dimension");
    }
    if (policy.output_dim() != dyn.control_dim()) {
        throw Error("compose_closed_loop: policy output_dim does not match control dimension");
    }
    CompGraph g(dyn.state_dim());
    std::size_t x = 0;
    for (std::size_t step = 0; step < k; ++step) x = append_step(g, x, dyn, policy, step);
    g.set_output(x);
    return g;
}

std::vector<Vec> simulate(const DynamicsSpec& dyn, const Network& policy,
                          std::span<const double> x0, std::size_t t) {
    std::vector<Vec> traj;
    traj.reserve(t + 1);
    traj.emplace_back(x0.begin(), x0.end());
    for (std::size_t i = 0; i < t; ++i) {
        const Vec& x = traj.back();
        traj.push_back(step_exact(dyn, x, policy(x)));
    }
    return traj;
}

}  // namespace carv
