#include "carv/crown.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace carv {

NodeRelaxation relax_relu(const Interval& pre) {
    const double l = pre.lo;
    const double u = pre.hi;
    if (u <= 0.0) return {0.0, 0.0, 0.0, 0.0};
    if (l >= 0.0) return {1.0, 0.0, 1.0, 0.0};
    const double slope = u / (u - l);
    NodeRelaxation r;
    r.upper_slope = slope;
    r.upper_intercept = -slope * l;
    r.lower_slope = (u >= -l) ? 1.0 : 0.0;
    r.lower_intercept = 0.0;
    return r;
}

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// True if offset + n*period lies in [l, u] for some integer n.
bool hits_lattice(double l, double u, double offset, double period) {
    const double n = std::ceil((l - offset) / period);
    return offset + n * period <= u;
}

// True if offset + n*period lies strictly inside (l, u) for some integer n.
bool hits_lattice_strict(double l, double u, double offset, double period) {
    const double n = std::floor((l - offset) / period) + 1.0;
    return offset + n * period < u;
}

NodeRelaxation constant_lines(double lo, double hi) { return {0.0, lo, 0.0, hi}; }

}  // namespace

NodeRelaxation relax_trig(TrigKind kind, const Interval& pre) {
    const double l = pre.lo;
    const double u = pre.hi;
    const bool is_sin = kind == TrigKind::sin;
    auto f = [is_sin](double z) { return is_sin ? std::sin(z) : std::cos(z); };
    auto df = [is_sin](double z) { return is_sin ? std::cos(z) : -std::sin(z); };

    if (pre.is_point()) {
        const double v = f(l);
        return constant_lines(v, v);
    }
    if (u - l >= kTwoPi) return constant_lines(-1.0, 1.0);

    // Both functions satisfy f'' = -f, so inflection points are the zeros of f.
    const double zero_offset = is_sin ? 0.0 : 0.5 * kPi;
    const double max_offset = is_sin ? 0.5 * kPi : 0.0;
    const double min_offset = is_sin ? -0.5 * kPi : kPi;

    const double fl = f(l);
    const double fu = f(u);
    // Absorbs rounding in the intercepts; lines are nudged outward by this much.
    const double slack = 8.0 * std::numeric_limits<double>::epsilon() *
                         (1.0 + std::max(std::abs(l), std::abs(u)));

    if (hits_lattice_strict(l, u, zero_offset, kPi)) {
        const double hi = hits_lattice(l, u, max_offset, kTwoPi) ? 1.0 : std::max(fl, fu);
        const double lo = hits_lattice(l, u, min_offset, kTwoPi) ? -1.0 : std::min(fl, fu);
        return constant_lines(lo, hi);
    }

    const double mid = 0.5 * (l + u);
    const double chord_slope = (fu - fl) / (u - l);
    const double chord_intercept = fl - chord_slope * l;
    const double tangent_slope = df(mid);
    const double tangent_intercept = f(mid) - tangent_slope * mid;
    const double scale_c = slack * (1.0 + std::abs(chord_slope));
    const double scale_t = slack * (1.0 + std::abs(tangent_slope));

    NodeRelaxation r;
    if (f(mid) > 0.0) {
        // concave: chord below, tangent above
        r.lower_slope = chord_slope;
        r.lower_intercept = chord_intercept - scale_c;
        r.upper_slope = tangent_slope;
        r.upper_intercept = tangent_intercept + scale_t;
    } else {
        r.upper_slope = chord_slope;
        r.upper_intercept = chord_intercept + scale_c;
        r.lower_slope = tangent_slope;
        r.lower_intercept = tangent_intercept - scale_t;
    }
    return r;
}

namespace {

// Coefficient matrices (rows = target dim) attached to graph nodes during a backward pass.
struct Lambda {
    Mat lower;
    Mat upper;
    bool present = false;
};

void accumulate(Lambda& slot, Mat lower, Mat upper) {
    if (!slot.present) {
        slot.lower = std::move(lower);
        slot.upper = std::move(upper);
        slot.present = true;
    } else {
        add_scaled(slot.lower, lower);
        add_scaled(slot.upper, upper);
    }
}

Mat scaled(const Mat& m, double c) {
    Mat out(m.rows(), m.cols());
    add_scaled(out, m, c);
    return out;
}

class BackwardPass {
public:
    BackwardPass(const CompGraph& graph, const Box& input)
        : graph_(graph),
          input_(input),
          bounds_(graph.nodes().size()),
          relax_(graph.nodes().size()) {}

    LinearBounds run() {
        const std::size_t target = graph_.output();
        for (std::size_t id = 1; id <= target; ++id) {
            const Node& n = graph_.node(id);
            if (!is_nonlinear(n.op)) continue;
            const std::size_t a = n.inputs.front();
            if (!bounds_[a]) {
                bounds_[a] = (a == 0) ? input_ : concretize(backward(a), input_);
            }
            relax_[id] = relaxations(n.op, *bounds_[a]);
        }
        LinearBounds lb = backward(target);
        lb.intermediate = bounds_;
        return lb;
    }

private:
    static std::vector<NodeRelaxation> relaxations(NodeOp op, const Box& pre) {
        std::vector<NodeRelaxation> out;
        out.reserve(pre.dim());
        for (std::size_t i = 0; i < pre.dim(); ++i) {
            switch (op) {
                case NodeOp::relu: out.push_back(relax_relu(pre.interval(i))); break;
                case NodeOp::sin: out.push_back(relax_trig(TrigKind::sin, pre.interval(i))); break;
                case NodeOp::cos: out.push_back(relax_trig(TrigKind::cos, pre.interval(i))); break;
                default: throw Error("relaxation requested for a linear node");
            }
        }
        return out;
    }

    LinearBounds backward(std::size_t target) const {
        const std::size_t rows = graph_.node(target).dim;
        std::vector<Lambda> lam(target + 1);
        lam[target].lower = Mat::identity(rows);
        lam[target].upper = Mat::identity(rows);
        lam[target].present = true;
        Vec alpha(rows, 0.0);
        Vec beta(rows, 0.0);

        for (std::size_t id = target; id >= 1; --id) {
            Lambda cur = std::move(lam[id]);
            lam[id] = Lambda{};
            if (!cur.present) continue;
            const Node& n = graph_.node(id);
            switch (n.op) {
                case NodeOp::input:
                    throw Error("graph has more than one input node");
                case NodeOp::affine: {
                    for (std::size_t i = 0; i < rows; ++i) {
                        auto lr = cur.lower.row(i);
                        auto ur = cur.upper.row(i);
                        for (std::size_t j = 0; j < n.bias.size(); ++j) {
                            alpha[i] += lr[j] * n.bias[j];
                            beta[i] += ur[j] * n.bias[j];
                        }
                    }
                    accumulate(lam[n.inputs.front()], matmul(cur.lower, n.weights),
                               matmul(cur.upper, n.weights));
                    break;
                }
                case NodeOp::sum:
                    for (std::size_t in : n.inputs) accumulate(lam[in], cur.lower, cur.upper);
                    break;
                case NodeOp::scale:
                    accumulate(lam[n.inputs.front()], scaled(cur.lower, n.factor),
                               scaled(cur.upper, n.factor));
                    break;
                case NodeOp::relu:
                case NodeOp::sin:
                case NodeOp::cos: {
                    const auto& rel = relax_[id];
                    Mat lower(rows, n.dim);
                    Mat upper(rows, n.dim);
                    for (std::size_t i = 0; i < rows; ++i) {
                        for (std::size_t j = 0; j < n.dim; ++j) {
                            const NodeRelaxation& r = rel[j];
                            const double l = cur.lower(i, j);
                            if (l >= 0.0) {
                                lower(i, j) = l * r.lower_slope;
                                alpha[i] += l * r.lower_intercept;
                            } else {
                                lower(i, j) = l * r.upper_slope;
                                alpha[i] += l * r.upper_intercept;
                            }
                            const double u = cur.upper(i, j);
                            if (u >= 0.0) {
                                upper(i, j) = u * r.upper_slope;
                                beta[i] += u * r.upper_intercept;
                            } else {
                                upper(i, j) = u * r.lower_slope;
                                beta[i] += u * r.lower_intercept;
                            }
                        }
                    }
                    accumulate(lam[n.inputs.front()], std::move(lower), std::move(upper));
                    break;
                }
            }
        }

        LinearBounds lb;
        if (lam[0].present) {
            lb.psi = std::move(lam[0].lower);
            lb.phi = std::move(lam[0].upper);
        } else {
            lb.psi = Mat(rows, graph_.input_dim());
            lb.phi = Mat(rows, graph_.input_dim());
        }
        lb.alpha = std::move(alpha);
        lb.beta = std::move(beta);
        if (!all_finite(lb.psi.data()) || !all_finite(lb.phi.data()) || !all_finite(lb.alpha) ||
            !all_finite(lb.beta)) {
            throw Error("bounds diverged");
        }
        return lb;
    }

    const CompGraph& graph_;
    const Box& input_;
    std::vector<std::optional<Box>> bounds_;
    std::vector<std::vector<NodeRelaxation>> relax_;
};

}  // namespace

LinearBounds backward_crown(const CompGraph& graph, const Box& input) {
    if (input.dim() != graph.input_dim()) {
        std::ostringstream os;
        os << "backward_crown: input box has dimension " << input.dim() << ", graph expects "
           << graph.input_dim();
        throw Error(os.str());
    }
    return BackwardPass(graph, input).run();
}

Box concretize(const LinearBounds& lb, const Box& input) {
    const std::size_t rows = lb.psi.rows();
    if (lb.phi.rows() != rows || lb.alpha.size() != rows || lb.beta.size() != rows ||
        lb.psi.cols() != input.dim() || lb.phi.cols() != input.dim()) {
        throw Error("concretize: shape mismatch");
    }
    const auto [center, radius] = box_center_radius(input);
    Vec lo(rows), hi(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        double l = lb.alpha[i];
        double u = lb.beta[i];
        auto pr = lb.psi.row(i);
        auto fr = lb.phi.row(i);
        for (std::size_t j = 0; j < input.dim(); ++j) {
            l += pr[j] * center[j] - std::abs(pr[j]) * radius[j];
            u += fr[j] * center[j] + std::abs(fr[j]) * radius[j];
        }
        if (!std::isfinite(l) || !std::isfinite(u)) throw Error("bounds diverged");
        if (l > u) {
            // Sound bounds can only cross through rounding.
            const double tol = 1e-9 * (1.0 + std::max(std::abs(l), std::abs(u)));
            if (l - u > tol) throw Error("inconsistent bounds");
            std::swap(l, u);
        }
        lo[i] = l;
        hi[i] = u;
    }
    return Box(std::move(lo), std::move(hi));
}

}  // namespace carv
