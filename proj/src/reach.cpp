#include "carv/reach.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "carv/crown.hpp"

namespace carv {

std::string_view to_string(RsoaKind kind) {
    switch (kind) {
        case RsoaKind::initial: return "initial";
        case RsoaKind::concrete: return "concrete";
        case RsoaKind::symbolic: return "symbolic";
    }
    return "unknown";
}

Rsoa initial_rsoa(const Box& x0) { return Rsoa{x0, 0, RsoaKind::initial, 0}; }

bool is_symbolic(const Rsoa& r) {
    return r.kind == RsoaKind::initial || r.kind == RsoaKind::symbolic;
}

namespace {

void validate_item(const ConstraintItem& item) {
    if (const auto* h = std::get_if<Halfspace>(&item)) {
        if (h->normal.empty() || !all_finite(h->normal) || !std::isfinite(h->offset)) {
            throw Error("halfspace: normal and offset must be finite");
        }
        if (std::all_of(h->normal.begin(), h->normal.end(), [](double v) { return v == 0.0; })) {
            throw Error("halfspace: normal must be nonzero");
        }
    } else {
        const auto& d = std::get<DiskAvoid>(item);
        if (!(d.radius > 0.0) || !std::isfinite(d.radius)) {
            throw Error("disk_avoid: radius must be positive");
        }
        if (!std::isfinite(d.center[0]) || !std::isfinite(d.center[1])) {
            throw Error("disk_avoid: center must be finite");
        }
        if (d.coords[0] == d.coords[1]) throw Error("disk_avoid: coords must differ");
    }
}

std::size_t required_dim(const ConstraintItem& item) {
    if (const auto* h = std::get_if<Halfspace>(&item)) return h->normal.size();
    const auto& d = std::get<DiskAvoid>(item);
    return std::max(d.coords[0], d.coords[1]) + 1;
}

void check_dim(const ConstraintItem& item, std::size_t n) {
    if (const auto* h = std::get_if<Halfspace>(&item)) {
        if (h->normal.size() != n) throw Error("constraint: halfspace dimension mismatch");
    } else if (required_dim(item) > n) {
        throw Error("constraint: disk coordinate out of range");
    }
}

double sq(double x) { return x * x; }

}  // namespace

ConstraintSet::ConstraintSet(std::vector<ConstraintItem> items) {
    for (auto& it : items) add(std::move(it));
}

void ConstraintSet::add(ConstraintItem item) {
    validate_item(item);
    items_.push_back(std::move(item));
}

ConstraintSet ConstraintSet::inflated(double delta) const {
    ConstraintSet out;
    for (ConstraintItem item : items_) {
        if (auto* d = std::get_if<DiskAvoid>(&item)) d->radius += delta;
        out.add(std::move(item));
    }
    return out;
}

bool eval_point(const ConstraintSet& c, std::span<const double> x) {
    for (const auto& item : c.items()) {
        check_dim(item, x.size());
        if (const auto* h = std::get_if<Halfspace>(&item)) {
            double s = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) s += h->normal[i] * x[i];
            if (!(s >= h->offset)) return false;
        } else {
            const auto& d = std::get<DiskAvoid>(item);
            const double d2 = sq(x[d.coords[0]] - d.center[0]) + sq(x[d.coords[1]] - d.center[1]);
            if (!(d2 >= sq(d.radius))) return false;
        }
    }
    return true;
}

std::optional<Vec> violation_witness(const ConstraintSet& c, const Box& b) {
    for (const auto& item : c.items()) {
        check_dim(item, b.dim());
        if (const auto* h = std::get_if<Halfspace>(&item)) {
            // corner minimizing normal . x
            Vec corner(b.dim());
            for (std::size_t i = 0; i < b.dim(); ++i) {
                corner[i] = h->normal[i] >= 0.0 ? b.lower()[i] : b.upper()[i];
            }
            double s = 0.0;
            for (std::size_t i = 0; i < b.dim(); ++i) s += h->normal[i] * corner[i];
            if (!(s >= h->offset)) return corner;
        } else {
            const auto& d = std::get<DiskAvoid>(item);
            // point of the box closest to the disk center in the constrained plane
            Vec p = box_center_radius(b).center;
            for (int k = 0; k < 2; ++k) {
                const std::size_t i = d.coords[k];
                p[i] = std::clamp(d.center[k], b.lower()[i], b.upper()[i]);
            }
            const double d2 = sq(p[d.coords[0]] - d.center[0]) + sq(p[d.coords[1]] - d.center[1]);
            if (!(d2 >= sq(d.radius))) return p;
        }
    }
    return std::nullopt;
}

bool eval_box(const ConstraintSet& c, const Box& b) { return !violation_witness(c, b).has_value(); }

void Scenario::validate() const {
    dynamics.validate();
    const std::size_t n = dynamics.state_dim();
    if (x0.dim() != n) throw Error("scenario: x0 dimension does not match the dynamics");
    if (policy.input_dim() != n || policy.output_dim() != dynamics.control_dim()) {
        throw Error("scenario: policy dimensions do not match the dynamics");
    }
    for (const auto& item : constraints.items()) check_dim(item, n);
    if (t_f < 1) throw Error("scenario: t_f must be >= 1");
    if (k_max < 1) throw Error("scenario: k_max must be >= 1");
}

Box bound_closed_loop(const Box& from, const DynamicsSpec& dyn, const Network& policy,
                      std::size_t k) {
    const CompGraph graph = compose_closed_loop(dyn, policy, k);
    return concretize(backward_crown(graph, from), from);
}

Rsoa concrete_reachability(const Rsoa& prev, const DynamicsSpec& dyn, const Network& policy) {
    return Rsoa{bound_closed_loop(prev.box, dyn, policy, 1), prev.t + 1, RsoaKind::concrete,
                prev.t};
}

Rsoa symbolic_reachability(const Rsoa& anchor, const DynamicsSpec& dyn, const Network& policy,
                           std::size_t k) {
    if (k == 0) throw Error("symbolic_reachability: horizon must be positive");
    return Rsoa{bound_closed_loop(anchor.box, dyn, policy, k), anchor.t + k, RsoaKind::symbolic,
                anchor.t};
}

}  // namespace carv
