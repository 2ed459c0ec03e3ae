#pragma once

// Reachable-set over-approximations and safe-set predicates.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "carv/compgraph.hpp"
#include "carv/numerics.hpp"

namespace carv {

enum class RsoaKind { initial, concrete, symbolic };

std::string_view to_string(RsoaKind kind);

struct Rsoa {
    Box box;
    std::size_t t = 0;
    RsoaKind kind = RsoaKind::initial;
    std::size_t anchor_t = 0;  // time index of the set this one was bounded from
};

Rsoa initial_rsoa(const Box& x0);

// X0 counts as symbolic: it is exact, so it is a valid anchor.
bool is_symbolic(const Rsoa& r);

// normal . x >= offset
struct Halfspace {
    Vec normal;
    double offset = 0.0;
};

// Keeps the projection onto `coords` outside the open disk.
struct DiskAvoid {
    std::array<double, 2> center{};
    double radius = 1.0;
    std::array<std::size_t, 2> coords{0, 1};
};

using ConstraintItem = std::variant<Halfspace, DiskAvoid>;

// Conjunction of items; the empty set accepts everything.
class ConstraintSet {
public:
    ConstraintSet() = default;
    explicit ConstraintSet(std::vector<ConstraintItem> items);

    void add(ConstraintItem item);
    const std::vector<ConstraintItem>& items() const { return items_; }
    bool empty() const { return items_.empty(); }

    // Copy with every disk radius grown by delta.
    ConstraintSet inflated(double delta) const;

private:
    std::vector<ConstraintItem> items_;
};

bool eval_point(const ConstraintSet& c, std::span<const double> x);

// True iff no point of b lies outside the safe set. A false answer means the
// box cannot be certified, not that the true reachable set is unsafe.
bool eval_box(const ConstraintSet& c, const Box& b);

// Point of b that violates c, if any (exact for halfspaces and disks).
std::optional<Vec> violation_witness(const ConstraintSet& c, const Box& b);

struct McConfig {
    std::size_t n = 1000;
    std::uint64_t seed = 0;
};

struct Scenario {
    DynamicsSpec dynamics;
    Network policy;
    std::string policy_path;
    Box x0;
    ConstraintSet constraints;
    std::size_t t_f = 1;
    std::size_t k_max = 1;
    McConfig mc;

    void validate() const;
};

// Bounds F^k_cl over the anchor box with one backward pass.
Box bound_closed_loop(const Box& from, const DynamicsSpec& dyn, const Network& policy,
                      std::size_t k);

Rsoa concrete_reachability(const Rsoa& prev, const DynamicsSpec& dyn, const Network& policy);

Rsoa symbolic_reachability(const Rsoa& anchor, const DynamicsSpec& dyn, const Network& policy,
                           std::size_t k);

}  // namespace carv
