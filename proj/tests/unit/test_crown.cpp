#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "carv/crown.hpp"
#include "oracles.hpp"

using namespace carv;

namespace {

double relu(double z) { return std::max(0.0, z); }

}  // namespace

TEST_CASE("relax_relu closed forms") {
    auto r = relax_relu({1.0, 2.0});
    CHECK(r.lower_slope == 1.0);
    CHECK(r.lower_intercept == 0.0);
    CHECK(r.upper_slope == 1.0);
    CHECK(r.upper_intercept == 0.0);

    r = relax_relu({-2.0, -1.0});
    CHECK(r.lower_slope == 0.0);
    CHECK(r.upper_slope == 0.0);
    CHECK(r.upper_intercept == 0.0);

    r = relax_relu({-1.0, 2.0});
    CHECK(r.upper_slope == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(r.upper_intercept == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(r.lower_slope == 1.0);
    CHECK(r.lower_intercept == 0.0);

    r = relax_relu({-2.0, 1.0});
    CHECK(r.lower_slope == 0.0);
}

TEST_CASE("relax_trig cases") {
    auto r = relax_trig(TrigKind::sin, {0.3, 0.3});
    CHECK(r.lower_slope == 0.0);
    CHECK(r.upper_slope == 0.0);
    CHECK(r.lower_intercept == std::sin(0.3));
    CHECK(r.upper_intercept == std::sin(0.3));

    // concave on [0, 1]: chord below, midpoint tangent above
    r = relax_trig(TrigKind::sin, {0.0, 1.0});
    CHECK(r.lower_slope == doctest::Approx(0.841471).epsilon(1e-6));
    CHECK(r.upper_slope == doctest::Approx(0.877583).epsilon(1e-6));
    CHECK(oracle::envelope_violation(r, [](double z) { return std::sin(z); }, 0.0, 1.0, 10000) <=
          1e-12);

    // width > 2*pi
    r = relax_trig(TrigKind::cos, {-4.0, 4.0});
    CHECK(r.lower_slope == 0.0);
    CHECK(r.upper_slope == 0.0);
    CHECK(r.lower_intercept == -1.0);
    CHECK(r.upper_intercept == 1.0);

    // mixed curvature, narrower than 2*pi: constant lines at the sampled extremes
    r = relax_trig(TrigKind::sin, {-0.5, 2.0});
    CHECK(r.lower_slope == 0.0);
    CHECK(r.upper_slope == 0.0);
    CHECK(r.lower_intercept == doctest::Approx(std::sin(-0.5)));
    CHECK(r.upper_intercept == 1.0);

    // convex region of cos: chord above
    r = relax_trig(TrigKind::cos, {2.0, 4.0});
    CHECK(r.upper_slope == doctest::Approx((std::cos(4.0) - std::cos(2.0)) / 2.0));
    CHECK(r.lower_slope == doctest::Approx(-std::sin(3.0)));
}

TEST_CASE("relaxations are sound on random intervals") {
    std::mt19937_64 rng(21);
    const std::function<double(double)> fs[] = {relu, [](double z) { return std::sin(z); },
                                                [](double z) { return std::cos(z); }};
    for (int trial = 0; trial < 300; ++trial) {
        const double a = oracle::uniform(rng, -10.0, 10.0);
        const double w = std::pow(10.0, oracle::uniform(rng, -6.0, 1.2));
        const Interval iv(a, a + w);
        const NodeRelaxation rels[] = {relax_relu(iv), relax_trig(TrigKind::sin, iv),
                                       relax_trig(TrigKind::cos, iv)};
        for (int k = 0; k < 3; ++k) {
            CHECK(oracle::envelope_violation(rels[k], fs[k], iv.lo, iv.hi, 2000) <= 1e-12);
        }
    }
}

TEST_CASE("shrinking the interval never raises the relu upper line") {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 500; ++trial) {
        const double l = oracle::uniform(rng, -3.0, 1.0);
        const double u = l + oracle::uniform(rng, 0.0, 4.0);
        const double l2 = l + oracle::uniform(rng, 0.0, 1.0) * (u - l);
        const double u2 = l2 + oracle::uniform(rng, 0.0, 1.0) * (u - l2);
        const auto big = relax_relu({l, u});
        const auto small = relax_relu({l2, u2});
        for (int k = 0; k <= 50; ++k) {
            const double z = l2 + (u2 - l2) * k / 50.0;
            CHECK(small.upper(z) <= big.upper(z) + 1e-12);
            if (small.lower_slope == big.lower_slope) CHECK(small.lower(z) >= big.lower(z) - 1e-12);
        }
    }
}

TEST_CASE("backward_crown is exact on affine graphs") {
    const Mat w(2, 3, {1.0, -2.0, 0.5, 3.0, 0.25, -1.0});
    const Vec b{0.1, -0.7};
    CompGraph g(3);
    g.add_affine(0, w, b);
    const Box in({-1, 0, 2}, {1, 1, 3});
    const LinearBounds lb = backward_crown(g, in);
    CHECK(lb.psi == w);
    CHECK(lb.phi == w);
    CHECK(lb.alpha == b);
    CHECK(lb.beta == b);

    CompGraph id(2);
    id.add_affine(0, Mat::identity(2), {0.0, 0.0});
    const LinearBounds il = backward_crown(id, Box({-1, -1}, {1, 1}));
    CHECK(il.psi == Mat::identity(2));
    CHECK(il.phi == Mat::identity(2));
    CHECK(il.alpha == Vec{0, 0});

    CHECK_THROWS_AS(backward_crown(g, Box({0, 0}, {1, 1})), Error);
}

TEST_CASE("backward_crown bounds a two-layer relu net pointwise") {
    std::mt19937_64 rng(31);
    const Network net = oracle::random_network(rng, 2, {6}, 2, 1.0);
    CompGraph g(2);
    append_network(g, 0, net);
    const Box in({-1, -1}, {1, 1});
    const LinearBounds lb = backward_crown(g, in);
    for (int i = 0; i < 10000; ++i) {
        const Vec z = oracle::sample_in(rng, in);
        const Vec y = evaluate(g, z);
        const Vec lo = oracle::affine(lb.psi, lb.alpha, z);
        const Vec hi = oracle::affine(lb.phi, lb.beta, z);
        for (std::size_t d = 0; d < y.size(); ++d) {
            CHECK(y[d] - lo[d] >= -1e-9);
            CHECK(hi[d] - y[d] >= -1e-9);
        }
    }
    // pre-activation ranges are recorded for the relu input
    bool found = false;
    for (std::size_t id = 0; id < g.nodes().size(); ++id) {
        if (g.node(id).op != NodeOp::relu) continue;
        const auto& pre = lb.intermediate[g.node(id).inputs.front()];
        REQUIRE(pre.has_value());
        found = true;
        for (int i = 0; i < 1000; ++i) {
            const auto vals = g.evaluate_all(oracle::sample_in(rng, in));
            CHECK(box_contains(*pre, vals[g.node(id).inputs.front()], 1e-9));
        }
    }
    CHECK(found);
}

TEST_CASE("concretize") {
    LinearBounds lb{Mat::identity(2), {0, 0}, Mat::identity(2), {0, 0}, {}};
    CHECK(concretize(lb, Box({-1, -1}, {1, 1})) == Box({-1, -1}, {1, 1}));

    LinearBounds sum{Mat(1, 2, {1, 1}), {0}, Mat(1, 2, {1, 1}), {0}, {}};
    CHECK(concretize(sum, Box({0, 0}, {1, 1})) == Box({0}, {2}));

    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 200; ++trial) {
        const Mat p = oracle::random_mat(rng, 2, 2, 2.0);
        const Vec a = oracle::random_vec(rng, 2, 1.0);
        Vec bb = a;
        for (double& v : bb) v += 5.0;  // keep upper above lower
        LinearBounds r{p, a, p, bb, {}};
        const Box in({-1, -1}, {1, 1});
        const Box got = concretize(r, in);
        const Box lo_hull = oracle::vertex_hull(in, [&](const Vec& z) { return oracle::affine(p, a, z); });
        const Box hi_hull = oracle::vertex_hull(in, [&](const Vec& z) { return oracle::affine(p, bb, z); });
        for (int d = 0; d < 2; ++d) {
            CHECK(got.lower()[d] == doctest::Approx(lo_hull.lower()[d]).epsilon(1e-12));
            CHECK(got.upper()[d] == doctest::Approx(hi_hull.upper()[d]).epsilon(1e-12));
        }
    }

    LinearBounds crossed{Mat(1, 1, {0.0}), {1.0}, Mat(1, 1, {0.0}), {0.0}, {}};
    CHECK_THROWS_WITH_AS(concretize(crossed, Box({0}, {1})), "inconsistent bounds", Error);
}

TEST_CASE("fuzzed graphs: concretized bounds contain sampled outputs") {
    std::mt19937_64 rng(51);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
        const CompGraph g = oracle::random_graph(rng, n);
        const Box in = oracle::random_box(rng, n, 2.0, 2.0);
        const Box out = concretize(backward_crown(g, in), in);
        for (int i = 0; i < 1000; ++i) {
            CHECK(box_contains(out, evaluate(g, oracle::sample_in(rng, in)), 1e-9));
        }
    }
}

TEST_CASE("affine graphs concretize to the exact image hull") {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 50; ++trial) {
        CompGraph g(3);
        const Mat w1 = oracle::random_mat(rng, 4, 3, 1.0);
        const Vec b1 = oracle::random_vec(rng, 4, 1.0);
        const Mat w2 = oracle::random_mat(rng, 2, 4, 1.0);
        const Vec b2 = oracle::random_vec(rng, 2, 1.0);
        const auto a = g.add_affine(0, w1, b1);
        const auto s = g.add_scale(a, 0.5);
        const auto sum = g.add_sum({a, s});
        g.add_affine(sum, w2, b2);
        const Box in = oracle::random_box(rng, 3, 2.0, 3.0);
        const Box got = concretize(backward_crown(g, in), in);
        const Box exact = oracle::vertex_hull(in, [&](const Vec& z) { return evaluate(g, z); });
        for (int d = 0; d < 2; ++d) {
            CHECK(std::abs(got.lower()[d] - exact.lower()[d]) <= 1e-12);
            CHECK(std::abs(got.upper()[d] - exact.upper()[d]) <= 1e-12);
        }
    }
}

TEST_CASE("overflowing bounds are reported") {
    CompGraph g(1);
    const auto a = g.add_affine(0, Mat(1, 1, {1e300}), {0.0});
    const auto r = g.add_relu(a);
    g.add_affine(r, Mat(1, 1, {1e300}), {0.0});
    CHECK_THROWS_WITH_AS(backward_crown(g, Box({-1}, {1})), "bounds diverged", Error);
}
