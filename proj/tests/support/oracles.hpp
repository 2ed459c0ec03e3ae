#pragma once

// Test-only oracles. Nothing here calls into the bound engine: expected
// values come from enumeration, dense sampling, or direct simulation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <variant>
#include <vector>

#include "carv/compgraph.hpp"
#include "carv/crown.hpp"
#include "carv/reach.hpp"

namespace oracle {

using carv::Box;
using carv::Mat;
using carv::Vec;

inline std::vector<Vec> vertices(const Box& b) {
    const std::size_t n = b.dim();
    std::vector<Vec> out;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        Vec v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = (mask >> i & 1) ? b.upper()[i] : b.lower()[i];
        out.push_back(std::move(v));
    }
    return out;
}

// Interval hull of a map over the vertices of b; exact for affine maps.
inline Box vertex_hull(const Box& b, const std::function<Vec(const Vec&)>& f) {
    Vec lo, hi;
    for (const Vec& v : vertices(b)) {
        const Vec y = f(v);
        if (lo.empty()) {
            lo = y;
            hi = y;
        }
        for (std::size_t i = 0; i < y.size(); ++i) {
            lo[i] = std::min(lo[i], y[i]);
            hi[i] = std::max(hi[i], y[i]);
        }
    }
    return Box(lo, hi);
}

inline Vec affine(const Mat& w, const Vec& b, const Vec& x) {
    Vec y(w.rows(), 0.0);
    for (std::size_t i = 0; i < w.rows(); ++i) {
        y[i] = b.empty() ? 0.0 : b[i];
        for (std::size_t j = 0; j < w.cols(); ++j) y[i] += w(i, j) * x[j];
    }
    return y;
}

// Worst violation of lower <= f <= upper over n evenly spaced points (endpoints included).
inline double envelope_violation(const carv::NodeRelaxation& r, const std::function<double(double)>& f,
                                 double lo, double hi, std::size_t n) {
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double z = (n == 1) ? lo : lo + (hi - lo) * static_cast<double>(k) / (n - 1);
        const double fz = f(z);
        worst = std::max({worst, r.lower(z) - fz, fz - r.upper(z)});
    }
    return worst;
}

inline double uniform(std::mt19937_64& rng, double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(rng);
}

inline Mat random_mat(std::mt19937_64& rng, std::size_t r, std::size_t c, double scale) {
    Mat m(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m(i, j) = uniform(rng, -scale, scale);
    return m;
}

inline Vec random_vec(std::mt19937_64& rng, std::size_t n, double scale) {
    Vec v(n);
    for (double& x : v) x = uniform(rng, -scale, scale);
    return v;
}

inline carv::Network random_network(std::mt19937_64& rng, std::size_t in,
                                     const std::vector<std::size_t>& hidden, std::size_t out,
                                     double scale = 0.5) {
    std::vector<carv::Layer> layers;
    std::size_t prev = in;
    for (std::size_t h : hidden) {
        layers.push_back({random_mat(rng, h, prev, scale), random_vec(rng, h, scale),
                          carv::Activation::relu});
        prev = h;
    }
    layers.push_back(
        {random_mat(rng, out, prev, scale), random_vec(rng, out, scale), carv::Activation::linear});
    return carv::Network(in, std::move(layers));
}

inline Box random_box(std::mt19937_64& rng, std::size_t n, double center_scale, double max_width) {
    Vec lo(n), hi(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double c = uniform(rng, -center_scale, center_scale);
        const double w = uniform(rng, 0.0, max_width);
        lo[i] = c - 0.5 * w;
        hi[i] = c + 0.5 * w;
    }
    return Box(lo, hi);
}

inline Vec sample_in(std::mt19937_64& rng, const Box& b) {
    Vec x(b.dim());
    for (std::size_t i = 0; i < b.dim(); ++i) {
        x[i] = b.lower()[i] + uniform(rng, 0.0, 1.0) * (b.upper()[i] - b.lower()[i]);
        x[i] = std::min(x[i], b.upper()[i]);
    }
    return x;
}

// Random graph with up to three hidden stages mixing relu/sin/cos and a sum skip.
inline carv::CompGraph random_graph(std::mt19937_64& rng, std::size_t in_dim) {
    carv::CompGraph g(in_dim);
    std::size_t cur = 0;
    std::size_t width = in_dim;
    const int stages = std::uniform_int_distribution<int>(1, 3)(rng);
    for (int s = 0; s < stages; ++s) {
        const std::size_t w = std::uniform_int_distribution<std::size_t>(1, 8)(rng);
        const std::size_t a = g.add_affine(cur, random_mat(rng, w, width, 1.0), random_vec(rng, w, 0.5));
        switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
            case 0: cur = g.add_relu(a); break;
            case 1: cur = g.add_sin(a); break;
            default: cur = g.add_cos(a); break;
        }
        if (std::uniform_int_distribution<int>(0, 1)(rng)) {
            const std::size_t skip = g.add_scale(a, uniform(rng, -1.0, 1.0));
            cur = g.add_sum({cur, skip});
        }
        width = w;
    }
    const std::size_t out_dim = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
    g.add_affine(cur, random_mat(rng, out_dim, width, 1.0), random_vec(rng, out_dim, 0.5));
    return g;
}

inline Vec forward(const carv::Network& net, Vec x) {
    for (const carv::Layer& l : net.layers()) {
        x = affine(l.weights, l.bias, x);
        if (l.activation == carv::Activation::relu) {
            for (double& v : x) v = std::max(v, 0.0);
        }
    }
    return x;
}

inline Vec step(const carv::DynamicsSpec& d, const carv::Network& pi, const Vec& x) {
    const double u = forward(pi, x)[0];
    const double h = d.dt;
    if (d.kind == carv::DynamicsKind::double_integrator) {
        return {x[0] + h * x[1] + 0.5 * h * h * u, x[1] + h * u};
    }
    return {x[0] + h * d.v * std::cos(x[2]), x[1] + h * d.v * std::sin(x[2]), x[2] + h * u};
}

inline std::vector<Vec> rollout(const carv::Scenario& s, Vec x, std::size_t horizon) {
    std::vector<Vec> path{x};
    for (std::size_t t = 0; t < horizon; ++t) path.push_back(x = step(s.dynamics, s.policy, x));
    return path;
}

// Closed-loop trajectories from uniform samples of X0 (corners first when asked).
inline std::vector<std::vector<Vec>> trajectories(const carv::Scenario& s, std::size_t n,
                                                  std::size_t horizon, std::uint64_t seed,
                                                  bool include_corners = true) {
    std::mt19937_64 rng(seed);
    std::vector<std::vector<Vec>> out;
    if (include_corners) {
        for (const Vec& v : vertices(s.x0)) {
            if (out.size() < n) out.push_back(rollout(s, v, horizon));
        }
    }
    while (out.size() < n) out.push_back(rollout(s, sample_in(rng, s.x0), horizon));
    return out;
}

// Constraint checks written from the definitions.
inline bool point_safe(const carv::ConstraintSet& c, const Vec& x) {
    for (const auto& item : c.items()) {
        if (const auto* h = std::get_if<carv::Halfspace>(&item)) {
            double v = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) v += h->normal[i] * x[i];
            if (v < h->offset) return false;
        } else {
            const auto& d = std::get<carv::DiskAvoid>(item);
            const double dx = x[d.coords[0]] - d.center[0];
            const double dy = x[d.coords[1]] - d.center[1];
            if (std::sqrt(dx * dx + dy * dy) < d.radius) return false;
        }
    }
    return true;
}

// Halfspaces: minimum over the vertices. Disks: distance from the center to the clamped point.
inline bool box_safe(const carv::ConstraintSet& c, const Box& b) {
    for (const auto& item : c.items()) {
        if (const auto* h = std::get_if<carv::Halfspace>(&item)) {
            for (const Vec& v : vertices(b)) {
                if (!point_safe(carv::ConstraintSet({*h}), v)) return false;
            }
        } else {
            const auto& d = std::get<carv::DiskAvoid>(item);
            const std::size_t i = d.coords[0], j = d.coords[1];
            const double px = std::clamp(d.center[0], b.lower()[i], b.upper()[i]);
            const double py = std::clamp(d.center[1], b.lower()[j], b.upper()[j]);
            if (std::hypot(px - d.center[0], py - d.center[1]) < d.radius) return false;
        }
    }
    return true;
}

inline Mat mat_pow(const Mat& m, std::size_t k) {
    Mat out = Mat::identity(m.rows());
    for (std::size_t i = 0; i < k; ++i) out = carv::matmul(out, m);
    return out;
}

}  // namespace oracle
