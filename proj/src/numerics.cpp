#include "carv/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace carv {

namespace {

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        std::ostringstream os;
        os << what << ": dimension mismatch (" << a << " vs " << b << ")";
        throw Error(os.str());
    }
}

}  // namespace

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

Mat::Mat(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Mat::Mat(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
    if (data_.size() != rows_ * cols_) {
        throw Error("Mat: entry count does not match rows*cols");
    }
    if (!all_finite(data_)) throw Error("Mat: non-finite entry");
}

Mat Mat::identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Mat matmul(const Mat& a, const Mat& b) {
    require_same_dim(a.cols(), b.rows(), "matmul");
    Mat out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto out_row = out.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            auto b_row = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
        }
    }
    return out;
}

Vec matvec(const Mat& a, std::span<const double> x) {
    require_same_dim(a.cols(), x.size(), "matvec");
    Vec out(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double acc = 0.0;
        auto r = a.row(i);
        for (std::size_t j = 0; j < a.cols(); ++j) acc += r[j] * x[j];
        out[i] = acc;
    }
    return out;
}

void add_scaled(Mat& out, const Mat& m, double scale) {
    if (out.rows() != m.rows() || out.cols() != m.cols()) {
        throw Error("add_scaled: shape mismatch");
    }
    for (std::size_t i = 0; i < out.rows(); ++i) {
        auto o = out.row(i);
        auto r = m.row(i);
        for (std::size_t j = 0; j < out.cols(); ++j) o[j] += scale * r[j];
    }
}

Interval::Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!(lo <= hi)) {
        std::ostringstream os;
        os << "invalid interval [" << lo << ", " << hi << "]";
        throw Error(os.str());
    }
}

Box::Box(Vec lower, Vec upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    require_same_dim(lower_.size(), upper_.size(), "Box");
    if (!all_finite(lower_) || !all_finite(upper_)) throw Error("Box: non-finite bound");
    for (std::size_t i = 0; i < lower_.size(); ++i) {
        if (lower_[i] > upper_[i]) {
            std::ostringstream os;
            os << "Box: lower > upper in coordinate " << i << " (" << lower_[i] << " > "
               << upper_[i] << ")";
            throw Error(os.str());
        }
    }
}

bool box_contains(const Box& b, std::span<const double> x, double tol) {
    require_same_dim(b.dim(), x.size(), "box_contains");
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < b.lower()[i] - tol || x[i] > b.upper()[i] + tol) return false;
    }
    return true;
}

CenterRadius box_center_radius(const Box& b) {
    CenterRadius cr{Vec(b.dim()), Vec(b.dim())};
    for (std::size_t i = 0; i < b.dim(); ++i) {
        cr.center[i] = 0.5 * (b.lower()[i] + b.upper()[i]);
        cr.radius[i] = 0.5 * (b.upper()[i] - b.lower()[i]);
    }
    return cr;
}

double box_excess(const Box& b, std::span<const double> x) {
    require_same_dim(b.dim(), x.size(), "box_excess");
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < x.size(); ++i) {
        worst = std::max({worst, b.lower()[i] - x[i], x[i] - b.upper()[i]});
    }
    return worst;
}

bool box_subset(const Box& inner, const Box& outer, double tol) {
    require_same_dim(inner.dim(), outer.dim(), "box_subset");
    for (std::size_t i = 0; i < inner.dim(); ++i) {
        if (inner.lower()[i] < outer.lower()[i] - tol) return false;
        if (inner.upper()[i] > outer.upper()[i] + tol) return false;
    }
    return true;
}

Box box_hull(const Box& a, const Box& b) {
    require_same_dim(a.dim(), b.dim(), "box_hull");
    Vec lo(a.dim()), hi(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) {
        lo[i] = std::min(a.lower()[i], b.lower()[i]);
        hi[i] = std::max(a.upper()[i], b.upper()[i]);
    }
    return Box(std::move(lo), std::move(hi));
}

std::string to_string(const Box& b) {
    std::ostringstream os;
    os.precision(6);
    for (std::size_t i = 0; i < b.dim(); ++i) {
        if (i) os << " x ";
        os << "[" << b.lower()[i] << ", " << b.upper()[i] << "]";
    }
    return os.str();
}

}  // namespace carv
