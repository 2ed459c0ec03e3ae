#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace carv {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Vec = std::vector<double>;

bool all_finite(std::span<const double> v);

// Dense row-major matrix.
class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0);
    Mat(std::size_t rows, std::size_t cols, std::vector<double> row_major);

    static Mat identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    const std::vector<double>& data() const { return data_; }

    bool operator==(const Mat&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Mat matmul(const Mat& a, const Mat& b);
Vec matvec(const Mat& a, std::span<const double> x);

// out += scale * m
void add_scaled(Mat& out, const Mat& m, double scale = 1.0);

struct Interval {
    double lo;
    double hi;

    Interval(double lo_, double hi_);

    double width() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    bool is_point() const { return lo == hi; }
};

// Axis-aligned box. Zero-width boxes are legal.
class Box {
public:
    Box() = default;
    Box(Vec lower, Vec upper);

    static Box point(const Vec& x) { return Box(x, x); }

    std::size_t dim() const { return lower_.size(); }
    const Vec& lower() const { return lower_; }
    const Vec& upper() const { return upper_; }
    Interval interval(std::size_t i) const { return {lower_[i], upper_[i]}; }
    double width(std::size_t i) const { return upper_[i] - lower_[i]; }

    bool operator==(const Box&) const = default;

private:
    Vec lower_;
    Vec upper_;
};

bool box_contains(const Box& b, std::span<const double> x, double tol);

struct CenterRadius {
    Vec center;
    Vec radius;
};

CenterRadius box_center_radius(const Box& b);

// Largest signed excursion of x outside b over all coordinates (<= 0 when inside).
double box_excess(const Box& b, std::span<const double> x);

bool box_subset(const Box& inner, const Box& outer, double tol);
Box box_hull(const Box& a, const Box& b);

std::string to_string(const Box& b);

}  // namespace carv
