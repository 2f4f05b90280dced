#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace mmson {

struct Point2D {
    double x = 0.0;  // meters
    double y = 0.0;  // meters

    friend bool operator==(const Point2D&, const Point2D&) = default;
};

/// Euclidean distance in meters.
inline double distance(Point2D a, Point2D b) noexcept {
    return std::hypot(a.x - b.x, a.y - b.y);
}

/// Dense row-major square matrix of doubles.
class SquareMatrix {
public:
    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

    std::size_t size() const noexcept { return n_; }
    bool empty() const noexcept { return n_ == 0; }

    double& operator()(std::size_t row, std::size_t col) noexcept { return data_[row * n_ + col]; }
    double operator()(std::size_t row, std::size_t col) const noexcept { return data_[row * n_ + col]; }

    const std::vector<double>& data() const noexcept { return data_; }

    friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

}  // namespace mmson
