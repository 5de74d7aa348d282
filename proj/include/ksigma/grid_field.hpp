#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace ksigma {

using Point = std::array<double, 3>;

/// Scalar field sampled on a uniform Cartesian box in 2 or 3 dimensions.
/// Unused trailing axes have extent 1. Storage is row-major (last axis fastest).
class GridField {
public:
    GridField() = default;
    GridField(int dims, std::array<int, 3> shape, double spacing, Point origin);

    /// Samples `f` at every node.
    static GridField sample(int dims, std::array<int, 3> shape, double spacing, Point origin,
                            const std::function<double(const Point&)>& f);
    /// Cube [-half_width, half_width]^dims with `cells` cells per axis.
    static GridField centered_box(int dims, int cells, double half_width,
                                  const std::function<double(const Point&)>& f);

    int dims() const noexcept { return dims_; }
    const std::array<int, 3>& shape() const noexcept { return shape_; }
    double spacing() const noexcept { return h_; }
    const Point& origin() const noexcept { return origin_; }
    std::size_t size() const noexcept { return values_.size(); }

    std::vector<double>& values() noexcept { return values_; }
    const std::vector<double>& values() const noexcept { return values_; }

    std::size_t index(int i, int j, int l) const noexcept {
        return (std::size_t(i) * shape_[1] + std::size_t(j)) * shape_[2] + std::size_t(l);
    }
    double& at(int i, int j, int l) { return values_[index(i, j, l)]; }
    double at(int i, int j, int l) const { return values_[index(i, j, l)]; }
    std::array<int, 3> multi_index(std::size_t flat) const noexcept;
    Point coord(int i, int j, int l) const noexcept;
    Point coord(std::size_t flat) const noexcept;

    /// Lower and upper corners of the box.
    Point lower() const noexcept { return origin_; }
    Point upper() const noexcept;
    bool contains(const Point& x) const noexcept;
    /// Distance from x to the box boundary (negative outside).
    double distance_to_boundary(const Point& x) const noexcept;

    /// Piecewise tricubic (tensor Lagrange, 4-point stencil) interpolation.
    /// Returns -inf if the stencil touches a non-finite sample.
    double interpolate(const Point& x) const;

    std::optional<std::size_t> singular_node;

    void write(std::ostream& os) const;
    static GridField read(std::istream& is);

private:
    int dims_ = 0;
    std::array<int, 3> shape_{1, 1, 1};
    double h_ = 0.0;
    Point origin_{0.0, 0.0, 0.0};
    std::vector<double> values_;
};

double distance(const Point& a, const Point& b) noexcept;

}  // namespace ksigma
