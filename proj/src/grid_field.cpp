#include "ksigma/grid_field.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "ksigma/error.hpp"

namespace ksigma {

GridField::GridField(int dims, std::array<int, 3> shape, double spacing, Point origin)
    : dims_(dims), shape_(shape), h_(spacing), origin_(origin) {
    if (dims != 2 && dims != 3) throw DomainError("GridField supports 2 or 3 dimensions");
    if (!(spacing > 0.0)) throw DomainError("GridField spacing must be positive");
    for (int d = 0; d < 3; ++d) {
        if (d < dims && shape_[d] < 2) throw DomainError("GridField needs >= 2 nodes per axis");
        if (d >= dims) {
            shape_[d] = 1;
            origin_[d] = 0.0;
        }
    }
    values_.assign(std::size_t(shape_[0]) * shape_[1] * shape_[2], 0.0);
}

GridField GridField::sample(int dims, std::array<int, 3> shape, double spacing, Point origin,
                            const std::function<double(const Point&)>& f) {
    GridField g(dims, shape, spacing, origin);
    for (std::size_t q = 0; q < g.size(); ++q) g.values_[q] = f(g.coord(q));
    return g;
}

GridField GridField::centered_box(int dims, int cells, double half_width,
                                  const std::function<double(const Point&)>& f) {
    const double h = 2.0 * half_width / cells;
    std::array<int, 3> shape{cells + 1, cells + 1, dims == 3 ? cells + 1 : 1};
    Point origin{-half_width, -half_width, dims == 3 ? -half_width : 0.0};
    return sample(dims, shape, h, origin, f);
}

std::array<int, 3> GridField::multi_index(std::size_t flat) const noexcept {
    const int l = int(flat % std::size_t(shape_[2]));
    flat /= std::size_t(shape_[2]);
    const int j = int(flat % std::size_t(shape_[1]));
    const int i = int(flat / std::size_t(shape_[1]));
    return {i, j, l};
}

Point GridField::coord(int i, int j, int l) const noexcept {
    return {origin_[0] + i * h_, origin_[1] + j * h_, origin_[2] + l * h_};
}

Point GridField::coord(std::size_t flat) const noexcept {
    const auto m = multi_index(flat);
    return coord(m[0], m[1], m[2]);
}

Point GridField::upper() const noexcept {
    return {origin_[0] + (shape_[0] - 1) * h_, origin_[1] + (shape_[1] - 1) * h_,
            origin_[2] + (shape_[2] - 1) * h_};
}

bool GridField::contains(const Point& x) const noexcept { return distance_to_boundary(x) >= 0.0; }

double GridField::distance_to_boundary(const Point& x) const noexcept {
    const Point hi = upper();
    double d = std::numeric_limits<double>::infinity();
    for (int a = 0; a < dims_; ++a) d = std::min({d, x[a] - origin_[a], hi[a] - x[a]});
    return d;
}

namespace {

// Lagrange weights for nodes 0..3 at local coordinate s (nodes at 0,1,2,3).
std::array<double, 4> cubic_weights(double s) {
    return {-(s - 1) * (s - 2) * (s - 3) / 6.0, s * (s - 2) * (s - 3) / 2.0,
            -s * (s - 1) * (s - 3) / 2.0, s * (s - 1) * (s - 2) / 6.0};
}

}  // namespace

double GridField::interpolate(const Point& x) const {
    std::array<int, 3> base{0, 0, 0};
    std::array<std::array<double, 4>, 3> w{};
    std::array<int, 3> count{1, 1, 1};
    for (int a = 0; a < 3; ++a) {
        if (a >= dims_) {
            w[a] = {1.0, 0.0, 0.0, 0.0};
            continue;
        }
        const double t = (x[a] - origin_[a]) / h_;
        if (t < -1e-9 || t > shape_[a] - 1 + 1e-9) throw DomainError("interpolation point outside grid");
        const int n_a = shape_[a];
        if (n_a < 4) {
            // Linear fallback on very small axes.
            int c = std::clamp(int(std::floor(t)), 0, n_a - 2);
            base[a] = c;
            const double s = t - c;
            w[a] = {1.0 - s, s, 0.0, 0.0};
            count[a] = 2;
            continue;
        }
        int c = int(std::floor(t)) - 1;
        c = std::clamp(c, 0, n_a - 4);
        base[a] = c;
        w[a] = cubic_weights(t - c);
        count[a] = 4;
    }
    double acc = 0.0;
    for (int p = 0; p < count[0]; ++p)
        for (int q = 0; q < count[1]; ++q)
            for (int r = 0; r < count[2]; ++r) {
                const double wt = w[0][p] * w[1][q] * w[2][r];
                const double v = at(base[0] + p, base[1] + q, base[2] + r);
                if (!std::isfinite(v)) return -std::numeric_limits<double>::infinity();
                acc += wt * v;
            }
    return acc;
}

void GridField::write(std::ostream& os) const {
    os << "dims " << dims_ << "\n";
    os << "shape";
    for (int a = 0; a < dims_; ++a) os << ' ' << shape_[a];
    os << "\nspacing " << std::setprecision(17) << h_ << "\n";
    os << "origin";
    for (int a = 0; a < dims_; ++a) os << ' ' << origin_[a];
    os << "\n";
    if (singular_node) os << "singular " << *singular_node << "\n";
    os << "values\n";
    const int row = shape_[dims_ - 1];
    for (std::size_t q = 0; q < values_.size(); ++q) {
        os << std::scientific << std::setprecision(16) << values_[q];
        os << (((q + 1) % std::size_t(row)) == 0 ? '\n' : ' ');
    }
    os << std::defaultfloat;
}

GridField GridField::read(std::istream& is) {
    int dims = 0;
    std::array<int, 3> shape{1, 1, 1};
    double spacing = 0.0;
    Point origin{0, 0, 0};
    std::optional<std::size_t> singular;
    std::string key;
    bool have_values = false;
    while (!have_values && is >> key) {
        if (key == "dims") {
            is >> dims;
        } else if (key == "shape") {
            for (int a = 0; a < dims; ++a) is >> shape[a];
        } else if (key == "spacing") {
            is >> spacing;
        } else if (key == "origin") {
            for (int a = 0; a < dims; ++a) is >> origin[a];
        } else if (key == "singular") {
            std::size_t s = 0;
            is >> s;
            singular = s;
        } else if (key == "values") {
            have_values = true;
        } else {
            throw ConfigError("grid file: unknown header key '" + key + "'");
        }
        if (!is) throw ConfigError("grid file: malformed header near '" + key + "'");
    }
    if (!have_values) throw ConfigError("grid file: missing 'values' section");
    GridField g(dims, shape, spacing, origin);
    for (auto& v : g.values_) {
        std::string tok;
        if (!(is >> tok)) throw ConfigError("grid file: too few values");
        if (tok == "-inf" || tok == "-Inf")
            v = -std::numeric_limits<double>::infinity();
        else if (tok == "inf" || tok == "Inf")
            v = std::numeric_limits<double>::infinity();
        else {
            std::istringstream ts(tok);
            if (!(ts >> v)) throw ConfigError("grid file: bad value '" + tok + "'");
        }
    }
    g.singular_node = singular;
    return g;
}

double distance(const Point& a, const Point& b) noexcept {
    const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

}  // namespace ksigma
