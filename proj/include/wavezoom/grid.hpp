#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace wz {

/// Uniform Cartesian node lattice on [x_min, x_max] x [y_min, y_max].
struct GridSpec {
    double x_min = 0.0;
    double x_max = 1.0;
    double y_min = 0.0;
    double y_max = 1.0;
    std::size_t n_x = 2;
    std::size_t n_y = 2;

    void validate() const;

    double dx() const { return (x_max - x_min) / static_cast<double>(n_x - 1); }
    double dy() const { return (y_max - y_min) / static_cast<double>(n_y - 1); }
    double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx(); }
    double y(std::size_t j) const { return y_min + static_cast<double>(j) * dy(); }
    std::size_t node_count() const { return n_x * n_y; }
    // Row-major node numbering.
    std::size_t node(std::size_t i, std::size_t j) const { return j * n_x + i; }
    bool on_boundary(std::size_t i, std::size_t j) const {
        return i == 0 || j == 0 || i + 1 == n_x || j + 1 == n_y;
    }
    bool contains(const GridSpec& inner, double tol = 1e-12) const;

    bool operator==(const GridSpec&) const = default;
};

struct TimeGrid {
    std::size_t n_t = 100;
    double dt = 4e-5;

    void validate() const;
    double t(std::size_t n) const { return static_cast<double>(n) * dt; }
    double t_final() const { return static_cast<double>(n_t - 1) * dt; }

    bool operator==(const TimeGrid&) const = default;
};

struct Grid {
    GridSpec spec;
    // Bilinear quadrilaterals; local order (i,j), (i+1,j), (i+1,j+1), (i,j+1).
    std::vector<std::array<std::size_t, 4>> elements;
    std::vector<std::size_t> boundary_nodes;

    std::size_t node_count() const { return spec.node_count(); }
    std::size_t element_count() const { return elements.size(); }
};

Grid build_grid(const GridSpec& spec);

/// Nodes of the grid boundary, counterclockwise from the lower-left corner.
struct BoundaryIndex {
    std::vector<std::array<std::size_t, 2>> nodes;  // (i, j)

    std::size_t size() const { return nodes.size(); }
};

BoundaryIndex boundary_index(const GridSpec& sub);

/// Space-time field with values laid out [n_t][n_y][n_x].
struct FieldSeries {
    GridSpec grid;
    std::size_t n_t = 0;
    std::vector<double> values;

    FieldSeries() = default;
    FieldSeries(const GridSpec& g, std::size_t steps)
        : grid(g), n_t(steps), values(steps * g.node_count(), 0.0) {}

    std::size_t frame_size() const { return grid.node_count(); }
    double& at(std::size_t n, std::size_t j, std::size_t i) {
        return values[n * frame_size() + grid.node(i, j)];
    }
    double at(std::size_t n, std::size_t j, std::size_t i) const {
        return values[n * frame_size() + grid.node(i, j)];
    }
    double* frame(std::size_t n) { return values.data() + n * frame_size(); }
    const double* frame(std::size_t n) const { return values.data() + n * frame_size(); }
};

/// Dirichlet data on the ordered boundary nodes, laid out [n_t][n_b].
struct BoundaryTrace {
    std::size_t n_t = 0;
    std::size_t n_b = 0;
    std::vector<double> values;

    BoundaryTrace() = default;
    BoundaryTrace(std::size_t steps, std::size_t nb)
        : n_t(steps), n_b(nb), values(steps * nb, 0.0) {}

    double& at(std::size_t n, std::size_t b) { return values[n * n_b + b]; }
    double at(std::size_t n, std::size_t b) const { return values[n * n_b + b]; }
};

/// Bilinear interpolation weights from a source grid onto a list of points.
/// Points coinciding with source nodes (within 1e-9 of a cell) reproduce the
/// nodal value exactly.
class Restriction {
public:
    Restriction(const GridSpec& source, const std::vector<std::array<double, 2>>& points);

    std::size_t size() const { return stencils_.size(); }
    void apply(const double* source_frame, double* out) const;

private:
    struct Stencil {
        std::array<std::size_t, 4> nodes;
        std::array<double, 4> weights;
    };
    std::vector<Stencil> stencils_;
};

BoundaryTrace sample_on_subboundary(const FieldSeries& field, const GridSpec& sub);

/// Interpolates every node of the subgrid, giving a field on Omega'.
FieldSeries sample_on_subgrid(const FieldSeries& field, const GridSpec& sub);

/// Boundary values of a field that already lives on its own grid.
BoundaryTrace boundary_trace(const FieldSeries& field);

}  // namespace wz
