#include "wavezoom/grid.hpp"

#include <cmath>
#include <string>

#include "wavezoom/errors.hpp"

namespace wz {

void GridSpec::validate() const {
    if (n_x < 2 || n_y < 2) {
        throw ConfigError("grid needs at least 2 nodes per axis, got " + std::to_string(n_x) +
                          "x" + std::to_string(n_y));
    }
    if (!(x_min < x_max) || !(y_min < y_max) || !std::isfinite(x_max - x_min) ||
        !std::isfinite(y_max - y_min)) {
        throw ConfigError("grid extents are degenerate");
    }
}

bool GridSpec::contains(const GridSpec& inner, double tol) const {
    const double sx = tol * (x_max - x_min);
    const double sy = tol * (y_max - y_min);
    return inner.x_min >= x_min - sx && inner.x_max <= x_max + sx && inner.y_min >= y_min - sy &&
           inner.y_max <= y_max + sy;
}

void TimeGrid::validate() const {
    if (n_t < 3) {
        throw ConfigError("time grid needs at least 3 steps");
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ConfigError("time step must be positive");
    }
}

Grid build_grid(const GridSpec& spec) {
    spec.validate();
    Grid g;
    g.spec = spec;
    g.elements.reserve((spec.n_x - 1) * (spec.n_y - 1));
    for (std::size_t j = 0; j + 1 < spec.n_y; ++j) {
        for (std::size_t i = 0; i + 1 < spec.n_x; ++i) {
            g.elements.push_back({spec.node(i, j), spec.node(i + 1, j), spec.node(i + 1, j + 1),
                                  spec.node(i, j + 1)});
        }
    }
    for (std::size_t j = 0; j < spec.n_y; ++j) {
        for (std::size_t i = 0; i < spec.n_x; ++i) {
            if (spec.on_boundary(i, j)) g.boundary_nodes.push_back(spec.node(i, j));
        }
    }
    return g;
}

BoundaryIndex boundary_index(const GridSpec& sub) {
    sub.validate();
    BoundaryIndex b;
    const std::size_t nx = sub.n_x;
    const std::size_t ny = sub.n_y;
    b.nodes.reserve(2 * nx + 2 * ny - 4);
    for (std::size_t i = 0; i < nx; ++i) b.nodes.push_back({i, 0});
    for (std::size_t j = 1; j < ny; ++j) b.nodes.push_back({nx - 1, j});
    for (std::size_t i = nx - 1; i-- > 0;) b.nodes.push_back({i, ny - 1});
    for (std::size_t j = ny - 1; j-- > 1;) b.nodes.push_back({0, j});
    return b;
}

namespace {

// Cell index and local coordinate along one axis, snapping near-nodal points.
void locate(double s, std::size_t n, std::size_t& cell, double& xi) {
    const double r = std::round(s);
    if (std::abs(s - r) < 1e-9) s = r;
    double c = std::floor(s);
    if (c < 0.0) c = 0.0;
    if (c > static_cast<double>(n - 2)) c = static_cast<double>(n - 2);
    cell = static_cast<std::size_t>(c);
    xi = s - c;
}

std::vector<std::array<double, 2>> subgrid_points(const GridSpec& sub) {
    std::vector<std::array<double, 2>> pts;
    pts.reserve(sub.node_count());
    for (std::size_t j = 0; j < sub.n_y; ++j)
        for (std::size_t i = 0; i < sub.n_x; ++i) pts.push_back({sub.x(i), sub.y(j)});
    return pts;
}

void require_inside(const GridSpec& outer, const GridSpec& sub) {
    sub.validate();
    if (!outer.contains(sub)) {
        throw DomainError("subdomain extends outside the full domain");
    }
}

}  // namespace

Restriction::Restriction(const GridSpec& source, const std::vector<std::array<double, 2>>& points) {
    source.validate();
    const double dx = source.dx();
    const double dy = source.dy();
    stencils_.reserve(points.size());
    for (const auto& p : points) {
        const double sx = (p[0] - source.x_min) / dx;
        const double sy = (p[1] - source.y_min) / dy;
        const double tol = 1e-9;
        if (sx < -tol || sy < -tol || sx > static_cast<double>(source.n_x - 1) + tol ||
            sy > static_cast<double>(source.n_y - 1) + tol) {
            throw DomainError("interpolation point outside the source grid");
        }
        std::size_t ci = 0, cj = 0;
        double xi = 0.0, eta = 0.0;
        locate(sx, source.n_x, ci, xi);
        locate(sy, source.n_y, cj, eta);
        Stencil s;
        s.nodes = {source.node(ci, cj), source.node(ci + 1, cj), source.node(ci + 1, cj + 1),
                   source.node(ci, cj + 1)};
        s.weights = {(1 - xi) * (1 - eta), xi * (1 - eta), xi * eta, (1 - xi) * eta};
        stencils_.push_back(s);
    }
}

void Restriction::apply(const double* source_frame, double* out) const {
    for (std::size_t k = 0; k < stencils_.size(); ++k) {
        const auto& s = stencils_[k];
        double v = 0.0;
        for (int a = 0; a < 4; ++a) {
            // Zero weights are skipped so coincident nodes are copied bit-exactly.
            if (s.weights[a] != 0.0) v += s.weights[a] * source_frame[s.nodes[a]];
        }
        out[k] = v;
    }
}

BoundaryTrace sample_on_subboundary(const FieldSeries& field, const GridSpec& sub) {
    require_inside(field.grid, sub);
    const BoundaryIndex bi = boundary_index(sub);
    std::vector<std::array<double, 2>> pts;
    pts.reserve(bi.size());
    for (const auto& n : bi.nodes) pts.push_back({sub.x(n[0]), sub.y(n[1])});
    const Restriction r(field.grid, pts);
    BoundaryTrace trace(field.n_t, bi.size());
    for (std::size_t n = 0; n < field.n_t; ++n) r.apply(field.frame(n), &trace.values[n * trace.n_b]);
    return trace;
}

FieldSeries sample_on_subgrid(const FieldSeries& field, const GridSpec& sub) {
    require_inside(field.grid, sub);
    const Restriction r(field.grid, subgrid_points(sub));
    FieldSeries out(sub, field.n_t);
    for (std::size_t n = 0; n < field.n_t; ++n) r.apply(field.frame(n), out.frame(n));
    return out;
}

BoundaryTrace boundary_trace(const FieldSeries& field) {
    const BoundaryIndex bi = boundary_index(field.grid);
    BoundaryTrace trace(field.n_t, bi.size());
    for (std::size_t n = 0; n < field.n_t; ++n)
        for (std::size_t b = 0; b < bi.size(); ++b)
            trace.at(n, b) = field.at(n, bi.nodes[b][1], bi.nodes[b][0]);
    return trace;
}

}  // namespace wz
