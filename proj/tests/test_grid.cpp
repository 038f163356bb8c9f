#include <cmath>
#include <set>

#include "doctest.h"
#include "wavezoom/errors.hpp"
#include "wavezoom/grid.hpp"
#include "wavezoom/rng.hpp"
#include "wavezoom/simulation.hpp"

using namespace wz;

namespace {

std::size_t count_boundary_by_enumeration(std::size_t nx, std::size_t ny) {
    std::size_t n = 0;
    for (std::size_t j = 0; j < ny; ++j)
        for (std::size_t i = 0; i < nx; ++i)
            if (i == 0 || i == nx - 1 || j == 0 || j == ny - 1) ++n;
    return n;
}

FieldSeries field_from(const GridSpec& g, std::size_t n_t, double (*fn)(double, double, std::size_t)) {
    FieldSeries f(g, n_t);
    for (std::size_t n = 0; n < n_t; ++n)
        for (std::size_t j = 0; j < g.n_y; ++j)
            for (std::size_t i = 0; i < g.n_x; ++i) f.at(n, j, i) = fn(g.x(i), g.y(j), n);
    return f;
}

}  // namespace

TEST_CASE("build_grid on the reference domain") {
    const GridSpec spec{-8, 8, -4, 4, 40, 20};
    const Grid g = build_grid(spec);
    CHECK(g.node_count() == 800);
    CHECK(g.element_count() == 741);
    CHECK(spec.dx() == doctest::Approx(16.0 / 39.0).epsilon(1e-15));
    CHECK(g.boundary_nodes.size() == count_boundary_by_enumeration(40, 20));
    CHECK(g.boundary_nodes.size() == 116);
    // row-major numbering
    CHECK(spec.node(3, 2) == 2 * 40 + 3);
    CHECK(spec.x(39) == doctest::Approx(8.0));
}

TEST_CASE("smallest grid is all boundary") {
    const Grid g = build_grid({0, 1, 0, 1, 2, 2});
    CHECK(g.node_count() == 4);
    CHECK(g.element_count() == 1);
    CHECK(g.boundary_nodes.size() == 4);
}

TEST_CASE("build_grid rejects invalid specs") {
    CHECK_THROWS_AS(build_grid({0, 1, 0, 1, 1, 5}), ConfigError);
    CHECK_THROWS_AS(build_grid({0, 0, 0, 1, 3, 3}), ConfigError);
    CHECK_THROWS_AS(build_grid({0, 1, 2, 1, 3, 3}), ConfigError);
    CHECK_THROWS_AS((TimeGrid{2, 1e-3}.validate()), ConfigError);
    CHECK_THROWS_AS((TimeGrid{10, 0.0}.validate()), ConfigError);
}

TEST_CASE("boundary_index sizes and ordering") {
    CHECK(boundary_index({-0.8, 7.2, -2, 2, 21, 11}).size() == count_boundary_by_enumeration(21, 11));
    CHECK(boundary_index({-0.8, 7.2, -2, 2, 21, 11}).size() == 60);
    CHECK(boundary_index({0, 1, 0, 1, 3, 2}).size() == count_boundary_by_enumeration(3, 2));

    const auto b = boundary_index({0, 1, 0, 1, 2, 2});
    REQUIRE(b.size() == 4);
    CHECK(b.nodes[0] == std::array<std::size_t, 2>{0, 0});
    CHECK(b.nodes[1] == std::array<std::size_t, 2>{1, 0});
    CHECK(b.nodes[2] == std::array<std::size_t, 2>{1, 1});
    CHECK(b.nodes[3] == std::array<std::size_t, 2>{0, 1});
}

TEST_CASE("boundary cycle is closed, simple and counterclockwise") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t nx = 2 + rng.index(12);
        const std::size_t ny = 2 + rng.index(12);
        const GridSpec g{0, 1, 0, 1, nx, ny};
        const auto b = boundary_index(g);
        REQUIRE(b.size() == 2 * nx + 2 * ny - 4);
        std::set<std::array<std::size_t, 2>> seen(b.nodes.begin(), b.nodes.end());
        CHECK(seen.size() == b.size());
        double area2 = 0.0;
        for (std::size_t k = 0; k < b.size(); ++k) {
            const auto& p = b.nodes[k];
            const auto& q = b.nodes[(k + 1) % b.size()];
            CHECK(g.on_boundary(p[0], p[1]));
            const auto di = p[0] > q[0] ? p[0] - q[0] : q[0] - p[0];
            const auto dj = p[1] > q[1] ? p[1] - q[1] : q[1] - p[1];
            CHECK(di + dj == 1);
            area2 += static_cast<double>(p[0]) * static_cast<double>(q[1]) -
                     static_cast<double>(q[0]) * static_cast<double>(p[1]);
        }
        CHECK(area2 > 0.0);
    }
}

TEST_CASE("sampling reproduces constants and bilinear functions") {
    const GridSpec full{-8, 8, -4, 4, 40, 20};
    const GridSpec sub = SimulationConfig::paper().sub;
    const auto c = field_from(full, 3, [](double, double, std::size_t) { return 3.5; });
    const auto tc = sample_on_subboundary(c, sub);
    CHECK(tc.n_b == 60);
    for (double v : tc.values) CHECK(v == doctest::Approx(3.5).epsilon(1e-15));

    const auto xy = field_from(full, 2, [](double x, double y, std::size_t) { return x * y; });
    const auto t = sample_on_subboundary(xy, sub);
    const auto b = boundary_index(sub);
    for (std::size_t n = 0; n < 2; ++n)
        for (std::size_t k = 0; k < b.size(); ++k) {
            const double ex = sub.x(b.nodes[k][0]) * sub.y(b.nodes[k][1]);
            CHECK(std::abs(t.at(n, k) - ex) <= 1e-12);
        }
}

TEST_CASE("aligned mode sampling is an exact gather") {
    const auto cfg = SimulationConfig::aligned();
    auto f = field_from(cfg.full, 2, [](double x, double y, std::size_t n) {
        return std::sin(1.3 * x + 0.1 * static_cast<double>(n)) * std::exp(0.2 * y);
    });
    const auto t = sample_on_subboundary(f, cfg.sub);
    const auto b = boundary_index(cfg.sub);
    for (std::size_t n = 0; n < 2; ++n)
        for (std::size_t k = 0; k < b.size(); ++k) {
            // Omega' node (i, j) sits on Omega node (i + 18, j + 5).
            CHECK(t.at(n, k) == f.at(n, b.nodes[k][1] + 5, b.nodes[k][0] + 18));
        }
    const auto s = sample_on_subgrid(f, cfg.sub);
    for (std::size_t j = 0; j < cfg.sub.n_y; ++j)
        for (std::size_t i = 0; i < cfg.sub.n_x; ++i) CHECK(s.at(1, j, i) == f.at(1, j + 5, i + 18));
}

TEST_CASE("sampling outside the domain is a domain error") {
    const GridSpec full{-8, 8, -4, 4, 40, 20};
    FieldSeries f(full, 1);
    CHECK_THROWS_AS(sample_on_subboundary(f, {5, 9, -1, 1, 5, 5}), DomainError);
}

TEST_CASE("restriction is linear") {
    const GridSpec full{-8, 8, -4, 4, 40, 20};
    const GridSpec sub = SimulationConfig::paper().sub;
    Rng rng(11);
    FieldSeries u(full, 2), v(full, 2), w(full, 2);
    const double a = 1.7, c = -0.3;
    for (std::size_t k = 0; k < u.values.size(); ++k) {
        u.values[k] = rng.uniform(-1, 1);
        v.values[k] = rng.uniform(-1, 1);
        w.values[k] = a * u.values[k] + c * v.values[k];
    }
    const auto tu = sample_on_subboundary(u, sub);
    const auto tv = sample_on_subboundary(v, sub);
    const auto tw = sample_on_subboundary(w, sub);
    for (std::size_t k = 0; k < tw.values.size(); ++k)
        CHECK(std::abs(tw.values[k] - (a * tu.values[k] + c * tv.values[k])) <= 1e-14);
}

TEST_CASE("interpolation error is second order") {
    // Omega' nodes keep the same cell fractions (1/3 -> 2/3) under refinement,
    // so the leading error term scales exactly with h^2.
    auto max_err = [](std::size_t n) {
        const GridSpec full{0, 4, 0, 4, n, n};
        const double h0 = 0.25;
        const GridSpec sub{1 + h0 / 3, 3 + h0 / 3, 1 + h0 / 3, 3 + h0 / 3, 9, 9};
        const auto f = field_from(full, 1, [](double x, double y, std::size_t) { return std::sin(x) * std::cos(y); });
        const auto t = sample_on_subboundary(f, sub);
        const auto b = boundary_index(sub);
        double e = 0.0;
        for (std::size_t k = 0; k < b.size(); ++k) {
            const double x = sub.x(b.nodes[k][0]), y = sub.y(b.nodes[k][1]);
            e = std::max(e, std::abs(t.at(0, k) - std::sin(x) * std::cos(y)));
        }
        return e;
    };
    const double e1 = max_err(17), e2 = max_err(33), e3 = max_err(65);
    CHECK(e1 / e2 >= 3.5);
    CHECK(e1 / e2 <= 4.5);
    CHECK(e2 / e3 >= 3.5);
    CHECK(e2 / e3 <= 4.5);
}
