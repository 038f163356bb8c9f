#pragma once

#include <array>
#include <cstddef>

namespace wz {

/// Simulation parameters p = (omega, x_s, y_s). omega is in rad/s.
struct ParamVector {
    double omega = 5000.0;
    double x_s = -1.85;
    double y_s = -0.65;

    std::array<double, 3> as_array() const { return {omega, x_s, y_s}; }
    static ParamVector from_array(const std::array<double, 3>& a) { return {a[0], a[1], a[2]}; }
    bool operator==(const ParamVector&) const = default;
};

/// Per-component sampling box; defaults are the reference sampling ranges.
struct ParamBounds {
    std::array<double, 3> lo{4750.0, -2.2, -1.8};
    std::array<double, 3> hi{5250.0, -1.5, 0.5};

    void validate() const;
    bool contains(const ParamVector& p) const;
    // Affine map of each component onto [-1, 1].
    std::array<double, 3> normalize(const ParamVector& p) const;

    bool operator==(const ParamBounds&) const = default;
};

}  // namespace wz
