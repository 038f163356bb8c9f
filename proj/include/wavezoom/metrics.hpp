#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "wavezoom/grid.hpp"

namespace wz {

/// Per-time index falls back to "skipped" when the reference maximum at that
/// time is below this fraction of the maximum over the whole trajectory.
inline constexpr double kSkipThreshold = 1e-8;

/// An indicator indexed by time. Entry k belongs to time index t_offset + k.
struct Curve {
    std::size_t t_offset = 0;
    std::vector<double> value;
    std::vector<bool> skipped;
    std::string note;  // set when the whole curve is undefined

    std::size_t size() const { return value.size(); }
    bool undefined() const { return !note.empty(); }
};

/// Mean absolute error at one time divided by max |U| at that time (no skip guard).
double epsilon(const FieldSeries& m, const FieldSeries& u, std::size_t n);

/// epsilon at every time index, with the near-zero denominator guard.
Curve epsilon_curve(const FieldSeries& m, const FieldSeries& u, std::size_t t_offset = 0);

/// Mean over curves at each time index, ignoring members skipped there.
Curve epsilon_aggregate(const std::vector<Curve>& curves);

/// Median over the non-skipped entries; NaN when none.
double curve_median(const Curve& c);

/// ((u_i - u_{i-1}) / dt)^2 / 2 for i >= 1; frame k of the result is time index k + 1.
FieldSeries kinetic_energy(const FieldSeries& u, double dt);

/// Pointwise mean and (population) standard deviation over a set of fields.
FieldSeries pointwise_mean(const std::vector<FieldSeries>& fields);
FieldSeries pointwise_std(const std::vector<FieldSeries>& fields, const FieldSeries& mean);

/// sqrt(E_z[(M(z) - mean)^2]) pointwise.
FieldSeries discrepancy(const std::vector<FieldSeries>& samples, const FieldSeries& mean);

/// E_xy|sigma - sigma_train| / max_xy sigma_train at each t, with the same guard as epsilon.
Curve discrepancy_rel(const FieldSeries& sigma, const FieldSeries& sigma_train);

/// |max_t U - min_t U| per node, row-major [n_y][n_x].
std::vector<double> max_amplitude(const FieldSeries& u);

struct Histogram {
    std::vector<double> edges;  // bins + 1 increasing edges
    std::vector<std::size_t> counts;

    std::size_t total() const;
};

/// Equal-width bins; the last bin is closed. Values outside are clamped into the end bins.
Histogram histogram(const std::vector<double>& values, const std::vector<double>& edges);
std::vector<double> uniform_edges(double lo, double hi, std::size_t bins);

}  // namespace wz
