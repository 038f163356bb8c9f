#include "wavezoom/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wavezoom/errors.hpp"

namespace wz {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void same_layout(const FieldSeries& a, const FieldSeries& b, const char* what) {
    if (a.grid != b.grid || a.n_t != b.n_t || a.values.size() != b.values.size())
        throw ShapeError(std::string(what) + ": fields have different shapes");
}

double frame_max_abs(const FieldSeries& u, std::size_t n) {
    const double* f = u.frame(n);
    double m = 0.0;
    for (std::size_t i = 0; i < u.frame_size(); ++i) m = std::max(m, std::abs(f[i]));
    return m;
}

double series_max_abs(const FieldSeries& u) {
    double m = 0.0;
    for (double v : u.values) m = std::max(m, std::abs(v));
    return m;
}

// Shared skip logic: entry n is value(n) unless the reference max at n is negligible.
template <typename F>
Curve guarded_curve(const FieldSeries& ref, std::size_t t_offset, const std::string& degenerate, F value) {
    Curve c;
    c.t_offset = t_offset;
    c.value.assign(ref.n_t, kNaN);
    c.skipped.assign(ref.n_t, true);
    const double top = series_max_abs(ref);
    if (!(top > 0.0)) {
        c.note = degenerate;
        return c;
    }
    for (std::size_t n = 0; n < ref.n_t; ++n) {
        const double den = frame_max_abs(ref, n);
        if (den < kSkipThreshold * top) continue;
        c.value[n] = value(n, den);
        c.skipped[n] = false;
    }
    return c;
}

}  // namespace

double epsilon(const FieldSeries& m, const FieldSeries& u, std::size_t n) {
    same_layout(m, u, "epsilon");
    if (n >= u.n_t) throw ShapeError("epsilon: time index out of range");
    const double den = frame_max_abs(u, n);
    if (den == 0.0) return kNaN;
    const double* a = m.frame(n);
    const double* b = u.frame(n);
    double s = 0.0;
    for (std::size_t i = 0; i < u.frame_size(); ++i) s += std::abs(a[i] - b[i]);
    return s / static_cast<double>(u.frame_size()) / den;
}

Curve epsilon_curve(const FieldSeries& m, const FieldSeries& u, std::size_t t_offset) {
    same_layout(m, u, "epsilon");
    return guarded_curve(u, t_offset, "reference trajectory is identically zero", [&](std::size_t n, double den) {
        const double* a = m.frame(n);
        const double* b = u.frame(n);
        double s = 0.0;
        for (std::size_t i = 0; i < u.frame_size(); ++i) s += std::abs(a[i] - b[i]);
        return s / static_cast<double>(u.frame_size()) / den;
    });
}

Curve epsilon_aggregate(const std::vector<Curve>& curves) {
    if (curves.empty()) throw ConfigError("epsilon aggregate over an empty set");
    Curve out;
    out.t_offset = curves.front().t_offset;
    const std::size_t n = curves.front().size();
    for (const auto& c : curves)
        if (c.size() != n || c.t_offset != out.t_offset) throw ShapeError("epsilon aggregate: curves differ in length");
    out.value.assign(n, kNaN);
    out.skipped.assign(n, true);
    for (std::size_t t = 0; t < n; ++t) {
        double s = 0.0;
        std::size_t k = 0;
        for (const auto& c : curves) {
            if (c.skipped[t]) continue;
            s += c.value[t];
            ++k;
        }
        if (k == 0) continue;
        out.value[t] = s / static_cast<double>(k);
        out.skipped[t] = false;
    }
    if (std::all_of(out.skipped.begin(), out.skipped.end(), [](bool b) { return b; }))
        out.note = "every time index skipped in every member";
    return out;
}

double curve_median(const Curve& c) {
    std::vector<double> v;
    for (std::size_t t = 0; t < c.size(); ++t)
        if (!c.skipped[t]) v.push_back(c.value[t]);
    if (v.empty()) return kNaN;
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

FieldSeries kinetic_energy(const FieldSeries& u, double dt) {
    if (u.n_t < 2) throw ShapeError("kinetic energy needs at least 2 time steps");
    if (!(dt > 0.0)) throw ConfigError("kinetic energy needs dt > 0");
    FieldSeries k(u.grid, u.n_t - 1);
    for (std::size_t n = 1; n < u.n_t; ++n) {
        const double* a = u.frame(n);
        const double* b = u.frame(n - 1);
        double* o = k.frame(n - 1);
        for (std::size_t i = 0; i < u.frame_size(); ++i) {
            const double v = (a[i] - b[i]) / dt;
            o[i] = 0.5 * v * v;
        }
    }
    return k;
}

FieldSeries pointwise_mean(const std::vector<FieldSeries>& fields) {
    if (fields.empty()) throw ConfigError("pointwise mean over an empty set");
    FieldSeries m(fields.front().grid, fields.front().n_t);
    for (const auto& f : fields) {
        same_layout(f, m, "pointwise mean");
        for (std::size_t i = 0; i < f.values.size(); ++i) m.values[i] += f.values[i];
    }
    for (double& v : m.values) v /= static_cast<double>(fields.size());
    return m;
}

FieldSeries pointwise_std(const std::vector<FieldSeries>& fields, const FieldSeries& mean) {
    return discrepancy(fields, mean);
}

FieldSeries discrepancy(const std::vector<FieldSeries>& samples, const FieldSeries& mean) {
    if (samples.empty()) throw ConfigError("discrepancy needs at least one draw");
    FieldSeries s(mean.grid, mean.n_t);
    for (const auto& f : samples) {
        same_layout(f, mean, "discrepancy");
        for (std::size_t i = 0; i < f.values.size(); ++i) {
            const double d = f.values[i] - mean.values[i];
            s.values[i] += d * d;
        }
    }
    for (double& v : s.values) v = std::sqrt(v / static_cast<double>(samples.size()));
    return s;
}

Curve discrepancy_rel(const FieldSeries& sigma, const FieldSeries& sigma_train) {
    same_layout(sigma, sigma_train, "discrepancy_rel");
    return guarded_curve(sigma_train, 0, "training spread is identically zero (degenerate training set)",
                         [&](std::size_t n, double den) {
                             const double* a = sigma.frame(n);
                             const double* b = sigma_train.frame(n);
                             double s = 0.0;
                             for (std::size_t i = 0; i < sigma.frame_size(); ++i) s += std::abs(a[i] - b[i]);
                             return s / static_cast<double>(sigma.frame_size()) / den;
                         });
}

std::vector<double> max_amplitude(const FieldSeries& u) {
    const std::size_t n = u.frame_size();
    if (u.n_t == 0) return std::vector<double>(n, 0.0);
    std::vector<double> lo(u.frame(0), u.frame(0) + n), hi = lo;
    for (std::size_t t = 1; t < u.n_t; ++t) {
        const double* f = u.frame(t);
        for (std::size_t i = 0; i < n; ++i) {
            lo[i] = std::min(lo[i], f[i]);
            hi[i] = std::max(hi[i], f[i]);
        }
    }
    for (std::size_t i = 0; i < n; ++i) hi[i] = std::abs(hi[i] - lo[i]);
    return hi;
}

std::size_t Histogram::total() const {
    std::size_t s = 0;
    for (auto c : counts) s += c;
    return s;
}

std::vector<double> uniform_edges(double lo, double hi, std::size_t bins) {
    if (bins == 0) throw ConfigError("histogram needs at least one bin");
    if (!(hi > lo)) hi = lo + 1.0;
    std::vector<double> e(bins + 1);
    for (std::size_t k = 0; k <= bins; ++k) e[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(bins);
    e[bins] = hi;
    return e;
}

Histogram histogram(const std::vector<double>& values, const std::vector<double>& edges) {
    if (edges.size() < 2) throw ConfigError("histogram needs at least two edges");
    for (std::size_t k = 1; k < edges.size(); ++k)
        if (!(edges[k] > edges[k - 1])) throw ConfigError("histogram edges must increase");
    Histogram h{edges, std::vector<std::size_t>(edges.size() - 1, 0)};
    for (double v : values) {
        if (std::isnan(v)) throw NumericalError("histogram value is NaN");
        auto it = std::upper_bound(edges.begin(), edges.end(), v);
        std::ptrdiff_t b = (it - edges.begin()) - 1;
        b = std::clamp<std::ptrdiff_t>(b, 0, static_cast<std::ptrdiff_t>(h.counts.size()) - 1);
        ++h.counts[static_cast<std::size_t>(b)];
    }
    return h;
}

}  // namespace wz
