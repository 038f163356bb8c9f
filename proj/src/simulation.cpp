#include "wavezoom/simulation.hpp"

#include <cmath>
#include <sstream>

#include "wavezoom/errors.hpp"

namespace wz {

namespace {
const char* kParamNames[3] = {"omega", "x_s", "y_s"};
}

void ParamBounds::validate() const {
    for (int k = 0; k < 3; ++k) {
        if (!(lo[k] < hi[k])) {
            throw ConfigError(std::string("bounds.") + kParamNames[k] + ": min must be < max");
        }
    }
}

bool ParamBounds::contains(const ParamVector& p) const {
    const auto a = p.as_array();
    for (int k = 0; k < 3; ++k)
        if (a[k] < lo[k] || a[k] > hi[k]) return false;
    return true;
}

std::array<double, 3> ParamBounds::normalize(const ParamVector& p) const {
    const auto a = p.as_array();
    std::array<double, 3> r{};
    for (int k = 0; k < 3; ++k) r[k] = 2.0 * (a[k] - lo[k]) / (hi[k] - lo[k]) - 1.0;
    return r;
}

bool in_closure(const GridSpec& g, double x, double y) {
    return x >= g.x_min && x <= g.x_max && y >= g.y_min && y <= g.y_max;
}

GridSpec SimulationConfig::zone(double cx, double cy, double half_x, double half_y,
                                std::size_t n_x, std::size_t n_y) {
    return {cx - half_x, cx + half_x, cy - half_y, cy + half_y, n_x, n_y};
}

SimulationConfig SimulationConfig::paper() {
    SimulationConfig c;
    c.mode = GridMode::Paper;
    c.full = {-8.0, 8.0, -4.0, 4.0, 40, 20};
    c.sub = zone(3.2, 0.0, 4.0, 2.0, 21, 11);
    return c;
}

SimulationConfig SimulationConfig::aligned() {
    SimulationConfig c = paper();
    c.mode = GridMode::Aligned;
    c.full.n_x = 41;
    c.full.n_y = 21;
    return c;
}

std::vector<std::string> SimulationConfig::validation_errors() const {
    std::vector<std::string> errs;
    auto check = [&](const std::string& field, auto&& fn) {
        try {
            fn();
        } catch (const ConfigError& e) {
            errs.push_back(field + ": " + e.what());
        }
    };
    bool grids_ok = true;
    check("grid.full", [&] { full.validate(); });
    check("grid.sub", [&] { sub.validate(); });
    if (!errs.empty()) grids_ok = false;
    check("time", [&] { time.validate(); });
    if (!(wave_speed > 0.0) || !std::isfinite(wave_speed)) errs.push_back("wave_speed: must be positive");
    for (int k = 0; k < 3; ++k) {
        if (!(bounds.lo[k] < bounds.hi[k])) {
            std::ostringstream os;
            os << "bounds." << kParamNames[k] << ": min (" << bounds.lo[k] << ") must be < max ("
               << bounds.hi[k] << ")";
            errs.push_back(os.str());
        }
    }
    if (grids_ok) {
        if (!full.contains(sub)) errs.push_back("grid.sub: zone of interest is not contained in the full domain");
        const double mx = 0.5 * full.dx();
        const double my = 0.5 * full.dy();
        if (bounds.lo[1] < full.x_min + mx || bounds.hi[1] > full.x_max - mx ||
            bounds.lo[2] < full.y_min + my || bounds.hi[2] > full.y_max - my) {
            errs.push_back("bounds: source box reaches the outer boundary of the full domain");
        }
        if (exclusion) {
            const bool overlap = bounds.lo[1] <= sub.x_max && bounds.hi[1] >= sub.x_min &&
                                 bounds.lo[2] <= sub.y_max && bounds.hi[2] >= sub.y_min;
            if (overlap) errs.push_back("bounds: source box intersects the zone of interest");
        }
    }
    return errs;
}

void SimulationConfig::validate() const {
    const auto errs = validation_errors();
    if (errs.empty()) return;
    std::string msg = "invalid simulation configuration:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw ConfigError(msg);
}

std::string to_string(GridMode m) { return m == GridMode::Paper ? "paper" : "aligned"; }

GridMode grid_mode_from_string(const std::string& s) {
    if (s == "paper") return GridMode::Paper;
    if (s == "aligned") return GridMode::Aligned;
    throw ConfigError("grid.mode: expected 'paper' or 'aligned', got '" + s + "'");
}

void to_json(nlohmann::json& j, const GridSpec& g) {
    j = {{"x_min", g.x_min}, {"x_max", g.x_max}, {"y_min", g.y_min},
         {"y_max", g.y_max}, {"n_x", g.n_x},     {"n_y", g.n_y}};
}

void from_json(const nlohmann::json& j, GridSpec& g) {
    g.x_min = j.value("x_min", g.x_min);
    g.x_max = j.value("x_max", g.x_max);
    g.y_min = j.value("y_min", g.y_min);
    g.y_max = j.value("y_max", g.y_max);
    g.n_x = j.value("n_x", g.n_x);
    g.n_y = j.value("n_y", g.n_y);
}

void to_json(nlohmann::json& j, const TimeGrid& t) { j = {{"n_t", t.n_t}, {"dt", t.dt}}; }

void from_json(const nlohmann::json& j, TimeGrid& t) {
    t.n_t = j.value("n_t", t.n_t);
    t.dt = j.value("dt", t.dt);
}

void to_json(nlohmann::json& j, const ParamBounds& b) {
    j = nlohmann::json::object();
    for (int k = 0; k < 3; ++k) j[kParamNames[k]] = {b.lo[k], b.hi[k]};
}

void from_json(const nlohmann::json& j, ParamBounds& b) {
    for (int k = 0; k < 3; ++k) {
        if (!j.contains(kParamNames[k])) continue;
        const auto& r = j.at(kParamNames[k]);
        if (!r.is_array() || r.size() != 2) {
            throw ConfigError(std::string("bounds.") + kParamNames[k] + ": expected [min, max]");
        }
        b.lo[k] = r[0].get<double>();
        b.hi[k] = r[1].get<double>();
    }
}

void to_json(nlohmann::json& j, const SimulationConfig& c) {
    j = {{"mode", to_string(c.mode)}, {"full", c.full},      {"sub", c.sub},
         {"time", c.time},            {"wave_speed", c.wave_speed}, {"bounds", c.bounds},
         {"exclusion", c.exclusion}};
}

void from_json(const nlohmann::json& j, SimulationConfig& c) {
    const GridMode mode = grid_mode_from_string(j.value("mode", std::string("paper")));
    c = mode == GridMode::Paper ? SimulationConfig::paper() : SimulationConfig::aligned();
    if (j.contains("full")) from_json(j.at("full"), c.full);
    if (j.contains("sub")) from_json(j.at("sub"), c.sub);
    if (j.contains("time")) from_json(j.at("time"), c.time);
    c.wave_speed = j.value("wave_speed", c.wave_speed);
    if (j.contains("bounds")) from_json(j.at("bounds"), c.bounds);
    c.exclusion = j.value("exclusion", c.exclusion);
}

}  // namespace wz
