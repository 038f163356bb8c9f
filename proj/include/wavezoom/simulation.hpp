#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "wavezoom/grid.hpp"
#include "wavezoom/params.hpp"

namespace wz {

enum class GridMode { Paper, Aligned };

/// Everything that determines a full-model solve and the zone of interest.
struct SimulationConfig {
    GridMode mode = GridMode::Paper;
    GridSpec full;
    GridSpec sub;
    TimeGrid time;
    double wave_speed = 2000.0;
    ParamBounds bounds;
    // Reject sources inside the closure of the zone of interest.
    bool exclusion = true;

    /// 40x20 nodes on [-8,8]x[-4,4]; Omega' = [-0.8,7.2]x[-2,2] with 21x11 nodes.
    static SimulationConfig paper();
    /// 41x21 nodes (dx = dy = 0.4) so Omega' nodes coincide with Omega nodes.
    static SimulationConfig aligned();
    /// Places Omega' at `center` with the given half extents.
    static GridSpec zone(double cx, double cy, double half_x, double half_y, std::size_t n_x,
                         std::size_t n_y);

    std::vector<std::string> validation_errors() const;
    void validate() const;

    bool operator==(const SimulationConfig&) const = default;
};

/// True if (x, y) lies in the closed rectangle of `g`.
bool in_closure(const GridSpec& g, double x, double y);

std::string to_string(GridMode m);
GridMode grid_mode_from_string(const std::string& s);

void to_json(nlohmann::json& j, const GridSpec& g);
void from_json(const nlohmann::json& j, GridSpec& g);
void to_json(nlohmann::json& j, const TimeGrid& t);
void from_json(const nlohmann::json& j, TimeGrid& t);
void to_json(nlohmann::json& j, const ParamBounds& b);
void from_json(const nlohmann::json& j, ParamBounds& b);
void to_json(nlohmann::json& j, const SimulationConfig& c);
void from_json(const nlohmann::json& j, SimulationConfig& c);

}  // namespace wz
