#pragma once

#include <filesystem>
#include <vector>

#include "wavezoom/forest.hpp"
#include "wavezoom/grid.hpp"
#include "wavezoom/params.hpp"
#include "wavezoom/pod.hpp"

namespace wz {

struct PodRfParams {
    double energy_tol = 1e-3;
    bool mass_weighted = false;
    ForestParams forest;
};

/// Global POD over every training (p, t) frame on Omega', with one random
/// forest per generalized coordinate taking (p, t) as input.
class PodRfModel {
public:
    PodRfModel() = default;

    static PodRfModel fit(const std::vector<ParamVector>& params,
                          const std::vector<FieldSeries>& fields, const ParamBounds& bounds,
                          const TimeGrid& time, const PodRfParams& hyper, std::size_t jobs = 1);

    bool trained() const { return basis_.dof() > 0; }
    const PodBasis& basis() const { return basis_; }
    const std::vector<Forest>& forests() const { return forests_; }
    const GridSpec& grid() const { return grid_; }

    /// Forest input row: normalized parameters and time mapped to [-1, 1].
    std::vector<double> features(const ParamVector& p, std::size_t step) const;
    Eigen::VectorXd predict_coords(const ParamVector& p, std::size_t step) const;
    FieldSeries predict(const ParamVector& p) const;

    void save(const std::filesystem::path& dir) const;
    static PodRfModel load(const std::filesystem::path& dir);

private:
    PodBasis basis_;
    std::vector<Forest> forests_;
    GridSpec grid_;
    TimeGrid time_;
    ParamBounds bounds_;
    PodRfParams hyper_;
};

/// Lumped (row-sum) mass of each node, used for the mass-weighted inner product.
Eigen::VectorXd lumped_mass(const GridSpec& grid);

}  // namespace wz
