#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <memory>
#include <vector>

#include "wavezoom/grid.hpp"
#include "wavezoom/params.hpp"

namespace wz {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Mass and stiffness operators of the implicit scheme
///   (M + c^2 dt^2 K) u^n = M (2 u^{n-1} - u^{n-2} + c^2 dt^2 f^n)
/// with the constrained nodes eliminated and the free block factored once.
class WaveOperators {
public:
    WaveOperators(const Grid& grid, double wave_speed, double dt,
                  std::vector<std::size_t> dirichlet_nodes);

    const SparseMatrix& mass() const { return mass_; }
    const SparseMatrix& stiffness() const { return stiffness_; }
    const SparseMatrix& system() const { return system_; }
    const std::vector<std::size_t>& dirichlet_nodes() const { return constrained_; }
    std::size_t node_count() const { return static_cast<std::size_t>(mass_.rows()); }
    double wave_speed() const { return c_; }
    double dt() const { return dt_; }

    /// Advances one step. `bc` lists the values of dirichlet_nodes() in order.
    Eigen::VectorXd step(const Eigen::VectorXd& u1, const Eigen::VectorXd& u2,
                         const Eigen::VectorXd& f, const Eigen::VectorXd& bc) const;

    /// Relative residual of the free rows for a computed state u^n.
    double residual(const Eigen::VectorXd& un, const Eigen::VectorXd& u1, const Eigen::VectorXd& u2,
                    const Eigen::VectorXd& f) const;

private:
    Eigen::VectorXd load(const Eigen::VectorXd& u1, const Eigen::VectorXd& u2,
                         const Eigen::VectorXd& f) const;

    double c_;
    double dt_;
    SparseMatrix mass_;
    SparseMatrix stiffness_;
    SparseMatrix system_;
    std::vector<std::size_t> constrained_;
    std::vector<std::size_t> free_;
    SparseMatrix system_ff_;
    SparseMatrix system_fc_;
    std::unique_ptr<Eigen::SimplicialLLT<SparseMatrix>> factor_;
};

/// Element matrices of one hx-by-hy bilinear quadrilateral (2x2 Gauss).
struct ElementMatrices {
    Eigen::Matrix4d mass;
    Eigen::Matrix4d stiffness;
};
ElementMatrices element_matrices(double hx, double hy);

/// Operators with homogeneous Dirichlet data on the whole outer boundary.
WaveOperators assemble(const Grid& grid, double wave_speed, double dt);

struct SourceTerm {
    double x_s = 0.0;
    double y_s = 0.0;
    double omega = 0.0;
    std::size_t node = 0;
};

/// Snaps the point source to its nearest node; rejects sources on the boundary.
SourceTerm make_source(const GridSpec& grid, const ParamVector& p);

/// Full model on Omega: zero initial state, zero Dirichlet data, point source sin(omega t).
FieldSeries solve_full(const ParamVector& p, const GridSpec& grid, const TimeGrid& time,
                       double wave_speed);

/// Reusable full-model solver; the factorization is shared across parameter vectors.
class FullModel {
public:
    FullModel(const GridSpec& grid, const TimeGrid& time, double wave_speed);
    FieldSeries solve(const ParamVector& p) const;
    const WaveOperators& operators() const { return ops_; }

private:
    Grid grid_;
    TimeGrid time_;
    WaveOperators ops_;
};

/// Submodel on Omega' driven by time-varying Dirichlet data on its boundary.
class Submodel {
public:
    Submodel(const GridSpec& sub, const TimeGrid& time, double wave_speed);
    FieldSeries solve(const BoundaryTrace& trace) const;
    /// Largest per-step relative residual of the discrete submodel equations.
    double max_residual(const FieldSeries& field) const;
    const WaveOperators& operators() const { return ops_; }
    const BoundaryIndex& boundary() const { return boundary_; }
    const GridSpec& grid() const { return grid_.spec; }

private:
    Grid grid_;
    TimeGrid time_;
    BoundaryIndex boundary_;
    WaveOperators ops_;
};

FieldSeries solve_submodel(const BoundaryTrace& trace, const GridSpec& sub, const TimeGrid& time,
                           double wave_speed);

}  // namespace wz
