#include "wavezoom/fem.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wavezoom/errors.hpp"

namespace wz {

namespace {

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

Eigen::VectorXd frame_vector(const FieldSeries& f, std::size_t n) {
    return Eigen::Map<const Eigen::VectorXd>(f.frame(n), static_cast<Eigen::Index>(f.frame_size()));
}

}  // namespace

ElementMatrices element_matrices(double hx, double hy) {
    // Reference square [0,1]^2, nodes (0,0), (1,0), (1,1), (0,1).
    const double g = 0.5 / std::sqrt(3.0);
    const double pts[2] = {0.5 - g, 0.5 + g};
    const double sx[4] = {0, 1, 1, 0};
    const double sy[4] = {0, 0, 1, 1};
    ElementMatrices e;
    e.mass.setZero();
    e.stiffness.setZero();
    const double jac = hx * hy;
    for (double xi : pts) {
        for (double eta : pts) {
            double n[4], dnx[4], dny[4];
            for (int a = 0; a < 4; ++a) {
                const double fx = sx[a] == 0 ? 1 - xi : xi;
                const double fy = sy[a] == 0 ? 1 - eta : eta;
                const double dfx = sx[a] == 0 ? -1.0 : 1.0;
                const double dfy = sy[a] == 0 ? -1.0 : 1.0;
                n[a] = fx * fy;
                dnx[a] = dfx * fy / hx;
                dny[a] = fx * dfy / hy;
            }
            // Gauss weights are 1/2 each on [0,1], so 1/4 per point.
            const double w = 0.25 * jac;
            for (int a = 0; a < 4; ++a) {
                for (int b = 0; b < 4; ++b) {
                    e.mass(a, b) += w * n[a] * n[b];
                    e.stiffness(a, b) += w * (dnx[a] * dnx[b] + dny[a] * dny[b]);
                }
            }
        }
    }
    return e;
}

WaveOperators::WaveOperators(const Grid& grid, double wave_speed, double dt,
                             std::vector<std::size_t> dirichlet_nodes)
    : c_(wave_speed), dt_(dt), constrained_(std::move(dirichlet_nodes)) {
    if (!(wave_speed > 0.0) || !(dt > 0.0)) {
        throw ConfigError("wave speed and time step must be positive");
    }
    const auto n = static_cast<Eigen::Index>(grid.node_count());
    const ElementMatrices em = element_matrices(grid.spec.dx(), grid.spec.dy());
    std::vector<Eigen::Triplet<double>> tm, tk;
    tm.reserve(grid.elements.size() * 16);
    tk.reserve(grid.elements.size() * 16);
    for (const auto& el : grid.elements) {
        for (int a = 0; a < 4; ++a) {
            for (int b = 0; b < 4; ++b) {
                const auto r = static_cast<Eigen::Index>(el[a]);
                const auto c = static_cast<Eigen::Index>(el[b]);
                tm.emplace_back(r, c, em.mass(a, b));
                tk.emplace_back(r, c, em.stiffness(a, b));
            }
        }
    }
    mass_.resize(n, n);
    stiffness_.resize(n, n);
    mass_.setFromTriplets(tm.begin(), tm.end());
    stiffness_.setFromTriplets(tk.begin(), tk.end());
    system_ = mass_ + (c_ * c_ * dt_ * dt_) * stiffness_;

    std::vector<char> is_constrained(grid.node_count(), 0);
    for (std::size_t k : constrained_) {
        if (k >= grid.node_count()) throw ConfigError("Dirichlet node index out of range");
        if (is_constrained[k]) throw ConfigError("duplicate Dirichlet node");
        is_constrained[k] = 1;
    }
    std::vector<Eigen::Index> free_pos(grid.node_count(), -1), con_pos(grid.node_count(), -1);
    for (std::size_t k = 0; k < grid.node_count(); ++k) {
        if (!is_constrained[k]) {
            free_pos[k] = static_cast<Eigen::Index>(free_.size());
            free_.push_back(k);
        }
    }
    for (std::size_t q = 0; q < constrained_.size(); ++q)
        con_pos[constrained_[q]] = static_cast<Eigen::Index>(q);

    std::vector<Eigen::Triplet<double>> tff, tfc;
    for (Eigen::Index col = 0; col < system_.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(system_, col); it; ++it) {
            const auto r = static_cast<std::size_t>(it.row());
            const auto c = static_cast<std::size_t>(it.col());
            if (is_constrained[r]) continue;
            if (is_constrained[c])
                tfc.emplace_back(free_pos[r], con_pos[c], it.value());
            else
                tff.emplace_back(free_pos[r], free_pos[c], it.value());
        }
    }
    const auto nf = static_cast<Eigen::Index>(free_.size());
    system_ff_.resize(nf, nf);
    system_fc_.resize(nf, static_cast<Eigen::Index>(constrained_.size()));
    system_ff_.setFromTriplets(tff.begin(), tff.end());
    system_fc_.setFromTriplets(tfc.begin(), tfc.end());
    factor_ = std::make_unique<Eigen::SimplicialLLT<SparseMatrix>>();
    if (nf > 0) {
        factor_->compute(system_ff_);
        if (factor_->info() != Eigen::Success) {
            throw NumericalError("factorization of the wave system matrix failed");
        }
    }
}

Eigen::VectorXd WaveOperators::load(const Eigen::VectorXd& u1, const Eigen::VectorXd& u2,
                                    const Eigen::VectorXd& f) const {
    const double s = c_ * c_ * dt_ * dt_;
    return mass_ * (2.0 * u1 - u2 + s * f);
}

Eigen::VectorXd WaveOperators::step(const Eigen::VectorXd& u1, const Eigen::VectorXd& u2,
                                    const Eigen::VectorXd& f, const Eigen::VectorXd& bc) const {
    const auto n = static_cast<Eigen::Index>(node_count());
    if (u1.size() != n || u2.size() != n || f.size() != n ||
        bc.size() != static_cast<Eigen::Index>(constrained_.size())) {
        throw ShapeError("wave step: state or boundary vector has the wrong length");
    }
    if (!all_finite(u1) || !all_finite(u2) || !all_finite(f) || !all_finite(bc)) {
        throw NumericalError("wave step: non-finite input");
    }
    const Eigen::VectorXd rhs = load(u1, u2, f);
    Eigen::VectorXd rhs_f(static_cast<Eigen::Index>(free_.size()));
    for (std::size_t k = 0; k < free_.size(); ++k) rhs_f[static_cast<Eigen::Index>(k)] = rhs[static_cast<Eigen::Index>(free_[k])];
    if (bc.size() > 0) rhs_f -= system_fc_ * bc;

    Eigen::VectorXd un(n);
    if (!free_.empty()) {
        const Eigen::VectorXd uf = factor_->solve(rhs_f);
        if (!all_finite(uf)) throw NumericalError("wave step: non-finite solution");
        for (std::size_t k = 0; k < free_.size(); ++k) un[static_cast<Eigen::Index>(free_[k])] = uf[static_cast<Eigen::Index>(k)];
    }
    for (std::size_t q = 0; q < constrained_.size(); ++q) un[static_cast<Eigen::Index>(constrained_[q])] = bc[static_cast<Eigen::Index>(q)];
    return un;
}

double WaveOperators::residual(const Eigen::VectorXd& un, const Eigen::VectorXd& u1,
                               const Eigen::VectorXd& u2, const Eigen::VectorXd& f) const {
    // Free rows: S_ff u_f + S_fc u_c = b_f. The scale is the largest of the three terms.
    const Eigen::VectorXd rhs = load(u1, u2, f);
    const auto nf = static_cast<Eigen::Index>(free_.size());
    Eigen::VectorXd uf(nf), bf(nf), uc(static_cast<Eigen::Index>(constrained_.size()));
    for (Eigen::Index k = 0; k < nf; ++k) {
        uf[k] = un[static_cast<Eigen::Index>(free_[static_cast<std::size_t>(k)])];
        bf[k] = rhs[static_cast<Eigen::Index>(free_[static_cast<std::size_t>(k)])];
    }
    for (std::size_t q = 0; q < constrained_.size(); ++q)
        uc[static_cast<Eigen::Index>(q)] = un[static_cast<Eigen::Index>(constrained_[q])];
    const Eigen::VectorXd a = system_ff_ * uf;
    const Eigen::VectorXd c = uc.size() > 0 ? Eigen::VectorXd(system_fc_ * uc) : Eigen::VectorXd::Zero(nf);
    const double r = (a + c - bf).norm();
    const double scale = std::max({a.norm(), c.norm(), bf.norm()});
    return scale > 0.0 ? r / scale : r;
}

WaveOperators assemble(const Grid& grid, double wave_speed, double dt) {
    return WaveOperators(grid, wave_speed, dt, grid.boundary_nodes);
}

SourceTerm make_source(const GridSpec& grid, const ParamVector& p) {
    if (!std::isfinite(p.x_s) || !std::isfinite(p.y_s) || !std::isfinite(p.omega)) {
        throw ConfigError("source parameters must be finite");
    }
    const double fi = std::round((p.x_s - grid.x_min) / grid.dx());
    const double fj = std::round((p.y_s - grid.y_min) / grid.dy());
    if (fi < 0 || fj < 0 || fi > static_cast<double>(grid.n_x - 1) ||
        fj > static_cast<double>(grid.n_y - 1)) {
        throw DomainError("source lies outside the domain");
    }
    const auto i = static_cast<std::size_t>(fi);
    const auto j = static_cast<std::size_t>(fj);
    if (grid.on_boundary(i, j)) {
        throw DomainError("source snaps to a boundary node (" + std::to_string(i) + ", " +
                          std::to_string(j) + ")");
    }
    return {p.x_s, p.y_s, p.omega, grid.node(i, j)};
}

FullModel::FullModel(const GridSpec& grid, const TimeGrid& time, double wave_speed)
    : grid_(build_grid(grid)), time_(time), ops_(assemble(grid_, wave_speed, time.dt)) {
    time_.validate();
}

FieldSeries FullModel::solve(const ParamVector& p) const {
    const SourceTerm src = make_source(grid_.spec, p);
    const auto n = static_cast<Eigen::Index>(grid_.node_count());
    FieldSeries out(grid_.spec, time_.n_t);
    Eigen::VectorXd u2 = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd u1 = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
    const Eigen::VectorXd bc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid_.boundary_nodes.size()));
    for (std::size_t step = 1; step < time_.n_t; ++step) {
        f[static_cast<Eigen::Index>(src.node)] = std::sin(p.omega * time_.t(step));
        Eigen::VectorXd un = ops_.step(u1, u2, f, bc);
        std::copy(un.data(), un.data() + n, out.frame(step));
        u2 = std::move(u1);
        u1 = std::move(un);
    }
    return out;
}

FieldSeries solve_full(const ParamVector& p, const GridSpec& grid, const TimeGrid& time,
                       double wave_speed) {
    return FullModel(grid, time, wave_speed).solve(p);
}

namespace {

std::vector<std::size_t> boundary_node_ids(const GridSpec& g, const BoundaryIndex& b) {
    std::vector<std::size_t> ids;
    ids.reserve(b.size());
    for (const auto& n : b.nodes) ids.push_back(g.node(n[0], n[1]));
    return ids;
}

}  // namespace

Submodel::Submodel(const GridSpec& sub, const TimeGrid& time, double wave_speed)
    : grid_(build_grid(sub)),
      time_(time),
      boundary_(boundary_index(sub)),
      ops_(grid_, wave_speed, time.dt, boundary_node_ids(sub, boundary_)) {
    time_.validate();
}

FieldSeries Submodel::solve(const BoundaryTrace& trace) const {
    if (trace.n_t != time_.n_t || trace.n_b != boundary_.size() ||
        trace.values.size() != trace.n_t * trace.n_b) {
        throw ShapeError("boundary trace is " + std::to_string(trace.n_t) + "x" +
                         std::to_string(trace.n_b) + ", submodel expects " +
                         std::to_string(time_.n_t) + "x" + std::to_string(boundary_.size()));
    }
    const auto n = static_cast<Eigen::Index>(grid_.node_count());
    const auto nb = static_cast<Eigen::Index>(trace.n_b);
    FieldSeries out(grid_.spec, time_.n_t);
    const auto& ids = ops_.dirichlet_nodes();
    Eigen::VectorXd u1 = Eigen::VectorXd::Zero(n);
    for (std::size_t b = 0; b < ids.size(); ++b) u1[static_cast<Eigen::Index>(ids[b])] = trace.at(0, b);
    std::copy(u1.data(), u1.data() + n, out.frame(0));
    Eigen::VectorXd u2 = u1;
    const Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
    for (std::size_t step = 1; step < time_.n_t; ++step) {
        const Eigen::VectorXd bc = Eigen::Map<const Eigen::VectorXd>(&trace.values[step * trace.n_b], nb);
        Eigen::VectorXd un = ops_.step(u1, u2, f, bc);
        std::copy(un.data(), un.data() + n, out.frame(step));
        u2 = std::move(u1);
        u1 = std::move(un);
    }
    return out;
}

double Submodel::max_residual(const FieldSeries& field) const {
    if (field.grid != grid_.spec || field.n_t != time_.n_t) {
        throw ShapeError("field does not live on the submodel grid");
    }
    const auto n = static_cast<Eigen::Index>(grid_.node_count());
    const Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
    double worst = 0.0;
    for (std::size_t step = 1; step < field.n_t; ++step) {
        const Eigen::VectorXd un = frame_vector(field, step);
        const Eigen::VectorXd u1 = frame_vector(field, step - 1);
        const Eigen::VectorXd u2 = step >= 2 ? frame_vector(field, step - 2) : u1;
        worst = std::max(worst, ops_.residual(un, u1, u2, f));
    }
    return worst;
}

FieldSeries solve_submodel(const BoundaryTrace& trace, const GridSpec& sub, const TimeGrid& time,
                           double wave_speed) {
    return Submodel(sub, time, wave_speed).solve(trace);
}

}  // namespace wz
