#include "wavezoom/pod.hpp"

#include <cmath>
#include <vector>

#include "wavezoom/errors.hpp"

namespace wz {

namespace {

double inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& w) {
    return w.size() == 0 ? a.dot(b) : (a.array() * w.array() * b.array()).sum();
}

void check_weights(const Eigen::MatrixXd& snapshots, const Eigen::VectorXd& weights) {
    if (weights.size() != 0 && weights.size() != snapshots.cols()) {
        throw ShapeError("POD weights do not match the snapshot length");
    }
    if (weights.size() != 0 && (weights.array() <= 0.0).any()) {
        throw ConfigError("POD weights must be positive");
    }
}

// Descending eigenpairs of a symmetric matrix with numerically zero ones dropped.
void sorted_eigen(const Eigen::MatrixXd& sym, Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.info() != Eigen::Success) throw NumericalError("POD eigen-decomposition failed");
    const Eigen::Index n = sym.rows();
    const double top = n > 0 ? es.eigenvalues()[n - 1] : 0.0;
    Eigen::Index keep = 0;
    while (keep < n && top > 0.0 && es.eigenvalues()[n - 1 - keep] > kPodZeroEigenvalue * top) ++keep;
    values.resize(keep);
    vectors.resize(n, keep);
    for (Eigen::Index k = 0; k < keep; ++k) {
        values[k] = es.eigenvalues()[n - 1 - k];
        vectors.col(k) = es.eigenvectors().col(n - 1 - k);
    }
}

Eigen::Index truncation_rank(const Eigen::VectorXd& lambda, double energy_tol) {
    const double total = lambda.sum();
    double acc = 0.0;
    for (Eigen::Index k = 0; k < lambda.size(); ++k) {
        acc += lambda[k];
        if (acc >= (1.0 - energy_tol) * total) return k + 1;
    }
    return lambda.size();
}

// Modes from orthonormal eigenvectors A of C, then two Gram-Schmidt sweeps to
// restore orthonormality lost to round-off for the small eigenvalues.
PodBasis modes_from_eigenvectors(const Eigen::MatrixXd& snapshots, const Eigen::VectorXd& lambda,
                                 const Eigen::MatrixXd& a, double energy_tol,
                                 const Eigen::VectorXd& weights) {
    PodBasis basis;
    basis.weights = weights;
    basis.eigenvalues = lambda;
    if (lambda.size() == 0) {
        basis.modes.resize(0, snapshots.cols());
        basis.note = "snapshot set is identically zero; basis is empty";
        return basis;
    }
    const Eigen::Index rank = truncation_rank(lambda, energy_tol);
    basis.modes.resize(rank, snapshots.cols());
    for (Eigen::Index j = 0; j < rank; ++j) {
        Eigen::VectorXd phi = snapshots.transpose() * a.col(j) / std::sqrt(lambda[j]);
        for (int sweep = 0; sweep < 2; ++sweep) {
            for (Eigen::Index k = 0; k < j; ++k) {
                const Eigen::VectorXd prev = basis.modes.row(k).transpose();
                phi -= inner(prev, phi, weights) * prev;
            }
            phi /= std::sqrt(inner(phi, phi, weights));
        }
        basis.modes.row(j) = phi.transpose();
    }
    return basis;
}

}  // namespace

Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& snapshots, const Eigen::VectorXd& weights) {
    check_weights(snapshots, weights);
    if (weights.size() == 0) {
        Eigen::MatrixXd c = Eigen::MatrixXd::Zero(snapshots.rows(), snapshots.rows());
        c.selfadjointView<Eigen::Lower>().rankUpdate(snapshots);
        return c.selfadjointView<Eigen::Lower>();
    }
    const Eigen::MatrixXd y = snapshots * weights.cwiseSqrt().asDiagonal();
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(snapshots.rows(), snapshots.rows());
    c.selfadjointView<Eigen::Lower>().rankUpdate(y);
    return c.selfadjointView<Eigen::Lower>();
}

PodBasis pod_modes(const Eigen::MatrixXd& correlation, const Eigen::MatrixXd& snapshots,
                   double energy_tol, const Eigen::VectorXd& weights) {
    check_weights(snapshots, weights);
    if (correlation.rows() != snapshots.rows() || correlation.cols() != snapshots.rows()) {
        throw ShapeError("correlation matrix does not match the snapshot count");
    }
    if (!(energy_tol >= 0.0 && energy_tol < 1.0)) throw ConfigError("energy_tol must be in [0, 1)");
    Eigen::VectorXd lambda;
    Eigen::MatrixXd a;
    sorted_eigen(correlation, lambda, a);
    return modes_from_eigenvectors(snapshots, lambda, a, energy_tol, weights);
}

PodBasis build_pod(const Eigen::MatrixXd& snapshots, double energy_tol, const Eigen::VectorXd& weights) {
    if (snapshots.rows() <= snapshots.cols()) {
        return pod_modes(correlation_matrix(snapshots, weights), snapshots, energy_tol, weights);
    }
    check_weights(snapshots, weights);
    if (!(energy_tol >= 0.0 && energy_tol < 1.0)) throw ConfigError("energy_tol must be in [0, 1)");
    // C = Y Y^T and G = Y^T Y share their nonzero spectrum; A_j = Y v_j / sqrt(lambda_j).
    const Eigen::MatrixXd y =
        weights.size() == 0 ? snapshots : Eigen::MatrixXd(snapshots * weights.cwiseSqrt().asDiagonal());
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(y.cols(), y.cols());
    g.selfadjointView<Eigen::Lower>().rankUpdate(y.transpose());
    Eigen::VectorXd lambda;
    Eigen::MatrixXd v;
    sorted_eigen(g.selfadjointView<Eigen::Lower>(), lambda, v);
    Eigen::MatrixXd a = y * v;
    for (Eigen::Index j = 0; j < a.cols(); ++j) a.col(j) /= std::sqrt(lambda[j]);
    return modes_from_eigenvectors(snapshots, lambda, a, energy_tol, weights);
}

Eigen::VectorXd project(const Eigen::VectorXd& field, const PodBasis& basis) {
    if (static_cast<std::size_t>(field.size()) != basis.dof()) throw ShapeError("field length does not match the POD basis");
    if (basis.weights.size() == 0) return basis.modes * field;
    return basis.modes * basis.weights.cwiseProduct(field);
}

Eigen::VectorXd reconstruct(const Eigen::VectorXd& coords, const PodBasis& basis) {
    if (static_cast<std::size_t>(coords.size()) != basis.rank()) throw ShapeError("coordinate count does not match the POD rank");
    return basis.modes.transpose() * coords;
}

}  // namespace wz
