#pragma once

#include <Eigen/Dense>
#include <string>

namespace wz {

/// Truncated snapshot POD basis. Modes are stored as rows.
struct PodBasis {
    Eigen::MatrixXd modes;        // [m_hat, n_dof], orthonormal under the inner product
    Eigen::VectorXd eigenvalues;  // descending, numerically nonzero ones only
    Eigen::VectorXd weights;      // empty for the Euclidean inner product
    std::string note;             // set when the snapshot set is degenerate

    std::size_t rank() const { return static_cast<std::size_t>(modes.rows()); }
    std::size_t dof() const { return static_cast<std::size_t>(modes.cols()); }
};

/// Eigenvalues at or below this fraction of the largest are treated as zero.
inline constexpr double kPodZeroEigenvalue = 1e-12;

/// C_ij = (U_i, U_j) for snapshot rows U_i; `weights` diagonal, empty = identity.
Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& snapshots,
                                   const Eigen::VectorXd& weights = {});

/// Method of snapshots: eigen-decomposition of C and modes
///   Phi_j = lambda_j^{-1/2} sum_i A_ij U_i,
/// truncated at the smallest rank holding (1 - energy_tol) of the energy.
PodBasis pod_modes(const Eigen::MatrixXd& correlation, const Eigen::MatrixXd& snapshots,
                   double energy_tol, const Eigen::VectorXd& weights = {});

/// Same basis as pod_modes(correlation_matrix(S), S, ...). When there are more
/// snapshots than degrees of freedom the eigenvectors of C are recovered from
/// the smaller dof-by-dof Gram matrix instead of forming C.
PodBasis build_pod(const Eigen::MatrixXd& snapshots, double energy_tol,
                   const Eigen::VectorXd& weights = {});

Eigen::VectorXd project(const Eigen::VectorXd& field, const PodBasis& basis);
Eigen::VectorXd reconstruct(const Eigen::VectorXd& coords, const PodBasis& basis);

}  // namespace wz
