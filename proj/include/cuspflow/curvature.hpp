#pragma once

#include <vector>

#include <Eigen/Dense>

#include "cuspflow/complex.hpp"
#include "cuspflow/tetra.hpp"

// Global quantities of a generalized decorated metric on a Complex: cone
// angles, Ricci curvature, volume, co-volume, the energies driving the
// flows, the curvature Jacobian, and the R^V gauge action.

namespace cuspflow {

/// Edge-length vector indexed by edge class.
using Metric = Eigen::VectorXd;

/// Generalized Ricci curvature K_e = 2 pi - k(e), with the cone angles k
/// kept alongside for direct inspection. sum(K) = 2 pi (m - tet_count)
/// for every metric.
struct Curvature {
    Eigen::VectorXd K;
    Eigen::VectorXd cone_angle;
};

/// Restriction of a metric to the six local edges of tetrahedron t.
Vector6d restrict_metric(const Complex& c, int t, const Metric& l);

/// True iff every tetrahedron's restriction is a genuine decorated
/// tetrahedron (the metric lies in the open domain L).
bool in_decorated_domain(const Complex& c, const Metric& l);

/// Extended dihedral angles, one per quad of each tetrahedron.
std::vector<Eigen::Vector3d> angle_assignment(const Complex& c, const Metric& l);

Curvature ricci_curvature(const Complex& c, const Metric& l);

double total_volume(const Complex& c, const Metric& l);
double total_covolume(const Complex& c, const Metric& l);

/// Energy H(l) = cov(l) - 2 pi sum_e l_e; its gradient is -K.
double energy(const Complex& c, const Metric& l);

/// F_{l0}(l) = cov(l) - k_{l0} . l; invariant under the R^V action.
double f_functional(const Complex& c, const Metric& l0, const Metric& l);

/// Co-volume Hessian d k / d l assembled from the per-tetrahedron angle
/// Jacobians; symmetric positive semidefinite with kernel col(B).
/// Requires l in the decorated domain; throws std::domain_error otherwise.
Eigen::MatrixXd cov_hessian(const Complex& c, const Metric& l);

/// d K / d l = -cov_hessian: symmetric negative semidefinite.
Eigen::MatrixXd curvature_jacobian(const Complex& c, const Metric& l);

/// Gauge action: l + B w, shifting each edge by the decorations at its
/// endpoints (twice on a loop). Curvature is invariant under it.
Metric act(const Complex& c, const Eigen::VectorXd& w, const Metric& l);

/// Orthonormal basis of the orthogonal complement of col(B), the quotient
/// in which the variational problem is nondegenerate. Rank decisions use
/// the tolerance 1e-10 * sigma_max.
Eigen::MatrixXd quotient_basis(const Complex& c);

/// Orthogonal projection onto the complement of col(B).
Metric project_quotient(const Complex& c, const Metric& l);

}  // namespace cuspflow
