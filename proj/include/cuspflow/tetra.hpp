#pragma once

#include <Eigen/Dense>

// Per-tetrahedron geometry of decorated ideal tetrahedra.
//
// A (generalized) decorated ideal tetrahedron is described by six signed
// edge lengths l_ij, one per vertex pair, stored in the fixed order
//   {12, 13, 14, 23, 24, 34}  ->  indices 0..5.
// Opposite edges form the three quads (12|34), (13|24), (14|23); each quad
// carries one dihedral angle value. Every l in R^6 is admissible: outside
// the decorated domain the angles degenerate to the (pi, 0, 0) pattern and
// the volume vanishes.

namespace cuspflow {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

/// Local edge index of the vertex pair {i,j}, 0 <= i < j <= 3.
int edge_index(int i, int j);

/// Vertex pair of a local edge index.
std::pair<int, int> edge_vertices(int e);

/// Quad (0..2) containing a local edge.
inline constexpr int quad_of_edge[6] = {0, 1, 2, 2, 1, 0};

/// The two opposite local edges of each quad.
inline constexpr int quad_edges[3][2] = {{0, 5}, {1, 4}, {2, 3}};

/// Inner angles of the generalized Euclidean triangle with side lengths
/// (x1, x2, x3), angle a_i opposite x_i. If the strict triangle
/// inequalities hold this is the law of cosines with the acos argument
/// clamped to [-1, 1]; if x_i >= x_j + x_k (ties included) the angles
/// degenerate to a_i = pi, a_j = a_k = 0. Throws std::invalid_argument
/// unless all sides are positive.
Eigen::Vector3d triangle_angles(double x1, double x2, double x3);

/// Side lengths exp((l_ij + l_kh)/2) of the cross-section triangle, one
/// value per quad. Overflows to +inf for |l| beyond ~1400; angle routines
/// below normalize in log scale instead of calling this.
Eigen::Vector3d quad_lengths(const Vector6d& l);

/// One extended dihedral angle per quad. Scale-normalized internally, so
/// it is total on R^6 regardless of the magnitude of l.
Eigen::Vector3d quad_angles(const Vector6d& l);

/// Extended dihedral angles per local edge (opposite edges share a value).
Vector6d dihedral_angles(const Vector6d& l);

/// Lobachevsky function, the odd pi-periodic primitive with
/// Lambda'(t) = -ln|2 sin t|, equal to (1/2) sum_{n>=1} sin(2nt)/n^2.
/// Absolute error below 1e-13.
double lobachevsky(double theta);

/// Hyperbolic volume of the underlying ideal tetrahedron: sum of
/// Lambda over the three quad angles. Zero outside the decorated domain.
double tetra_volume(const Vector6d& l);

/// Co-volume 2 vol(l) + sum_ij alpha_ij l_ij. C^1 and convex on R^6.
double tetra_covolume(const Vector6d& l);

/// Gradient of the co-volume, which is exactly the dihedral angle vector.
Vector6d tetra_cov_gradient(const Vector6d& l);

/// Jacobian d alpha_ij / d l_kh, i.e. the co-volume Hessian. Symmetric
/// positive semidefinite of rank 2; its kernel is the 4-dimensional space
/// {(w_i + w_j)_ij : w in R^4}. Defined only strictly inside the decorated
/// domain; throws std::domain_error otherwise.
Matrix6d tetra_angle_jacobian(const Vector6d& l);

/// True iff the three quad lengths satisfy all *strict* triangle
/// inequalities, i.e. l describes a genuine decorated ideal tetrahedron.
bool is_decorated(const Vector6d& l);

}  // namespace cuspflow
