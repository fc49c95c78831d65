#include "cuspflow/tetra.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cuspflow {

namespace {

constexpr double kPi = std::numbers::pi;

// zeta(2n) for n = 1..25, used by the accelerated Lobachevsky series.
const std::array<double, 26>& zeta_even() {
    static const std::array<double, 26> table = [] {
        std::array<double, 26> z{};
        z[1] = kPi * kPi / 6.0;
        z[2] = std::pow(kPi, 4) / 90.0;
        z[3] = std::pow(kPi, 6) / 945.0;
        for (int n = 4; n <= 25; ++n) {
            double s = 0.0;
            for (int k = 400; k >= 1; --k) s += std::pow(double(k), -2.0 * n);
            z[n] = s;
        }
        return z;
    }();
    return table;
}

Eigen::Vector3d angles_from_sides(double x1, double x2, double x3) {
    if (x1 >= x2 + x3) return {kPi, 0.0, 0.0};
    if (x2 >= x1 + x3) return {0.0, kPi, 0.0};
    if (x3 >= x1 + x2) return {0.0, 0.0, kPi};
    auto corner = [](double a, double b, double c) {
        double u = (b * b + c * c - a * a) / (2.0 * b * c);
        return std::acos(std::clamp(u, -1.0, 1.0));
    };
    return {corner(x1, x2, x3), corner(x2, x1, x3), corner(x3, x1, x2)};
}

// Quad side lengths rescaled so the largest is 1. Angles are invariant
// under common rescaling, and this keeps exp() in range for any l.
Eigen::Vector3d normalized_quad_lengths(const Vector6d& l) {
    Eigen::Vector3d s;
    for (int q = 0; q < 3; ++q)
        s[q] = 0.5 * (l[quad_edges[q][0]] + l[quad_edges[q][1]]);
    double top = s.maxCoeff();
    return (s.array() - top).exp();
}

}  // namespace

int edge_index(int i, int j) {
    if (i > j) std::swap(i, j);
    static constexpr int table[4][4] = {{-1, 0, 1, 2}, {0, -1, 3, 4}, {1, 3, -1, 5}, {2, 4, 5, -1}};
    if (i < 0 || j > 3 || i == j) throw std::invalid_argument("edge_index: bad vertex pair");
    return table[i][j];
}

std::pair<int, int> edge_vertices(int e) {
    static constexpr std::pair<int, int> table[6] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    if (e < 0 || e > 5) throw std::invalid_argument("edge_vertices: bad edge index");
    return table[e];
}

Eigen::Vector3d triangle_angles(double x1, double x2, double x3) {
    if (!(x1 > 0.0) || !(x2 > 0.0) || !(x3 > 0.0))
        throw std::invalid_argument("triangle_angles: side lengths must be positive");
    return angles_from_sides(x1, x2, x3);
}

Eigen::Vector3d quad_lengths(const Vector6d& l) {
    Eigen::Vector3d x;
    for (int q = 0; q < 3; ++q)
        x[q] = std::exp(0.5 * (l[quad_edges[q][0]] + l[quad_edges[q][1]]));
    return x;
}

Eigen::Vector3d quad_angles(const Vector6d& l) {
    Eigen::Vector3d x = normalized_quad_lengths(l);
    return angles_from_sides(x[0], x[1], x[2]);
}

Vector6d dihedral_angles(const Vector6d& l) {
    Eigen::Vector3d a = quad_angles(l);
    Vector6d alpha;
    for (int e = 0; e < 6; ++e) alpha[e] = a[quad_of_edge[e]];
    return alpha;
}

double lobachevsky(double theta) {
    // Reduce mod pi into [-pi/2, pi/2]; Lambda is odd and pi-periodic.
    double r = std::remainder(theta, kPi);
    if (r == 0.0) return 0.0;
    // Lambda(r) = r - r ln|2r| + sum_n zeta(2n)/(n(2n+1)) r (r/pi)^{2n},
    // the integrated form of ln(2 sin t) = ln(2t) + ln(sin t / t).
    const auto& z = zeta_even();
    double sum = r - r * std::log(std::abs(2.0 * r));
    const double q = (r / kPi) * (r / kPi);
    double pw = r;
    for (int n = 1; n <= 25; ++n) {
        pw *= q;
        sum += z[n] * pw / (n * (2 * n + 1));
    }
    return sum;
}

double tetra_volume(const Vector6d& l) {
    Eigen::Vector3d a = quad_angles(l);
    double v = lobachevsky(a[0]) + lobachevsky(a[1]) + lobachevsky(a[2]);
    return std::max(v, 0.0);
}

double tetra_covolume(const Vector6d& l) {
    return 2.0 * tetra_volume(l) + dihedral_angles(l).dot(l);
}

Vector6d tetra_cov_gradient(const Vector6d& l) { return dihedral_angles(l); }

Matrix6d tetra_angle_jacobian(const Vector6d& l) {
    if (!is_decorated(l))
        throw std::domain_error("tetra_angle_jacobian: metric not strictly inside the decorated domain");
    Eigen::Vector3d a = quad_angles(l);
    Eigen::Vector3d cot = a.array().cos() / a.array().sin();
    // d a_q / d(ln x_p) is the one-triangle cotangent stiffness matrix;
    // d x_p / d l_e = x_p / 2 for e in quad p turns it into d alpha / d l.
    Eigen::Matrix3d m;
    m << cot[1] + cot[2], -cot[2], -cot[1],
         -cot[2], cot[0] + cot[2], -cot[0],
         -cot[1], -cot[0], cot[0] + cot[1];
    m *= 0.5;
    Matrix6d jac;
    for (int e = 0; e < 6; ++e)
        for (int f = 0; f < 6; ++f) jac(e, f) = m(quad_of_edge[e], quad_of_edge[f]);
    return jac;
}

bool is_decorated(const Vector6d& l) {
    Eigen::Vector3d x = normalized_quad_lengths(l);
    return x[0] < x[1] + x[2] && x[1] < x[0] + x[2] && x[2] < x[0] + x[1];
}

}  // namespace cuspflow
