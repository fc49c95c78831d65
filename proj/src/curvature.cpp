#include "cuspflow/curvature.hpp"

#include <numbers>
#include <stdexcept>

namespace cuspflow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_metric_size(const Complex& c, const Metric& l, const char* where) {
    if (l.size() != c.edge_count)
        throw std::invalid_argument(std::string(where) + ": metric has length " +
                                    std::to_string(l.size()) + ", expected " +
                                    std::to_string(c.edge_count));
}

}  // namespace

Vector6d restrict_metric(const Complex& c, int t, const Metric& l) {
    Vector6d out;
    for (int e = 0; e < 6; ++e) out[e] = l[c.edge_class[t * 6 + e]];
    return out;
}

bool in_decorated_domain(const Complex& c, const Metric& l) {
    check_metric_size(c, l, "in_decorated_domain");
    for (int t = 0; t < c.tet_count; ++t)
        if (!is_decorated(restrict_metric(c, t, l))) return false;
    return true;
}

std::vector<Eigen::Vector3d> angle_assignment(const Complex& c, const Metric& l) {
    check_metric_size(c, l, "angle_assignment");
    std::vector<Eigen::Vector3d> out(c.tet_count);
    for (int t = 0; t < c.tet_count; ++t) out[t] = quad_angles(restrict_metric(c, t, l));
    return out;
}

Curvature ricci_curvature(const Complex& c, const Metric& l) {
    check_metric_size(c, l, "ricci_curvature");
    Eigen::VectorXd cone = Eigen::VectorXd::Zero(c.edge_count);
    for (int t = 0; t < c.tet_count; ++t) {
        Eigen::Vector3d a = quad_angles(restrict_metric(c, t, l));
        for (int e = 0; e < 6; ++e) cone[c.edge_class[t * 6 + e]] += a[quad_of_edge[e]];
    }
    Curvature out;
    out.cone_angle = cone;
    out.K = kTwoPi - cone.array();
    return out;
}

double total_volume(const Complex& c, const Metric& l) {
    check_metric_size(c, l, "total_volume");
    double v = 0.0;
    for (int t = 0; t < c.tet_count; ++t) v += tetra_volume(restrict_metric(c, t, l));
    return v;
}

double total_covolume(const Complex& c, const Metric& l) {
    check_metric_size(c, l, "total_covolume");
    double v = 0.0;
    for (int t = 0; t < c.tet_count; ++t) v += tetra_covolume(restrict_metric(c, t, l));
    return v;
}

double energy(const Complex& c, const Metric& l) {
    return total_covolume(c, l) - kTwoPi * l.sum();
}

double f_functional(const Complex& c, const Metric& l0, const Metric& l) {
    check_metric_size(c, l0, "f_functional");
    return total_covolume(c, l) - ricci_curvature(c, l0).cone_angle.dot(l);
}

Eigen::MatrixXd cov_hessian(const Complex& c, const Metric& l) {
    check_metric_size(c, l, "cov_hessian");
    if (!in_decorated_domain(c, l))
        throw std::domain_error("cov_hessian: metric not in the decorated domain");
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(c.edge_count, c.edge_count);
    for (int t = 0; t < c.tet_count; ++t) {
        Matrix6d jac = tetra_angle_jacobian(restrict_metric(c, t, l));
        for (int e = 0; e < 6; ++e)
            for (int f = 0; f < 6; ++f)
                h(c.edge_class[t * 6 + e], c.edge_class[t * 6 + f]) += jac(e, f);
    }
    return h;
}

Eigen::MatrixXd curvature_jacobian(const Complex& c, const Metric& l) {
    return -cov_hessian(c, l);
}

Metric act(const Complex& c, const Eigen::VectorXd& w, const Metric& l) {
    check_metric_size(c, l, "act");
    if (w.size() != c.vertex_count)
        throw std::invalid_argument("act: action vector has length " + std::to_string(w.size()) +
                                    ", expected " + std::to_string(c.vertex_count));
    Metric out = l;
    for (int e = 0; e < c.edge_count; ++e)
        out[e] += w[c.edge_endpoints[e][0]] + w[c.edge_endpoints[e][1]];
    return out;
}

Eigen::MatrixXd quotient_basis(const Complex& c) {
    Eigen::MatrixXd b = incidence_matrix(c);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeFullU);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv[i] > 1e-10 * sv[0]) ++rank;
    return svd.matrixU().rightCols(c.edge_count - rank);
}

Metric project_quotient(const Complex& c, const Metric& l) {
    check_metric_size(c, l, "project_quotient");
    Eigen::MatrixXd q = quotient_basis(c);
    return q * (q.transpose() * l);
}

}  // namespace cuspflow
