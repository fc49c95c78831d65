#include "cuspflow/solver.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cuspflow {

namespace {

constexpr double kArmijoC1 = 1e-4;
constexpr double kMinStep = 1e-14;

}  // namespace

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Found: return "Found";
        case SolveStatus::NoMinimizer: return "NoMinimizer";
        case SolveStatus::MaxIter: return "MaxIter";
    }
    return "?";
}

SolveResult minimize_energy(const Complex& c, const Metric& l0, const SolveOptions& opts) {
    if (l0.size() != c.edge_count)
        throw std::invalid_argument("minimize_energy: initial metric has length " +
                                    std::to_string(l0.size()) + ", expected " +
                                    std::to_string(c.edge_count));
    if (!(opts.tol > 0)) throw std::invalid_argument("minimize_energy: tol must be positive");
    Eigen::VectorXd kbar = Eigen::VectorXd::Zero(c.edge_count);
    if (opts.target) {
        if (opts.target->size() != c.edge_count)
            throw std::invalid_argument("minimize_energy: target curvature has wrong length");
        kbar = *opts.target;
    }
    // Objective F(l) = cov(l) - k_target . l with k_target = 2 pi - Kbar;
    // grad F = -(K - Kbar). Zero curvature problem: F = H.
    const Eigen::VectorXd k_target =
        Eigen::VectorXd::Constant(c.edge_count, 2.0 * std::numbers::pi) - kbar;
    auto objective = [&](const Metric& l) { return total_covolume(c, l) - k_target.dot(l); };

    const Eigen::MatrixXd q = quotient_basis(c);
    SolveResult out;
    Metric l = project_quotient(c, l0);
    double floor = std::numeric_limits<double>::infinity();

    for (int it = 0;; ++it) {
        Eigen::VectorXd res = ricci_curvature(c, l).K - kbar;
        double res_norm = res.lpNorm<Eigen::Infinity>();
        floor = std::min(floor, res_norm);
        out.evidence.iterate_norms.push_back(l.lpNorm<Eigen::Infinity>());
        out.evidence.energies.push_back(objective(l));
        out.iterations = it;
        out.l_star = l;
        out.grad_norm = res_norm;

        if (res_norm < opts.tol) {
            out.status = SolveStatus::Found;
            break;
        }
        if (it >= opts.max_iter) {
            out.status = SolveStatus::MaxIter;
            break;
        }
        Eigen::VectorXd g = q.transpose() * res;  // quotient gradient of -F
        if (g.lpNorm<Eigen::Infinity>() < 1e-11 * (1.0 + res_norm)) {
            out.status = SolveStatus::NoMinimizer;
            out.evidence.reason = "quotient-stationary point with nonzero curvature residual";
            out.evidence.gradient_floor = floor;
            break;
        }
        if (out.evidence.energies.back() < opts.energy_floor &&
            l.lpNorm<Eigen::Infinity>() > opts.escape_radius) {
            out.status = SolveStatus::NoMinimizer;
            out.evidence.reason = "unbounded descent: energy below floor with diverging iterates";
            out.evidence.gradient_floor = floor;
            break;
        }

        // Newton direction in quotient coordinates when the restricted
        // Hessian exists and is positive definite; gradient otherwise.
        Eigen::VectorXd dir;
        bool have_newton = false;
        if (in_decorated_domain(c, l)) {
            Eigen::MatrixXd hq = q.transpose() * cov_hessian(c, l) * q;
            Eigen::LLT<Eigen::MatrixXd> llt(hq);
            if (llt.info() == Eigen::Success) {
                dir = llt.solve(g);
                have_newton = true;
            }
        }
        if (!have_newton) dir = g;

        double f0 = objective(l);
        double slope = -res.dot(q * dir);  // dF along the step; negative
        if (!(slope < 0)) {                // fall back to plain gradient
            dir = g;
            slope = -res.dot(q * dir);
        }
        double s = 1.0;
        Metric cand;
        while (true) {
            cand = l + s * (q * dir);
            if (objective(cand) <= f0 + kArmijoC1 * s * slope) break;
            s *= 0.5;
            if (s < kMinStep) break;
        }
        if (s < kMinStep) {
            out.status = SolveStatus::NoMinimizer;
            out.evidence.reason = "line search stalled with nonzero curvature residual";
            out.evidence.gradient_floor = floor;
            break;
        }
        l = project_quotient(c, cand);
    }
    out.in_domain = in_decorated_domain(c, out.l_star);
    return out;
}

SolveResult minimize_energy(const Complex& c, const Metric& l0, double tol, int max_iter) {
    SolveOptions opts;
    opts.tol = tol;
    opts.max_iter = max_iter;
    return minimize_energy(c, l0, opts);
}

bool cross_validate(const Complex& c, const Metric& flow_limit, const Metric& solver_limit,
                    double tol) {
    if (flow_limit.size() != c.edge_count || solver_limit.size() != c.edge_count)
        throw std::invalid_argument("cross_validate: metric length does not match the complex");
    if (!(tol > 0)) throw std::invalid_argument("cross_validate: tol must be positive");
    double rf = ricci_curvature(c, flow_limit).K.lpNorm<Eigen::Infinity>();
    double rs = ricci_curvature(c, solver_limit).K.lpNorm<Eigen::Infinity>();
    if (rf >= tol || rs >= tol)
        throw std::invalid_argument("cross_validate: an input is not below tol in curvature");
    Metric d = project_quotient(c, flow_limit) - project_quotient(c, solver_limit);
    return d.lpNorm<Eigen::Infinity>() <= 10.0 * tol;
}

}  // namespace cuspflow
