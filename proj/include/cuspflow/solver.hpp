#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cuspflow/curvature.hpp"

// Direct variational route to zero-curvature metrics: projected Newton
// descent of the energy H (or of cov - k_target . l for a prescribed
// curvature) over the quotient of R^E by the gauge action. Serves as an
// independent oracle for the flow limits.

namespace cuspflow {

enum class SolveStatus { Found, NoMinimizer, MaxIter };

const char* to_string(SolveStatus s);

/// Diagnostics backing a NoMinimizer verdict. The solver cannot prove
/// nonexistence; this is the observed obstruction.
struct NoMinimizerEvidence {
    std::string reason;
    double gradient_floor = 0.0;          // smallest ||K - Kbar||_inf seen
    std::vector<double> iterate_norms;    // ||l||_inf per iteration
    std::vector<double> energies;         // objective per iteration
};

struct SolveResult {
    SolveStatus status = SolveStatus::MaxIter;
    Metric l_star;          // final iterate (a quotient representative)
    int iterations = 0;
    double grad_norm = 0.0; // ||K - Kbar||_inf at exit
    bool in_domain = false; // final iterate lies in the decorated domain
    NoMinimizerEvidence evidence;
};

struct SolveOptions {
    double tol = 1e-10;                        // stop when ||K - Kbar||_inf < tol
    int max_iter = 200;
    std::optional<Eigen::VectorXd> target;     // Kbar; zero curvature when absent
    double energy_floor = -1e8;                // unbounded-descent detector
    double escape_radius = 1e4;
};

/// Projected descent in the quotient: Newton steps with the quotient-
/// restricted co-volume Hessian where it is available and positive
/// definite, Armijo-backtracked gradient steps otherwise. Found requires
/// the full curvature residual below tol; a quotient-stationary point with
/// a nonzero residual or an unbounded descent yields NoMinimizer.
SolveResult minimize_energy(const Complex& c, const Metric& l0, const SolveOptions& opts = {});
SolveResult minimize_energy(const Complex& c, const Metric& l0, double tol, int max_iter);

/// True iff two certified zero-curvature limits project to the same point
/// of the quotient within 10*tol (rigidity check). Throws on dimension
/// mismatch or when an input is not actually below tol in curvature.
bool cross_validate(const Complex& c, const Metric& flow_limit, const Metric& solver_limit,
                    double tol);

}  // namespace cuspflow
