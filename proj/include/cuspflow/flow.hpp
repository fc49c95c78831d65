#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cuspflow/curvature.hpp"

// Time integration of the extended combinatorial Ricci flow
// dl/dt = K(l), the prescribed-curvature variant dl/dt = K(l) - Kbar, and
// the combinatorial Calabi flow dl/dt = Delta K with Delta = -dK/dl.
// Trajectories are classified as Converged / Diverging / Undetermined;
// the verdicts are numerical, not theorem checks.

namespace cuspflow {

enum class FlowKind { Ricci, Prescribed, Calabi };

struct FlowConfig {
    FlowKind kind = FlowKind::Ricci;
    std::optional<Eigen::VectorXd> target;  // Kbar, prescribed flows only
    double step = 0.01;                     // RK4 step size
    bool adaptive = false;                  // embedded 5(4) pair instead
    double adaptive_tol = 1e-10;            // absolute error tolerance
    double t_max = 500.0;
    double tol_converge = 1e-10;            // sup-norm threshold on the residual
    double window = 10.0;                   // trailing window for the divergence test
    double l_max = 1e3;                     // divergence radius
    int record_every = 1;                   // accepted steps per trace sample
};

struct FlowSample {
    double t;
    Eigen::VectorXd l;
    Eigen::VectorXd K;
    double H;
    double vol;
};

enum class FlowOutcome { Converged, Diverging, Undetermined, Failed };

struct RateFit {
    double lambda;    // fitted decay rate, > 0
    double residual;  // rms residual of the log-linear fit
};

struct FlowTrace {
    std::vector<FlowSample> samples;
    FlowOutcome outcome = FlowOutcome::Undetermined;
    Eigen::VectorXd limit;  // final state; last good state on Failed
    double t_end = 0.0;
    std::string error;                   // set when outcome == Failed
    std::optional<RateFit> rate;         // filled on Converged when fittable
};

const char* to_string(FlowOutcome o);

/// Throws std::invalid_argument if the config is unusable for this complex
/// (non-positive step/tolerances, missing or mis-sized target, ...).
void validate_config(const Complex& c, const FlowConfig& cfg);

/// Right-hand side of the selected flow. Calabi requires l in the
/// decorated domain and throws std::domain_error outside it.
Eigen::VectorXd flow_field(const Complex& c, const Metric& l, const FlowConfig& cfg);

/// One classic RK4 step of size cfg.step.
Metric step(const Complex& c, const Metric& l, const FlowConfig& cfg);

/// Integrates until the residual sup-norm drops below tol_converge
/// (Converged), the state leaves the l_max ball while the residual stayed
/// above sqrt(tol_converge) over the trailing window (Diverging), t_max is
/// reached (Undetermined), or the state degenerates (Failed).
FlowTrace run(const Complex& c, const Metric& l0, const FlowConfig& cfg);

/// Least-squares fit of log||K(t)|| over the terminal phase of a trace.
/// Throws std::runtime_error on fewer than 20 usable samples or a
/// non-decaying tail; a noisy but decaying tail is reported through the
/// residual for the caller to judge.
RateFit fit_rate(const FlowTrace& trace);

struct SeparationReport {
    double sup_separation;  // sup-norm over the whole run
    double t_at_sup;
    double eps;             // 2-norm of the initial perturbation
};

/// Integrates the flow from l0 and from l0 + eps*v on the same step grid
/// and reports the largest separation; the exact flow is non-expansive.
SeparationReport uniqueness_check(const Complex& c, const Metric& l0, const FlowConfig& cfg,
                                  double eps = 1e-8);

/// Delimited-text trace: header row, one line per sample, and a terminal
/// '# classification=... rate=...' line.
void write_trace(std::ostream& out, const FlowTrace& trace);

}  // namespace cuspflow
