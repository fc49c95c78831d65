#include "cuspflow/flow.hpp"

#include <cmath>
#include <cstdio>
#include <deque>
#include <ostream>
#include <stdexcept>

namespace cuspflow {

namespace {

Eigen::VectorXd residual(const Eigen::VectorXd& K, const FlowConfig& cfg) {
    if (cfg.kind == FlowKind::Prescribed) return K - *cfg.target;
    return K;
}

struct Stepper {
    const Complex& c;
    const FlowConfig& cfg;
    // Dormand-Prince 5(4) tableau, used when cfg.adaptive.
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                            e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;

    Eigen::VectorXd f(const Metric& l) const { return flow_field(c, l, cfg); }

    Metric rk4(const Metric& l, double h) const {
        Eigen::VectorXd k1 = f(l);
        Eigen::VectorXd k2 = f(l + 0.5 * h * k1);
        Eigen::VectorXd k3 = f(l + 0.5 * h * k2);
        Eigen::VectorXd k4 = f(l + h * k3);
        return l + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    // One embedded attempt; returns the 5th-order state and the error
    // estimate against the 4th-order weights.
    Metric dopri(const Metric& l, double h, double* err) const {
        Eigen::VectorXd k1 = f(l);
        Eigen::VectorXd k2 = f(l + h * (a21 * k1));
        Eigen::VectorXd k3 = f(l + h * (a31 * k1 + a32 * k2));
        Eigen::VectorXd k4 = f(l + h * (a41 * k1 + a42 * k2 + a43 * k3));
        Eigen::VectorXd k5 = f(l + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        Eigen::VectorXd k6 = f(l + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        Metric hi = l + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        Eigen::VectorXd k7 = f(hi);
        Metric lo = l + h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        *err = (hi - lo).lpNorm<Eigen::Infinity>();
        return hi;
    }
};

}  // namespace

const char* to_string(FlowOutcome o) {
    switch (o) {
        case FlowOutcome::Converged: return "Converged";
        case FlowOutcome::Diverging: return "Diverging";
        case FlowOutcome::Undetermined: return "Undetermined";
        case FlowOutcome::Failed: return "Failed";
    }
    return "?";
}

void validate_config(const Complex& c, const FlowConfig& cfg) {
    if (!(cfg.step > 0)) throw std::invalid_argument("flow config: step must be positive");
    if (!(cfg.t_max > 0)) throw std::invalid_argument("flow config: t_max must be positive");
    if (!(cfg.tol_converge > 0)) throw std::invalid_argument("flow config: tol_converge must be positive");
    if (!(cfg.window > 0)) throw std::invalid_argument("flow config: window must be positive");
    if (!(cfg.l_max > 0)) throw std::invalid_argument("flow config: l_max must be positive");
    if (cfg.record_every < 1) throw std::invalid_argument("flow config: record_every must be >= 1");
    if (cfg.kind == FlowKind::Prescribed) {
        if (!cfg.target) throw std::invalid_argument("flow config: prescribed flow needs a target curvature");
        if (cfg.target->size() != c.edge_count)
            throw std::invalid_argument("flow config: target curvature has length " +
                                        std::to_string(cfg.target->size()) + ", expected " +
                                        std::to_string(c.edge_count));
    }
}

Eigen::VectorXd flow_field(const Complex& c, const Metric& l, const FlowConfig& cfg) {
    Curvature k = ricci_curvature(c, l);
    switch (cfg.kind) {
        case FlowKind::Ricci: return k.K;
        case FlowKind::Prescribed: return k.K - *cfg.target;
        case FlowKind::Calabi: return cov_hessian(c, l) * k.K;  // throws outside the domain
    }
    throw std::logic_error("flow_field: bad kind");
}

Metric step(const Complex& c, const Metric& l, const FlowConfig& cfg) {
    validate_config(c, cfg);
    return Stepper{c, cfg}.rk4(l, cfg.step);
}

FlowTrace run(const Complex& c, const Metric& l0, const FlowConfig& cfg) {
    validate_config(c, cfg);
    if (l0.size() != c.edge_count)
        throw std::invalid_argument("run: initial metric has length " + std::to_string(l0.size()) +
                                    ", expected " + std::to_string(c.edge_count));
    Stepper stepper{c, cfg};
    FlowTrace trace;
    Metric l = l0;
    double t = 0.0, h = cfg.step;
    long accepted = 0;
    std::deque<std::pair<double, double>> window;  // (t, residual sup-norm)

    auto sample = [&](const Metric& state, double time) {
        Curvature k = ricci_curvature(c, state);
        trace.samples.push_back({time, state, k.K, energy(c, state), total_volume(c, state)});
        return k;
    };

    while (true) {
        Curvature k = ricci_curvature(c, l);
        double res = residual(k.K, cfg).lpNorm<Eigen::Infinity>();
        if (!std::isfinite(res) || !l.allFinite()) {
            trace.outcome = FlowOutcome::Failed;
            trace.error = "non-finite state";
            break;
        }
        window.emplace_back(t, res);
        while (!window.empty() && window.front().first < t - cfg.window) window.pop_front();
        bool record = accepted % cfg.record_every == 0;
        if (record) trace.samples.push_back({t, l, k.K, energy(c, l), total_volume(c, l)});

        if (res < cfg.tol_converge) {
            if (!record) sample(l, t);
            trace.outcome = FlowOutcome::Converged;
            break;
        }
        if (l.lpNorm<Eigen::Infinity>() > cfg.l_max) {
            double floor = res;
            for (const auto& [tt, rr] : window) floor = std::min(floor, rr);
            if (floor > std::sqrt(cfg.tol_converge)) {
                if (!record) sample(l, t);
                trace.outcome = FlowOutcome::Diverging;
                break;
            }
        }
        if (t >= cfg.t_max) {
            if (!record) sample(l, t);
            trace.outcome = FlowOutcome::Undetermined;
            break;
        }

        Metric next;
        double h_used = h;
        try {
            if (cfg.adaptive) {
                double err = 0.0;
                while (true) {
                    next = stepper.dopri(l, h, &err);
                    if ((err <= cfg.adaptive_tol && next.allFinite()) || h <= 1e-8) break;
                    h = std::max(1e-8, 0.5 * h);
                }
                h_used = h;
                if (err > 0)
                    h = std::clamp(0.9 * h * std::pow(cfg.adaptive_tol / err, 0.2), 1e-8, 1.0);
                else
                    h = std::min(1.0, 2.0 * h);
            } else {
                next = stepper.rk4(l, h);
            }
        } catch (const std::domain_error& e) {
            // Calabi flow left the decorated domain: abort with the
            // boundary-crossing sample already recorded.
            if (!record) sample(l, t);
            trace.outcome = FlowOutcome::Failed;
            trace.error = e.what();
            break;
        }
        if (!next.allFinite()) {
            if (!record) sample(l, t);
            trace.outcome = FlowOutcome::Failed;
            trace.error = "non-finite state after step";
            break;
        }
        l = std::move(next);
        t += h_used;
        ++accepted;
    }

    trace.limit = l;
    trace.t_end = t;
    if (trace.outcome == FlowOutcome::Converged) {
        try {
            trace.rate = fit_rate(trace);
        } catch (const std::runtime_error&) {
            trace.rate.reset();
        }
    }
    return trace;
}

RateFit fit_rate(const FlowTrace& trace) {
    if (trace.outcome != FlowOutcome::Converged)
        throw std::runtime_error("fit_rate: trace is not Converged");
    // Terminal phase: everything after the residual last exceeded 1e-2.
    std::vector<std::pair<double, double>> pts;  // (t, log ||K||_2)
    size_t start = 0;
    std::vector<double> norms(trace.samples.size());
    for (size_t i = 0; i < trace.samples.size(); ++i) {
        norms[i] = trace.samples[i].K.norm();
        if (norms[i] >= 1e-2) start = i + 1;
    }
    for (size_t i = start; i < trace.samples.size(); ++i)
        if (norms[i] > 0 && std::isfinite(norms[i]))
            pts.emplace_back(trace.samples[i].t, std::log(norms[i]));
    if (pts.size() < 20) throw std::runtime_error("fit_rate: too few samples in terminal phase");

    double st = 0, sy = 0, stt = 0, sty = 0;
    for (auto [x, y] : pts) {
        st += x;
        sy += y;
        stt += x * x;
        sty += x * y;
    }
    double n = double(pts.size());
    double denom = n * stt - st * st;
    if (denom <= 0) throw std::runtime_error("fit_rate: degenerate time grid");
    double slope = (n * sty - st * sy) / denom;
    double icept = (sy - slope * st) / n;
    double lambda = -slope;
    if (!(lambda > 0)) throw std::runtime_error("fit_rate: non-decaying tail");
    double rss = 0;
    for (auto [x, y] : pts) {
        double r = y - (icept + slope * x);
        rss += r * r;
    }
    return {lambda, std::sqrt(rss / n)};
}

SeparationReport uniqueness_check(const Complex& c, const Metric& l0, const FlowConfig& cfg,
                                  double eps) {
    validate_config(c, cfg);
    Eigen::VectorXd v = Eigen::VectorXd::Ones(c.edge_count).normalized();
    Metric a = l0, b = l0 + eps * v;
    Stepper stepper{c, cfg};
    SeparationReport rep{0.0, 0.0, eps};
    for (double t = 0.0; t <= cfg.t_max + 0.5 * cfg.step; t += cfg.step) {
        double sep = (a - b).lpNorm<Eigen::Infinity>();
        if (sep > rep.sup_separation) {
            rep.sup_separation = sep;
            rep.t_at_sup = t;
        }
        a = stepper.rk4(a, cfg.step);
        b = stepper.rk4(b, cfg.step);
    }
    return rep;
}

void write_trace(std::ostream& out, const FlowTrace& trace) {
    const Eigen::Index m = trace.limit.size();
    out << "t";
    for (Eigen::Index i = 0; i < m; ++i) out << ", l_" << i;
    for (Eigen::Index i = 0; i < m; ++i) out << ", K_" << i;
    out << ", H, vol\n";
    char buf[40];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf;
    };
    for (const auto& s : trace.samples) {
        put(s.t);
        for (Eigen::Index i = 0; i < m; ++i) {
            out << ", ";
            put(s.l[i]);
        }
        for (Eigen::Index i = 0; i < m; ++i) {
            out << ", ";
            put(s.K[i]);
        }
        out << ", ";
        put(s.H);
        out << ", ";
        put(s.vol);
        out << "\n";
    }
    out << "# classification=" << to_string(trace.outcome) << " rate=";
    if (trace.rate) {
        put(trace.rate->lambda);
        out << "\n";
    } else {
        out << "NA\n";
    }
}

}  // namespace cuspflow
