// Command-line front end: triangulation checks, curvature reports, flow
// runs, and direct energy minimization. Reports are line-oriented
// key=value (stable and diffable); wall-clock time is isolated in the
// final wall_ms field. Exit codes: 0 ok/converged/found, 2 invalid input
// or violations, 3 diverging/no-minimizer, 4 undetermined/max-iter,
// 5 integrator failure.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "cuspflow/complex.hpp"
#include "cuspflow/curvature.hpp"
#include "cuspflow/flow.hpp"
#include "cuspflow/solver.hpp"

namespace {

using namespace cuspflow;
using json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitDiverging = 3;
constexpr int kExitUndetermined = 4;
constexpr int kExitFailure = 5;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt(const Eigen::VectorXd& v) {
    std::string out;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += fmt(v[i]);
    }
    return out;
}

std::vector<double> parse_csv(const std::string& text) {
    std::vector<double> out;
    std::string item;
    std::stringstream ss(text);
    while (std::getline(ss, item, ',')) {
        size_t used = 0;
        out.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument("bad number '" + item + "'");
    }
    return out;
}

std::vector<double> read_vector_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::vector<double> out;
    std::string tok;
    while (in >> tok) {
        for (char& ch : tok)
            if (ch == ',') ch = ' ';
        std::stringstream ss(tok);
        double v;
        while (ss >> v) out.push_back(v);
    }
    return out;
}

// Ordered report that prints as key=value lines and doubles as a JSON doc.
struct Report {
    std::vector<std::pair<std::string, std::string>> lines;
    json doc = json::object();

    void add(const std::string& key, const std::string& value) {
        lines.emplace_back(key, value);
        doc[key] = value;
    }
    void add(const std::string& key, double value) {
        lines.emplace_back(key, fmt(value));
        doc[key] = value;
    }
    void add(const std::string& key, int value) {
        lines.emplace_back(key, std::to_string(value));
        doc[key] = value;
    }
    void add(const std::string& key, const Eigen::VectorXd& value) {
        lines.emplace_back(key, fmt(value));
        doc[key] = std::vector<double>(value.begin(), value.end());
    }
    void print(std::ostream& out) const {
        for (const auto& [k, v] : lines) out << k << "=" << v << "\n";
    }
};

std::string valence_histogram(const Complex& c) {
    std::map<int, int> hist;
    for (int v : c.valence) ++hist[v];
    std::string out = "{";
    bool first = true;
    for (auto [d, n] : hist) {
        if (!first) out += ",";
        out += std::to_string(d) + ":" + std::to_string(n);
        first = false;
    }
    return out + "}";
}

void add_complex_summary(Report& rep, const Complex& c) {
    rep.add("tet_count", c.tet_count);
    rep.add("m", c.edge_count);
    rep.add("n", c.vertex_count);
    rep.add("valences", valence_histogram(c));
    if (auto d = c.constant_valence()) {
        rep.add("constant_valence", *d);
        if (*d != 6)
            rep.add("advisory", "constant valence " + std::to_string(*d) +
                                    " != 6: an edge-transitive complex with this valence "
                                    "admits no zero-curvature metric");
    } else {
        rep.add("constant_valence", "none");
    }
}

struct CommonArgs {
    std::string file;
    std::string metric_csv;
    std::string json_path;
};

Metric initial_metric(const Complex& c, const CommonArgs& args) {
    std::vector<double> vals;
    if (!args.metric_csv.empty())
        vals = parse_csv(args.metric_csv);
    else if (c.spec.metric)
        vals = *c.spec.metric;
    else
        return Metric::Zero(c.edge_count);
    if (int(vals.size()) != c.edge_count)
        throw std::invalid_argument("metric has length " + std::to_string(vals.size()) +
                                    ", expected " + std::to_string(c.edge_count));
    return Eigen::Map<const Metric>(vals.data(), vals.size());
}

int finish(Report& rep, const CommonArgs& args, int exit_code,
           std::chrono::steady_clock::time_point t0) {
    rep.add("exit", exit_code);
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    rep.add("wall_ms", int(ms));
    rep.print(std::cout);
    if (!args.json_path.empty()) {
        std::ofstream out(args.json_path);
        out << rep.doc.dump(2) << "\n";
    }
    return exit_code;
}

Complex load_or_exit(const std::string& file) {
    GluingSpec spec = parse_complex_file(file);
    auto violations = validate(spec);
    if (!violations.empty()) {
        for (const auto& v : violations)
            std::cerr << "violation: tet " << v.tet << " face " << v.face << ": " << v.rule
                      << " (" << v.detail << ")\n";
        std::exit(kExitInput);
    }
    return build_complex(spec);
}

int cmd_check(const CommonArgs& args) {
    auto t0 = std::chrono::steady_clock::now();
    Complex c = load_or_exit(args.file);
    Report rep;
    rep.add("command", "check");
    rep.add("file", args.file);
    add_complex_summary(rep, c);
    return finish(rep, args, kExitOk, t0);
}

int cmd_curvature(const CommonArgs& args) {
    auto t0 = std::chrono::steady_clock::now();
    Complex c = load_or_exit(args.file);
    Metric l = initial_metric(c, args);
    Curvature k = ricci_curvature(c, l);
    bool in_l = in_decorated_domain(c, l);
    Report rep;
    rep.add("command", "curvature");
    rep.add("file", args.file);
    add_complex_summary(rep, c);
    rep.add("metric", l);
    rep.add("K", k.K);
    rep.add("cone_angles", k.cone_angle);
    rep.add("K_norm", k.K.lpNorm<Eigen::Infinity>());
    rep.add("H", energy(c, l));
    rep.add("in_L", in_l ? 1 : 0);
    if (in_l) rep.add("volume", total_volume(c, l));
    return finish(rep, args, kExitOk, t0);
}

struct FlowArgs {
    CommonArgs common;
    std::string kind = "ricci";
    std::string target_file;
    std::string trace_path;
    FlowConfig cfg;
    int starts = 1;
    int jobs = 1;
    unsigned seed = 1;
};

int exit_code_of(FlowOutcome o) {
    switch (o) {
        case FlowOutcome::Converged: return kExitOk;
        case FlowOutcome::Diverging: return kExitDiverging;
        case FlowOutcome::Undetermined: return kExitUndetermined;
        case FlowOutcome::Failed: return kExitFailure;
    }
    return kExitFailure;
}

std::string default_trace_path(const FlowArgs& args, int start) {
    const char* dir = std::getenv("CUSPFLOW_TRACE_DIR");
    if (!dir || !*dir) return {};
    std::filesystem::path p(dir);
    std::string stem = std::filesystem::path(args.common.file).stem().string();
    std::string name = stem + "-" + args.kind;
    if (args.starts > 1) name += "-s" + std::to_string(start);
    return (p / (name + ".trace")).string();
}

void add_trace_fields(Report& rep, const Complex& c, const FlowTrace& trace,
                      const std::string& prefix) {
    rep.add(prefix + "classification", to_string(trace.outcome));
    rep.add(prefix + "t_end", trace.t_end);
    rep.add(prefix + "samples", int(trace.samples.size()));
    rep.add(prefix + "limit", trace.limit);
    rep.add(prefix + "projection", project_quotient(c, trace.limit));
    double kn = ricci_curvature(c, trace.limit).K.lpNorm<Eigen::Infinity>();
    rep.add(prefix + "K_norm", kn);
    bool in_l = in_decorated_domain(c, trace.limit);
    rep.add(prefix + "in_L", in_l ? 1 : 0);
    if (in_l) rep.add(prefix + "volume", total_volume(c, trace.limit));
    if (trace.rate) {
        rep.add(prefix + "rate", trace.rate->lambda);
        rep.add(prefix + "rate_residual", trace.rate->residual);
    } else {
        rep.add(prefix + "rate", "NA");
    }
    if (!trace.error.empty()) rep.add(prefix + "error", trace.error);
}

int cmd_flow(FlowArgs& args) {
    auto t0 = std::chrono::steady_clock::now();
    Complex c = load_or_exit(args.common.file);
    if (args.kind == "ricci")
        args.cfg.kind = FlowKind::Ricci;
    else if (args.kind == "prescribed")
        args.cfg.kind = FlowKind::Prescribed;
    else if (args.kind == "calabi")
        args.cfg.kind = FlowKind::Calabi;
    else
        throw std::invalid_argument("unknown flow kind '" + args.kind + "'");
    if (!args.target_file.empty()) {
        auto vals = read_vector_file(args.target_file);
        args.cfg.target = Eigen::Map<const Eigen::VectorXd>(vals.data(), vals.size());
    }
    Metric l0 = initial_metric(c, args.common);
    validate_config(c, args.cfg);

    Report rep;
    rep.add("command", "flow");
    rep.add("file", args.common.file);
    add_complex_summary(rep, c);
    rep.add("kind", args.kind);
    rep.add("step", args.cfg.step);
    rep.add("tol", args.cfg.tol_converge);
    rep.add("t_max", args.cfg.t_max);
    rep.add("starts", args.starts);
    rep.add("seed", int(args.seed));

    // Multi-start: start 0 runs l0 itself, later ones seeded perturbations.
    std::vector<Metric> inits(args.starts);
    for (int i = 0; i < args.starts; ++i) {
        inits[i] = l0;
        if (i > 0) {
            std::mt19937_64 rng(args.seed + i);
            std::uniform_real_distribution<double> u(-1.0, 1.0);
            for (int e = 0; e < c.edge_count; ++e) inits[i][e] += u(rng);
        }
    }
    std::vector<FlowTrace> traces(args.starts);
    int jobs = std::max(1, args.jobs);
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int w = 0; w < std::min(jobs, args.starts); ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < args.starts; i = next.fetch_add(1))
                traces[i] = run(c, inits[i], args.cfg);
        });
    for (auto& th : pool) th.join();

    for (int i = 0; i < args.starts; ++i) {
        std::string prefix = args.starts > 1 ? "start_" + std::to_string(i) + "_" : "";
        add_trace_fields(rep, c, traces[i], prefix);
        std::string tpath = !args.trace_path.empty()
                                ? (args.starts > 1 ? args.trace_path + "." + std::to_string(i)
                                                   : args.trace_path)
                                : default_trace_path(args, i);
        if (!tpath.empty()) {
            std::ofstream out(tpath);
            if (!out) throw std::runtime_error("cannot write trace '" + tpath + "'");
            write_trace(out, traces[i]);
            rep.add(prefix + "trace", tpath);
        }
    }

    FlowOutcome worst = FlowOutcome::Converged;
    for (const auto& tr : traces)
        if (exit_code_of(tr.outcome) > exit_code_of(worst)) worst = tr.outcome;
    if (args.starts > 1) {
        rep.add("classification", to_string(worst));
        double spread = 0.0;
        for (int i = 0; i < args.starts; ++i)
            for (int j = i + 1; j < args.starts; ++j)
                spread = std::max(spread, (project_quotient(c, traces[i].limit) -
                                           project_quotient(c, traces[j].limit))
                                              .lpNorm<Eigen::Infinity>());
        rep.add("projection_spread", spread);
    }
    return finish(rep, args.common, exit_code_of(worst), t0);
}

struct SolveArgs {
    CommonArgs common;
    std::string target_file;
    SolveOptions opts;
};

int cmd_solve(SolveArgs& args) {
    auto t0 = std::chrono::steady_clock::now();
    Complex c = load_or_exit(args.common.file);
    if (!args.target_file.empty()) {
        auto vals = read_vector_file(args.target_file);
        if (int(vals.size()) != c.edge_count)
            throw std::invalid_argument("target curvature has length " +
                                        std::to_string(vals.size()) + ", expected " +
                                        std::to_string(c.edge_count));
        args.opts.target = Eigen::Map<const Eigen::VectorXd>(vals.data(), vals.size());
    }
    Metric l0 = initial_metric(c, args.common);
    SolveResult res = minimize_energy(c, l0, args.opts);

    Report rep;
    rep.add("command", "solve");
    rep.add("file", args.common.file);
    add_complex_summary(rep, c);
    rep.add("tol", args.opts.tol);
    rep.add("status", to_string(res.status));
    rep.add("iterations", res.iterations);
    rep.add("limit", res.l_star);
    rep.add("projection", project_quotient(c, res.l_star));
    rep.add("K_norm", res.grad_norm);
    rep.add("in_L", res.in_domain ? 1 : 0);
    if (res.status == SolveStatus::Found && res.in_domain)
        rep.add("volume", total_volume(c, res.l_star));
    if (res.status == SolveStatus::NoMinimizer) {
        rep.add("evidence", res.evidence.reason);
        rep.add("gradient_floor", res.evidence.gradient_floor);
    }
    int code = res.status == SolveStatus::Found
                   ? kExitOk
                   : (res.status == SolveStatus::NoMinimizer ? kExitDiverging : kExitUndetermined);
    return finish(rep, args.common, code, t0);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"decorated hyperbolic polyhedral metrics: curvature, Ricci flow, and energy minimization on ideally triangulated pseudo 3-manifolds"};
    app.require_subcommand(1);

    CommonArgs check_args, curv_args;
    FlowArgs flow_args;
    SolveArgs solve_args;

    auto* check = app.add_subcommand("check", "parse and validate a triangulation file");
    check->add_option("file", check_args.file, "triangulation file")->required();
    check->add_option("--json", check_args.json_path, "write a JSON report to this path");

    auto* curv = app.add_subcommand("curvature", "evaluate curvature at a metric");
    curv->add_option("file", curv_args.file, "triangulation file")->required();
    curv->add_option("--metric", curv_args.metric_csv, "edge lengths, comma separated");
    curv->add_option("--json", curv_args.json_path, "write a JSON report to this path");

    auto* flow = app.add_subcommand("flow", "integrate a curvature flow");
    flow->add_option("file", flow_args.common.file, "triangulation file")->required();
    flow->add_option("--metric", flow_args.common.metric_csv, "initial edge lengths, comma separated");
    flow->add_option("--kind", flow_args.kind, "ricci|prescribed|calabi")
        ->check(CLI::IsMember({"ricci", "prescribed", "calabi"}));
    flow->add_option("--target", flow_args.target_file, "target curvature file (prescribed)");
    flow->add_option("--step", flow_args.cfg.step, "RK4 step size");
    flow->add_flag("--adaptive", flow_args.cfg.adaptive, "embedded adaptive stepping");
    flow->add_option("--t-max", flow_args.cfg.t_max, "time horizon");
    flow->add_option("--tol", flow_args.cfg.tol_converge, "convergence tolerance on ||K||_inf");
    flow->add_option("--l-max", flow_args.cfg.l_max, "divergence radius");
    flow->add_option("--window", flow_args.cfg.window, "divergence window (time units)");
    flow->add_option("--record-every", flow_args.cfg.record_every, "steps per trace sample");
    flow->add_option("--trace", flow_args.trace_path,
                     "trace file path (default: $CUSPFLOW_TRACE_DIR when set)");
    flow->add_option("--starts", flow_args.starts, "number of multi-start runs")
        ->check(CLI::PositiveNumber);
    flow->add_option("--jobs", flow_args.jobs, "concurrent runs for multi-start")
        ->check(CLI::PositiveNumber);
    flow->add_option("--seed", flow_args.seed, "seed for multi-start perturbations");
    flow->add_option("--json", flow_args.common.json_path, "write a JSON report to this path");

    auto* solve = app.add_subcommand("solve", "minimize the energy directly (projected Newton)");
    solve->add_option("file", solve_args.common.file, "triangulation file")->required();
    solve->add_option("--metric", solve_args.common.metric_csv, "initial edge lengths");
    solve->add_option("--target", solve_args.target_file, "target curvature file (prescribed)");
    solve->add_option("--tol", solve_args.opts.tol, "stop when ||K - Kbar||_inf is below");
    solve->add_option("--max-iter", solve_args.opts.max_iter, "iteration cap");
    solve->add_option("--json", solve_args.common.json_path, "write a JSON report to this path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitInput;
    }

    try {
        if (check->parsed()) return cmd_check(check_args);
        if (curv->parsed()) return cmd_curvature(curv_args);
        if (flow->parsed()) return cmd_flow(flow_args);
        if (solve->parsed()) return cmd_solve(solve_args);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
