// Command-line driver: simulations, twin experiments, estimate suites,
// projection certification, and decay-inequality series checking.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "detflow/experiments.hpp"

namespace fs = std::filesystem;
using namespace detflow;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    int resolution = 0;
    double dt = 0.0;
    double horizon = 0.0;
    bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool config_required = true) {
    auto* c = cmd->add_option("--config", o.config_path, "config file path");
    if (config_required) c->required();
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--seed", o.seed, "override solver seed")
        ->each([&o](const std::string&) { o.seed_set = true; });
    cmd->add_option("--resolution", o.resolution, "override grid resolution");
    cmd->add_option("--dt", o.dt, "override time step");
    cmd->add_option("--horizon", o.horizon, "override end time");
}

Config load_config(const CommonOpts& o) {
    Config cfg = o.config_path.empty() ? Config()
                                       : Config::parse_file(o.config_path);
    if (o.seed_set) {
        cfg.set("solver", "seed", std::to_string(o.seed));
        cfg.set("initial", "seed", std::to_string(o.seed));
    }
    if (o.resolution > 0)
        cfg.set("solver", "resolution", std::to_string(o.resolution));
    if (o.dt > 0.0) {
        std::ostringstream ss;
        ss.precision(17);
        ss << o.dt;
        cfg.set("solver", "dt", ss.str());
    }
    if (o.horizon > 0.0) {
        std::ostringstream ss;
        ss.precision(17);
        ss << o.horizon;
        cfg.set("solver", "t_end", ss.str());
    }
    return cfg;
}

std::ofstream open_out(const CommonOpts& o, const std::string& name) {
    fs::create_directories(o.out_dir);
    std::ofstream f(fs::path(o.out_dir) / name);
    if (!f) throw ConfigError("cannot write to output directory: " + o.out_dir);
    return f;
}

int run_simulate(const CommonOpts& o) {
    const Config cfg = load_config(o);
    const SolverConfig sc = solver_from_config(cfg);
    const TrajectoryRecord rec = integrate(sc);
    {
        auto f = open_out(o, "trajectory.csv");
        rec.write_csv(f);
    }
    {
        // rebuild the final state for the snapshot
        Stepper st(sc);
        const long nsteps = std::lround(sc.t_end / sc.dt);
        for (long k = 0; k < nsteps; ++k) st.step();
        auto f = open_out(o, "final_snapshot.csv");
        write_snapshot(f, st.state());
    }
    std::cout << "simulate: " << rec.t.size() << " samples, final |u|_H = "
              << rec.h_norm.back() << "\n";
    return 0;
}

int run_twin(const CommonOpts& o) {
    const Config cfg = load_config(o);
    const ExperimentConfig ec = experiment_from_config(cfg);
    const TwinReport rep = twin_run(ec);
    {
        auto f = open_out(o, "twin.json");
        rep.write_json(f);
    }
    {
        auto f = open_out(o, "twin.csv");
        rep.write_csv(f);
    }
    std::cout << "twin: verdict = " << rep.verdict
              << ", trailing |u-v|_H = " << rep.trailing_h_diff() << "\n";
    return 0;
}

int run_estimates(const CommonOpts& o) {
    const Config cfg = load_config(o);
    const SolverConfig sc = solver_from_config(cfg);
    const double window = cfg.get_double("estimates", "window", 0.0);
    const SuiteResult suite = estimate_suite(sc, window);
    {
        auto f = open_out(o, "estimates.csv");
        suite.write_csv(f);
    }
    {
        auto f = open_out(o, "estimates.json");
        suite.write_json(f);
    }
    for (const auto& r : suite.reports)
        std::cout << r.id << ": " << (r.satisfied ? "satisfied" : "VIOLATED")
                  << " (margin " << r.margin << ")\n";
    return suite.all_satisfied ? 0 : 2;
}

int run_certify(const CommonOpts& o) {
    const Config cfg = load_config(o);
    const ProjectionCertificate cert = certify_projection(cfg);
    {
        auto f = open_out(o, "certificate.json");
        write_certificate_json(cert, f);
    }
    std::cout << "certify: C1 = " << cert.c1 << ", gamma = " << cert.gamma
              << " (fitted C1 = " << cert.fitted_c1 << ", fitted gamma = "
              << cert.fitted_gamma << ")\n";
    return 0;
}

int run_gronwall(const CommonOpts& o, const std::string& series_path,
                 double window) {
    std::ifstream in(series_path);
    if (!in) throw ConfigError("cannot open series file: " + series_path);
    std::vector<double> t, a, b, y;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("time", 0) == 0)
            continue;
        std::istringstream ls(line);
        double v[4];
        char comma;
        if (!(ls >> v[0] >> comma >> v[1] >> comma >> v[2] >> comma >> v[3]))
            throw ConfigError("bad series line: " + line);
        t.push_back(v[0]);
        a.push_back(v[1]);
        b.push_back(v[2]);
        y.push_back(v[3]);
    }
    if (window <= 0.0 && !t.empty()) window = 0.25 * (t.back() - t.front());
    const GronwallVerdict v = gronwall_generalized_check(a, b, y, t, window);
    {
        auto f = open_out(o, "gronwall.json");
        f << v.to_json() << "\n";
    }
    std::cout << "gronwall: " << v.verdict << " (m = " << v.m
              << ", beta+ limit = " << v.beta_plus_limit << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"determining-projection laboratory for 2D periodic flows"};
    app.require_subcommand(1);

    CommonOpts so, to, eo, co, go;
    std::string series_path;
    double gronwall_window = 0.0;

    auto* sim = app.add_subcommand("simulate", "run one simulation");
    add_common(sim, so);
    auto* twin = app.add_subcommand("twin", "coupled twin experiment");
    add_common(twin, to);
    auto* est = app.add_subcommand("estimates", "verify the bound suite");
    add_common(est, eo);
    auto* cert = app.add_subcommand("certify", "certify projection constants");
    add_common(cert, co);
    auto* gron = app.add_subcommand("gronwall", "classify a decay series file");
    add_common(gron, go, false);
    gron->add_option("--series", series_path, "CSV: time,alpha,beta,y")
        ->required();
    gron->add_option("--window", gronwall_window, "averaging window length");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return run_simulate(so);
        if (twin->parsed()) return run_twin(to);
        if (est->parsed()) return run_estimates(eo);
        if (cert->parsed()) return run_certify(co);
        if (gron->parsed()) return run_gronwall(go, series_path, gronwall_window);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 4;
    } catch (const BlowUpError& e) {
        std::cerr << "blow-up: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
