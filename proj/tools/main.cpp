#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "experiments.hpp"

using namespace opsplit;
using namespace opsplit::cli;

namespace {

struct Flags {
    std::string config;
    std::string out;
    std::vector<double> dts;
    std::vector<std::string> schemes;
    std::vector<std::string> modes;
    int iters = 0;
    std::optional<std::uint64_t> seed;
    bool gnuplot = false;
    std::optional<double> t_end;
    std::string closure;
    std::optional<std::size_t> n_points;
    std::optional<double> velocity;
    std::optional<double> diffusion;
    std::optional<double> lambda1;
    std::optional<double> lambda2;
    std::string signs;
    std::optional<int> refinement;
    std::string history_quad;
    std::optional<int> history_panels;
};

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("--config", f.config, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", f.out, "output file (default stdout)");
    sub->add_option("--dt", f.dts, "time steps")->delimiter(',');
    sub->add_option("--scheme", f.schemes, "lie, swss, strang, iterative")->delimiter(',');
    sub->add_option("--mode", f.modes, "one-sided-a, one-sided-b, alternating")->delimiter(',');
    sub->add_option("--iters", f.iters, "iteration cap");
    sub->add_option("--seed", f.seed, "random seed");
    sub->add_flag("--gnuplot", f.gnuplot, "write gnuplot blocks instead of CSV");
    sub->add_option("--t-end", f.t_end, "final time");
}

void add_transport(CLI::App* sub, Flags& f) {
    sub->add_option("--closure", f.closure, "case1 or case2");
    sub->add_option("--n-points", f.n_points, "grid points");
    sub->add_option("--velocity", f.velocity, "advection velocity");
    sub->add_option("--diffusion", f.diffusion, "diffusion coefficient");
    sub->add_option("--lambda1", f.lambda1, "decay rate");
    sub->add_option("--lambda2", f.lambda2, "memory rate");
    sub->add_option("--signs", f.signs, "displayed or upwind");
    sub->add_option("--refinement", f.refinement, "reference substeps per step");
    sub->add_option("--history-quad", f.history_quad, "trapezoid, simpson, simpson38, boole");
    sub->add_option("--history-panels", f.history_panels, "panels for the history integral");
}

ExperimentConfig build_config(Experiment which, const Flags& f) {
    ExperimentConfig cfg;
    cfg.experiment = which;
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        apply_json(cfg, nlohmann::json::parse(in));
        cfg.experiment = which;
    }
    if (!f.out.empty()) cfg.out = f.out;
    if (!f.dts.empty()) cfg.dts = f.dts;
    if (!f.schemes.empty()) cfg.schemes = f.schemes;
    if (!f.modes.empty()) {
        cfg.modes.clear();
        for (const std::string& m : f.modes) cfg.modes.push_back(parse_iteration_mode(m));
    }
    if (f.iters != 0) cfg.iters = f.iters;
    if (f.seed) cfg.seed = *f.seed;
    if (f.t_end) cfg.t_end = *f.t_end;
    if (!f.closure.empty()) cfg.closure = parse_memory_kind(f.closure);
    if (f.n_points) cfg.transport.n_points = *f.n_points;
    if (f.velocity) cfg.transport.v = *f.velocity;
    if (f.diffusion) cfg.transport.diffusion = *f.diffusion;
    if (f.lambda1) cfg.transport.lambda1 = *f.lambda1;
    if (f.lambda2) cfg.transport.lambda2 = *f.lambda2;
    if (!f.signs.empty()) {
        if (f.signs == "displayed") {
            cfg.transport.signs = TransportSigns::displayed;
        } else if (f.signs == "upwind") {
            cfg.transport.signs = TransportSigns::upwind;
        } else {
            throw DomainError("unknown transport sign convention '" + f.signs + "'");
        }
    }
    if (f.refinement) cfg.refinement = *f.refinement;
    if (!f.history_quad.empty()) cfg.history_quad = f.history_quad;
    if (f.history_panels) cfg.history_panels = *f.history_panels;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Operator-splitting experiments"};
    app.require_subcommand(1);

    Flags flags;
    struct Entry {
        Experiment which;
        CLI::App* sub;
    };
    std::vector<Entry> entries{
        {Experiment::example1, app.add_subcommand("example1", "scalar example, errors per iteration")},
        {Experiment::transport, app.add_subcommand("transport", "advection-diffusion with memory")},
        {Experiment::orders, app.add_subcommand("orders", "observed orders and leading-term fits")},
        {Experiment::quadcheck, app.add_subcommand("quadcheck", "Newton-Cotes exactness and orders")},
    };
    for (const Entry& e : entries) {
        add_common(e.sub, flags);
        if (e.which == Experiment::transport) add_transport(e.sub, flags);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        Experiment which = Experiment::example1;
        for (const Entry& e : entries) {
            if (e.sub->parsed()) which = e.which;
        }
        const ExperimentConfig cfg = build_config(which, flags);
        const ExperimentResult res = run(cfg);

        std::ofstream file;
        if (!cfg.out.empty()) {
            file.open(cfg.out);
            if (!file) {
                std::cerr << "error: cannot open " << cfg.out << '\n';
                return 2;
            }
        }
        std::ostream& os = cfg.out.empty() ? std::cout : file;
        if (flags.gnuplot) {
            write_gnuplot(os, res.table);
        } else {
            write_csv(os, res.table);
        }

        for (const std::string& note : res.notes) std::cerr << "# " << note << '\n';
        for (const Check& c : res.checks) {
            std::cerr << (c.passed ? "PASS " : "FAIL ") << c.name;
            if (!c.detail.empty()) std::cerr << " [" << c.detail << ']';
            std::cerr << '\n';
        }
        return res.all_passed() ? 0 : 1;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: config: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
