#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "bootperc/experiments.hpp"

namespace {

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> replicates;
    std::optional<std::size_t> threads;
    std::optional<std::size_t> n;
    std::optional<std::string> out;
    bool print_config = false;
};

int run(const std::string& experiment, const Overrides& o) {
    using namespace bootperc;
    ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
    c.experiment = experiment;
    if (o.seed) c.seed = *o.seed;
    if (o.replicates) c.replicates = *o.replicates;
    if (o.threads) c.threads = *o.threads;
    if (o.n) c.n = *o.n;
    if (o.out) c.out_dir = *o.out;
    validate(c);
    if (o.print_config) {
        std::cout << to_json(c).dump(2) << '\n';
        return 0;
    }
    const auto summary = run_experiment(c);
    std::cout << summary.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bootstrap percolation on Chung-Lu random graphs"};
    app.require_subcommand(1);
    Overrides o;
    std::string chosen;
    const std::pair<const char*, const char*> commands[] = {
        {"generate", "sample one CL(w) graph and write it as CSV and binary"},
        {"percolate", "sample graphs, seed, percolate and verify each result"},
        {"lln", "compare the final infected fraction with the fixed-point prediction"},
        {"scan", "sweep the seed density across the critical exponent (power law)"},
        {"trajectory", "sequential exposure against the fluid-limit ODE"},
        {"sandwich", "coupled lower and upper discretised graphs around CL(w)"},
        {"kernel", "percolation restricted to the high-weight kernel (power law)"},
        {"theory", "solve the fixed-point equation only"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
        sub->add_option("--seed", o.seed, "master seed");
        sub->add_option("--replicates", o.replicates, "number of replicates");
        sub->add_option("--threads", o.threads, "worker threads");
        sub->add_option("-n,--n", o.n, "number of vertices");
        sub->add_option("--out", o.out, "output directory");
        sub->add_flag("--print-config", o.print_config, "print the effective config and exit");
        sub->callback([&chosen, n = std::string(name)] { chosen = n; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        return run(chosen, o);
    } catch (const bootperc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return 2;
    } catch (const bootperc::InvariantViolation& e) {
        std::cerr << "invariant violated: " << e.what() << '\n';
        return 3;
    } catch (const bootperc::NumericFailure& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
