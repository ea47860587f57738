#include <CLI11.hpp>

#include "cdn/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"cdnroute: CDN price-competition equilibria and latency-SLA request routing"};
    app.require_subcommand(1);

    cdn::cli::Command cmd;
    const struct {
        const char* name;
        const char* help;
    } subs[] = {
        {"equilibrium", "Nash equilibrium prices, shares and revenues for K competing CDNs"},
        {"ratio-sweep", "duopoly revenue ratio J1/J2 across beta values"},
        {"chain", "exact single-server birth-death analysis"},
        {"scaling", "analytic throughput-vs-bound scaling sweep"},
        {"static-solve", "two-stage static routing plan for a server layout"},
        {"dp-solve", "optimal dynamic routing policy via value iteration"},
        {"simulate", "discrete-event simulation of a routing policy"},
        {"compare", "simulate several policies under common random numbers"},
        {"sim-scaling", "simulated throughput-vs-bound scaling experiment"},
    };
    for (const auto& s : subs) {
        auto* sub = app.add_subcommand(s.name, s.help);
        sub->add_option("--config", cmd.config_path, "JSON config path")->required();
        sub->add_option("--out", cmd.out_path, "output artifact path")->required();
        sub->add_option("--format", cmd.format, "csv or json")->default_val("csv");
        sub->add_option("--seed", cmd.seed, "seed override")->each([&](const std::string&) {
            cmd.seed_set = true;
        });
        sub->callback([&cmd, name = std::string(s.name)] { cmd.subcommand = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    }
    return cdn::cli::dispatch(cmd);
}
