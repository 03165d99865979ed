#include <iostream>
#include <string>

#include "stabforge/harness.hpp"

#include "CLI11.hpp"

namespace {

using stabforge::CampaignConfig;
using stabforge::GraphSpec;

void add_common_options(CLI::App* cmd, CampaignConfig& config,
                        std::string& gen_kind, std::string& bound_text) {
    cmd->add_option("--instance", config.instance,
                    "algorithm: leader | bfs | color3 | cluster-front");
    cmd->add_option("--graph", config.graph.file, "graph JSON file");
    cmd->add_option("--gen", gen_kind,
                    "generator: path | ring | oriented-ring | star | random-connected");
    cmd->add_option("--n", config.graph.n, "generated graph size");
    cmd->add_option("--edge-prob", config.graph.extra_edge_prob,
                    "extra edge probability (random-connected)");
    cmd->add_option("--seed", config.seed,
                    "master seed (STABFORGE_SEED overrides)");
    cmd->add_option("--c", config.options.color_exponent,
                    "identifier-space exponent (color3)");
    cmd->add_option("--mode", [&config](const std::vector<std::string>& vals) {
        if (vals.back() == "lazy")
            config.params.mode = stabforge::Mode::Lazy;
        else if (vals.back() == "greedy")
            config.params.mode = stabforge::Mode::Greedy;
        else
            return false;
        return true;
    }, "transformation mode: lazy | greedy");
    cmd->add_option("--bound", bound_text, "history bound B, or 'inf'");
    cmd->add_option("--daemon", config.daemon,
                    "sync | central-random | dist-random | adv | script:FILE");
    cmd->add_option("--script", config.script_file, "script file (scripted daemon)");
    cmd->add_option("--max-steps", config.max_steps, "step budget (0 = auto)");
    cmd->add_option("--row-cap", config.params.row_cap,
                    "history row cap (0 = 8n+64)");
    cmd->add_option("--jobs", config.jobs, "worker threads (0 = hardware)");
    cmd->add_option("--out", config.out_dir, "output directory");
}

void finish_config(CampaignConfig& config, const std::string& gen_kind,
                   const std::string& bound_text) {
    if (!config.graph.file.empty())
        config.graph.kind = GraphSpec::Kind::File;
    else
        config.graph.kind = stabforge::graph_kind_from_name(gen_kind);
    if (bound_text == "inf") {
        config.params.bound.reset();
    } else if (!bound_text.empty()) {
        const long v = std::stol(bound_text);
        if (v < 1) throw std::invalid_argument("--bound must be at least 1 or 'inf'");
        config.params.bound = static_cast<std::uint32_t>(v);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation and verification workbench for silent "
                 "self-stabilizing history-replay systems"};
    app.require_subcommand(1);

    CampaignConfig config;
    std::string gen_kind = "random-connected";
    std::string bound_text;

    CLI::App* oracle = app.add_subcommand(
        "oracle", "run the fault-free synchronous algorithm to stability");
    add_common_options(oracle, config, gen_kind, bound_text);

    CLI::App* run = app.add_subcommand(
        "run", "one asynchronous execution with bound and invariant checks");
    add_common_options(run, config, gen_kind, bound_text);
    run->add_flag("--corrupt", config.corrupt,
                  "start from a corrupted configuration");
    run->add_option("--init-config", config.init_config_file,
                    "initial configuration snapshot (JSON)");

    CLI::App* fuzz = app.add_subcommand(
        "fuzz", "campaign over corrupted initial configurations");
    add_common_options(fuzz, config, gen_kind, bound_text);
    fuzz->add_option("--fuzz", config.fuzz_count, "number of corrupted starts");

    std::uint32_t rollback_x = 3;
    bool rollback_no_contrast = false;
    CLI::App* rollback = app.add_subcommand(
        "rollback", "exponential lower bound of the full-recompute baseline");
    rollback->add_option("--x", rollback_x, "gadget chain length");
    rollback->add_flag("--no-contrast", rollback_no_contrast,
                       "skip the history-replay comparison run");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(oracle)) {
            finish_config(config, gen_kind, bound_text);
            return stabforge::cmd_oracle(config, std::cout, std::cerr);
        }
        if (app.got_subcommand(run)) {
            finish_config(config, gen_kind, bound_text);
            return stabforge::cmd_run(config, std::cout, std::cerr);
        }
        if (app.got_subcommand(fuzz)) {
            finish_config(config, gen_kind, bound_text);
            return stabforge::cmd_fuzz(config, std::cout, std::cerr);
        }
        if (app.got_subcommand(rollback))
            return stabforge::cmd_rollback(rollback_x, !rollback_no_contrast,
                                           std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
