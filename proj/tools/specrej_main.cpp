// Command-line front end: train / generate / benchmark / correlate.
// Failures exit nonzero with one machine-readable JSON object on stderr.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "specrej/harness.hpp"

namespace {

using specrej::harness::CommandOutput;
using specrej::harness::RunConfig;

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<double> alpha;
    std::optional<std::uint32_t> n;
    std::optional<std::uint64_t> budget_capacity;
    std::optional<std::uint32_t> max_new_tokens;
    std::optional<std::string> out_dir;
    std::optional<std::uint32_t> threads;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "JSON config file");
    cmd->add_option("--set", args.overrides,
                    "Config override, section.key=value (repeatable)");
    cmd->add_option("--seed", args.seed, "Run seed");
    cmd->add_option("--alpha", args.alpha, "Rejection fraction in [0,1)");
    cmd->add_option("--n", args.n, "Best-of-N batch size");
    cmd->add_option("--budget-capacity", args.budget_capacity,
                    "Simulated memory capacity in cost units");
    cmd->add_option("--max-new-tokens", args.max_new_tokens, "Generation length cap");
    cmd->add_option("--out", args.out_dir, "Output directory");
    cmd->add_option("--threads", args.threads, "Worker threads (0 = all cores)");
}

RunConfig resolve_config(const CommonArgs& args) {
    RunConfig cfg = args.config_path.empty() ? RunConfig()
                                             : RunConfig::load_file(args.config_path);
    for (const auto& assignment : args.overrides) cfg.apply_override(assignment);
    if (args.seed) cfg.run.seed = *args.seed;
    if (args.alpha) cfg.decode.alpha = *args.alpha;
    if (args.n) cfg.decode.n = *args.n;
    if (args.budget_capacity) cfg.decode.budget.capacity = *args.budget_capacity;
    if (args.max_new_tokens) cfg.decode.max_new_tokens = *args.max_new_tokens;
    if (args.out_dir) cfg.run.out = *args.out_dir;
    if (args.threads) cfg.run.threads = *args.threads;
    return cfg;
}

int fail(const std::string& command, const std::exception& e) {
    nlohmann::json err{{"error", e.what()}, {"command", command}};
    std::cerr << err.dump() << "\n";
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reward-guided decoding: best-of-N and budgeted early rejection"};
    app.require_subcommand(1);

    CommonArgs train_args, gen_args, bench_args, corr_args;
    std::string model_out = "out/model.txt";
    std::string strategy = "specrej";
    std::string prompt_text;
    std::optional<std::uint32_t> tau_opt, samples_opt;

    CLI::App* train = app.add_subcommand("train", "Fit the n-gram model and save it");
    add_common(train, train_args);
    train->add_option("--model-out", model_out, "Where to write the model");

    CLI::App* generate = app.add_subcommand("generate", "Decode one prompt");
    add_common(generate, gen_args);
    generate->add_option("--strategy", strategy, "bon or specrej");
    generate->add_option("--prompt", prompt_text, "Prompt text")->required();

    CLI::App* benchmark = app.add_subcommand("benchmark", "Sweep the N x alpha grid");
    add_common(benchmark, bench_args);

    CLI::App* correlate =
        app.add_subcommand("correlate", "Early-score vs final-score correlation");
    add_common(correlate, corr_args);
    correlate->add_option("--tau", tau_opt, "Decision length (0 = half the token cap)");
    correlate->add_option("--samples", samples_opt, "Sequences per prompt");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) {
            RunConfig cfg = resolve_config(train_args);
            specrej::harness::cmd_train(cfg, model_out);
            std::cout << "model written to " << model_out << "\n";
            return 0;
        }
        if (generate->parsed()) {
            RunConfig cfg = resolve_config(gen_args);
            CommandOutput out = specrej::harness::cmd_generate(cfg, strategy, prompt_text);
            std::cout << out.report.dump(2) << "\n";
            if (gen_args.out_dir) specrej::harness::write_output_dir(cfg.run.out, out);
            return 0;
        }
        if (benchmark->parsed()) {
            RunConfig cfg = resolve_config(bench_args);
            CommandOutput out = specrej::harness::cmd_benchmark(cfg);
            specrej::harness::write_output_dir(cfg.run.out, out);
            std::cout << "benchmark report written to " << cfg.run.out << "\n";
            return 0;
        }
        RunConfig cfg = resolve_config(corr_args);
        if (tau_opt) cfg.correlate.tau = *tau_opt;
        if (samples_opt) cfg.correlate.samples = *samples_opt;
        CommandOutput out = specrej::harness::cmd_correlate(cfg);
        specrej::harness::write_output_dir(cfg.run.out, out);
        std::cout << "correlation report written to " << cfg.run.out << "\n";
        return 0;
    } catch (const std::exception& e) {
        const char* command = train->parsed()      ? "train"
                              : generate->parsed() ? "generate"
                              : benchmark->parsed() ? "benchmark"
                                                    : "correlate";
        return fail(command, e);
    }
}
