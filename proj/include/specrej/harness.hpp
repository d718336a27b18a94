#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "specrej/decoding.hpp"
#include "specrej/model.hpp"
#include "specrej/reward.hpp"

namespace specrej::harness {

struct ModelConfig {
    std::string kind = "ngram";   // "ngram" | "scripted"
    std::string corpus;           // ngram: training text, one document per line
    std::string path;             // ngram: saved model (wins over corpus); scripted: json
    std::uint32_t order = 2;
    double smoothing = 0.0625;
};

struct RewardConfig {
    std::string kind = "mean_log_prob";  // "mean_log_prob" | "lexical"
    std::string table;                   // lexical: tsv path
};

struct PromptsConfig {
    std::string path;
    std::uint32_t limit = 0;  // 0: all
};

struct GridConfig {
    std::vector<std::uint32_t> n_values = {8, 16, 32, 64, 128, 256};
    std::vector<double> alpha_values = {0.2, 0.4, 0.5, 0.6, 0.8};
};

struct CorrelateConfig {
    std::uint32_t samples = 200;
    std::uint32_t tau = 0;  // 0: max_new_tokens / 2
};

struct RunSection {
    std::uint64_t seed = 1;
    std::string out = "out";
    std::uint32_t threads = 0;  // 0: hardware concurrency
};

/// Whole-run configuration.  JSON layout mirrors the struct nesting; every
/// field is optional and falls back to the defaults above.
struct RunConfig {
    ModelConfig model;
    RewardConfig reward;
    PromptsConfig prompts;
    DecodeConfig decode;     // seed field unused; run.seed is authoritative
    GridConfig grid;
    CorrelateConfig correlate;
    RunSection run;

    static RunConfig from_json(const nlohmann::json& doc);
    static RunConfig load_file(const std::string& path);
    nlohmann::json to_json() const;

    /// Dotted-path override, e.g. "budget.capacity=1024" or
    /// "grid.n_values=8,32".  Throws std::invalid_argument on unknown keys.
    void apply_override(const std::string& assignment);
};

struct PromptEntry {
    std::string id;
    std::string text;
};

/// One JSON object per line: {"id": "...", "prompt": "..."}.  Blank lines are
/// skipped; malformed lines raise with their line number.
std::vector<PromptEntry> load_prompts_jsonl(std::istream& in, std::uint32_t limit);
std::vector<PromptEntry> load_prompts_file(const std::string& path, std::uint32_t limit);

std::unique_ptr<GenerativeModel> build_model(const ModelConfig& cfg);
RewardSpec build_reward(const RewardConfig& cfg);

/// Report JSON plus any side files (CSV name -> content).  Callers persist
/// with write_output_dir.
struct CommandOutput {
    nlohmann::json report;
    std::map<std::string, std::string> files;
};

/// Train an n-gram model from cfg.model.corpus and save it to `model_out`.
void cmd_train(const RunConfig& cfg, const std::string& model_out);

/// Decode one prompt with "bon" or "specrej" and report winner, reward and
/// compute.  Uses run.seed directly (no per-prompt derivation), so the same
/// command line reproduces byte-identically.
CommandOutput cmd_generate(const RunConfig& cfg, const std::string& strategy,
                           const std::string& prompt_text);

/// Sweep the N x alpha grid over the prompt file.  Per prompt, all best-of-N
/// settings share one batch of sequences (stream k of Bo-8 is stream k of
/// Bo-256), and the rejection runs reuse those streams' seeds, so every
/// comparison is on identical randomness.  Emits one point per prompt per
/// setting plus per-setting averages.
CommandOutput cmd_benchmark(const RunConfig& cfg);

/// Score every sample at the decision length and at completion, then report
/// per-prompt correlation between the two.  Prompts whose scores have zero
/// variance on either side are flagged degenerate and excluded from the
/// pooled medians.
CommandOutput cmd_correlate(const RunConfig& cfg);

/// Write report.json and side files under `out_dir`, each via a temp file
/// and rename so readers never observe a half-written report.
void write_output_dir(const std::string& out_dir, const CommandOutput& out);

std::string read_text_file(const std::string& path);
void write_text_atomic(const std::string& path, const std::string& content);

} // namespace specrej::harness
