#include "specrej/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "specrej/ngram.hpp"
#include "specrej/rng.hpp"
#include "specrej/scripted.hpp"

namespace specrej::harness {

namespace {

using nlohmann::json;

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
    if (!obj.is_object() || !obj.contains(key)) return fallback;
    return obj.at(key).get<T>();
}

/// Shortest round-trip decimal form, same on every platform.
std::string fmt_double(double v) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

std::uint64_t parse_u64(const std::string& s) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw std::invalid_argument("not an unsigned integer: " + s);
    return v;
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto comma = s.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

/// Static index partition: worker t takes i = t, t+T, t+2T, ...  Output slots
/// are preallocated by index, so the result is independent of scheduling.
void parallel_over(std::size_t count, std::uint32_t threads,
                   const std::function<void(std::size_t)>& fn) {
    std::uint32_t t_count = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    t_count = static_cast<std::uint32_t>(
        std::min<std::uint64_t>(t_count, count ? count : 1));
    if (t_count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::mutex err_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(t_count);
    for (std::uint32_t t = 0; t < t_count; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < count; i += t_count) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::string decode_without_eos(const Vocabulary& vocab, const Sequence& seq) {
    std::vector<TokenId> toks = seq.generated;
    if (!toks.empty() && toks.back() == vocab.eos_id()) toks.pop_back();
    return vocab.decode(toks);
}

json tally_to_json(const ComputeTally& t) {
    return json{{"generated_tokens", t.generated_tokens},
                {"attention_units", t.attention_units},
                {"reward_calls", t.reward_calls},
                {"reward_tokens_scored", t.reward_tokens_scored}};
}

json rounds_to_json(const std::vector<RejectionRoundRecord>& rounds) {
    json arr = json::array();
    for (const auto& r : rounds) {
        arr.push_back(json{{"round", r.round_index},
                           {"decision_length", r.decision_length},
                           {"batch_before", r.batch_before},
                           {"batch_after", r.batch_after},
                           {"cutoff", r.cutoff},
                           {"peak_footprint", r.peak_footprint},
                           {"completed", r.completed_streams.size()},
                           {"accepted", r.accepted_streams.size()}});
    }
    return arr;
}

} // namespace

RunConfig RunConfig::from_json(const json& doc) {
    RunConfig cfg;
    const json model = doc.value("model", json::object());
    cfg.model.kind = get_or<std::string>(model, "kind", cfg.model.kind);
    cfg.model.corpus = get_or<std::string>(model, "corpus", cfg.model.corpus);
    cfg.model.path = get_or<std::string>(model, "path", cfg.model.path);
    cfg.model.order = get_or<std::uint32_t>(model, "order", cfg.model.order);
    cfg.model.smoothing = get_or<double>(model, "smoothing", cfg.model.smoothing);

    const json reward = doc.value("reward", json::object());
    cfg.reward.kind = get_or<std::string>(reward, "kind", cfg.reward.kind);
    cfg.reward.table = get_or<std::string>(reward, "table", cfg.reward.table);

    const json prompts = doc.value("prompts", json::object());
    cfg.prompts.path = get_or<std::string>(prompts, "path", cfg.prompts.path);
    cfg.prompts.limit = get_or<std::uint32_t>(prompts, "limit", cfg.prompts.limit);

    const json decode = doc.value("decode", json::object());
    cfg.decode.alpha = get_or<double>(decode, "alpha", cfg.decode.alpha);
    cfg.decode.n = get_or<std::uint32_t>(decode, "n", cfg.decode.n);
    cfg.decode.max_new_tokens =
        get_or<std::uint32_t>(decode, "max_new_tokens", cfg.decode.max_new_tokens);
    cfg.decode.batch_cap = get_or<std::uint32_t>(decode, "batch_cap", cfg.decode.batch_cap);

    const json budget = doc.value("budget", json::object());
    cfg.decode.budget.capacity =
        get_or<std::uint64_t>(budget, "capacity", cfg.decode.budget.capacity);
    cfg.decode.budget.prompt_cost =
        get_or<std::uint64_t>(budget, "prompt_cost", cfg.decode.budget.prompt_cost);
    cfg.decode.budget.gen_cost =
        get_or<std::uint64_t>(budget, "gen_cost", cfg.decode.budget.gen_cost);
    cfg.decode.budget.headroom =
        get_or<std::uint64_t>(budget, "headroom", cfg.decode.budget.headroom);

    const json grid = doc.value("grid", json::object());
    cfg.grid.n_values = get_or<std::vector<std::uint32_t>>(grid, "n_values", cfg.grid.n_values);
    cfg.grid.alpha_values =
        get_or<std::vector<double>>(grid, "alpha_values", cfg.grid.alpha_values);

    const json correlate = doc.value("correlate", json::object());
    cfg.correlate.samples = get_or<std::uint32_t>(correlate, "samples", cfg.correlate.samples);
    cfg.correlate.tau = get_or<std::uint32_t>(correlate, "tau", cfg.correlate.tau);

    const json run = doc.value("run", json::object());
    cfg.run.seed = get_or<std::uint64_t>(run, "seed", cfg.run.seed);
    cfg.run.out = get_or<std::string>(run, "out", cfg.run.out);
    cfg.run.threads = get_or<std::uint32_t>(run, "threads", cfg.run.threads);
    return cfg;
}

RunConfig RunConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error("bad config file " + path + ": " + e.what());
    }
    return from_json(doc);
}

json RunConfig::to_json() const {
    return json{
        {"model",
         {{"kind", model.kind},
          {"corpus", model.corpus},
          {"path", model.path},
          {"order", model.order},
          {"smoothing", model.smoothing}}},
        {"reward", {{"kind", reward.kind}, {"table", reward.table}}},
        {"prompts", {{"path", prompts.path}, {"limit", prompts.limit}}},
        {"decode",
         {{"alpha", decode.alpha},
          {"n", decode.n},
          {"max_new_tokens", decode.max_new_tokens},
          {"batch_cap", decode.batch_cap}}},
        {"budget",
         {{"capacity", decode.budget.capacity},
          {"prompt_cost", decode.budget.prompt_cost},
          {"gen_cost", decode.budget.gen_cost},
          {"headroom", decode.budget.headroom}}},
        {"grid", {{"n_values", grid.n_values}, {"alpha_values", grid.alpha_values}}},
        {"correlate", {{"samples", correlate.samples}, {"tau", correlate.tau}}},
        {"run", {{"seed", run.seed}, {"out", run.out}, {"threads", run.threads}}}};
}

void RunConfig::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("override must look like section.key=value: " + assignment);
    const std::string key = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);

    auto as_u32 = [&] { return static_cast<std::uint32_t>(parse_u64(value)); };
    auto as_u64 = [&] { return parse_u64(value); };
    auto as_f = [&] { return std::strtod(value.c_str(), nullptr); };

    if (key == "model.kind") model.kind = value;
    else if (key == "model.corpus") model.corpus = value;
    else if (key == "model.path") model.path = value;
    else if (key == "model.order") model.order = as_u32();
    else if (key == "model.smoothing") model.smoothing = as_f();
    else if (key == "reward.kind") reward.kind = value;
    else if (key == "reward.table") reward.table = value;
    else if (key == "prompts.path") prompts.path = value;
    else if (key == "prompts.limit") prompts.limit = as_u32();
    else if (key == "decode.alpha") decode.alpha = as_f();
    else if (key == "decode.n") decode.n = as_u32();
    else if (key == "decode.max_new_tokens") decode.max_new_tokens = as_u32();
    else if (key == "decode.batch_cap") decode.batch_cap = as_u32();
    else if (key == "budget.capacity") decode.budget.capacity = as_u64();
    else if (key == "budget.prompt_cost") decode.budget.prompt_cost = as_u64();
    else if (key == "budget.gen_cost") decode.budget.gen_cost = as_u64();
    else if (key == "budget.headroom") decode.budget.headroom = as_u64();
    else if (key == "grid.n_values") {
        grid.n_values.clear();
        for (const auto& part : split_csv(value))
            grid.n_values.push_back(static_cast<std::uint32_t>(parse_u64(part)));
    } else if (key == "grid.alpha_values") {
        grid.alpha_values.clear();
        for (const auto& part : split_csv(value))
            grid.alpha_values.push_back(std::strtod(part.c_str(), nullptr));
    } else if (key == "correlate.samples") correlate.samples = as_u32();
    else if (key == "correlate.tau") correlate.tau = as_u32();
    else if (key == "run.seed") run.seed = as_u64();
    else if (key == "run.out") run.out = value;
    else if (key == "run.threads") run.threads = as_u32();
    else throw std::invalid_argument("unknown config key: " + key);
}

std::vector<PromptEntry> load_prompts_jsonl(std::istream& in, std::uint32_t limit) {
    std::vector<PromptEntry> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::exception& e) {
            throw std::runtime_error("bad prompt line " + std::to_string(line_no) + ": " +
                                     e.what());
        }
        if (!doc.is_object() || !doc.contains("id") || !doc.contains("prompt"))
            throw std::runtime_error("bad prompt line " + std::to_string(line_no) +
                                     ": need id and prompt");
        out.push_back({doc["id"].get<std::string>(), doc["prompt"].get<std::string>()});
        if (limit != 0 && out.size() == limit) break;
    }
    return out;
}

std::vector<PromptEntry> load_prompts_file(const std::string& path, std::uint32_t limit) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    return load_prompts_jsonl(in, limit);
}

std::unique_ptr<GenerativeModel> build_model(const ModelConfig& cfg) {
    if (cfg.kind == "ngram") {
        if (!cfg.path.empty()) {
            std::ifstream in(cfg.path);
            if (!in) throw std::runtime_error("cannot open file: " + cfg.path);
            return std::make_unique<NGramModel>(NGramModel::load(in));
        }
        if (cfg.corpus.empty())
            throw std::invalid_argument("ngram model needs model.corpus or model.path");
        std::ifstream in(cfg.corpus);
        if (!in) throw std::runtime_error("cannot open file: " + cfg.corpus);
        std::vector<std::string> lines;
        std::string line;
        while (std::getline(in, line)) lines.push_back(line);
        return std::make_unique<NGramModel>(
            train_ngram_text(lines, cfg.order, cfg.smoothing));
    }
    if (cfg.kind == "scripted") {
        if (cfg.path.empty()) throw std::invalid_argument("scripted model needs model.path");
        std::ifstream in(cfg.path);
        if (!in) throw std::runtime_error("cannot open file: " + cfg.path);
        return std::make_unique<ScriptedModel>(ScriptedModel::load_json(in));
    }
    throw std::invalid_argument("unknown model kind: " + cfg.kind);
}

RewardSpec build_reward(const RewardConfig& cfg) {
    if (cfg.kind == "mean_log_prob") return RewardSpec::mean_log_prob();
    if (cfg.kind == "lexical") {
        if (cfg.table.empty()) throw std::invalid_argument("lexical reward needs reward.table");
        std::ifstream in(cfg.table);
        if (!in) throw std::runtime_error("cannot open file: " + cfg.table);
        return RewardSpec::lexical(LexicalRewardTable::load(in));
    }
    throw std::invalid_argument("unknown reward kind: " + cfg.kind);
}

void cmd_train(const RunConfig& cfg, const std::string& model_out) {
    if (cfg.model.corpus.empty())
        throw std::invalid_argument("ngram model needs model.corpus or model.path");
    std::ifstream in(cfg.model.corpus);
    if (!in) throw std::runtime_error("cannot open file: " + cfg.model.corpus);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    NGramModel model = train_ngram_text(lines, cfg.model.order, cfg.model.smoothing);
    std::ostringstream buf;
    model.save(buf);
    write_text_atomic(model_out, buf.str());
}

CommandOutput cmd_generate(const RunConfig& cfg, const std::string& strategy,
                           const std::string& prompt_text) {
    auto model = build_model(cfg.model);
    const RewardSpec reward = build_reward(cfg.reward);
    const std::vector<TokenId> prompt_ids = model->vocab().encode_const(prompt_text);

    DecodeConfig dc = cfg.decode;
    dc.seed = cfg.run.seed;

    DecodeOutcome outcome;
    if (strategy == "bon") {
        outcome = best_of_n(*model, reward, prompt_ids, dc);
    } else if (strategy == "specrej") {
        outcome = speculative_rejection(*model, reward, prompt_ids, dc);
    } else {
        throw std::invalid_argument("unknown strategy: " + strategy);
    }

    json report{{"schema_version", 1},
                {"command", "generate"},
                {"strategy", strategy},
                {"seed", cfg.run.seed},
                {"prompt", prompt_text},
                {"prompt_tokens", prompt_ids.size()},
                {"config", cfg.to_json()},
                {"winner",
                 {{"text", decode_without_eos(model->vocab(), outcome.winner)},
                  {"reward", outcome.winner_reward},
                  {"stream", outcome.winner.stream},
                  {"generated_tokens", outcome.winner.generated.size()}}},
                {"candidate_pool_size", outcome.candidate_pool_size},
                {"compute", tally_to_json(outcome.compute)}};
    if (strategy == "specrej") report["rounds"] = rounds_to_json(outcome.rounds);
    return {report, {}};
}

namespace {

struct PointRow {
    std::string prompt_id;
    std::string strategy;
    double setting = 0.0;
    bool setting_is_int = false;
    bool ok = false;
    double winner_reward = 0.0;
    std::uint64_t generated_tokens = 0;
    double relative_compute = 0.0;
    double attention_ratio = 0.0;
    double speedup = 0.0;
    double improvement = 0.0;
    std::string error;

    std::string setting_text() const {
        if (setting_is_int) return std::to_string(static_cast<std::uint64_t>(setting));
        return fmt_double(setting);
    }
};

struct BenchPrompt {
    json record;
    std::vector<PointRow> rows;
};

} // namespace

CommandOutput cmd_benchmark(const RunConfig& cfg) {
    if (cfg.grid.n_values.empty())
        throw std::invalid_argument("grid needs at least one n value");
    if (cfg.prompts.path.empty()) throw std::invalid_argument("prompts.path required");

    const auto prompts = load_prompts_file(cfg.prompts.path, cfg.prompts.limit);
    if (prompts.empty()) throw std::invalid_argument("prompt file has no prompts");

    auto model = build_model(cfg.model);
    const RewardSpec reward = build_reward(cfg.reward);

    const std::uint32_t n_min = *std::min_element(cfg.grid.n_values.begin(),
                                                  cfg.grid.n_values.end());
    const std::uint32_t n_max = *std::max_element(cfg.grid.n_values.begin(),
                                                  cfg.grid.n_values.end());
    if (n_min == 0) throw std::invalid_argument("n must be positive");

    std::vector<BenchPrompt> results(prompts.size());
    parallel_over(prompts.size(), cfg.run.threads, [&](std::size_t p) {
        const PromptEntry& entry = prompts[p];
        const std::uint64_t seed_p = rng::derive_prompt_seed(cfg.run.seed, entry.id);
        const std::vector<TokenId> prompt_ids = model->vocab().encode_const(entry.text);

        BenchPrompt res;
        res.record = json{{"id", entry.id},
                          {"prompt", entry.text},
                          {"prompt_tokens", prompt_ids.size()},
                          {"seed", seed_p}};

        // One shared batch serves every best-of-N setting: the first N
        // streams of it ARE the Bo-N run, because streams are seeded by
        // index alone.
        std::vector<std::uint64_t> lengths(n_max);
        std::vector<double> finals(n_max);
        for (std::uint32_t k = 0; k < n_max; ++k) {
            Sequence seq = sample_full(*model, prompt_ids, seed_p, k,
                                       cfg.decode.max_new_tokens);
            lengths[k] = seq.generated.size();
            finals[k] = reward.score_final(*model, seq);
        }
        auto bon_tally = [&](std::uint32_t n) {
            ComputeTally t;
            for (std::uint32_t k = 0; k < n; ++k) {
                t.generated_tokens += lengths[k];
                t.attention_units += lengths[k] * (lengths[k] + 1) / 2;
                t.reward_calls += 1;
                t.reward_tokens_scored += lengths[k];
            }
            return t;
        };
        auto bon_best = [&](std::uint32_t n) {
            std::size_t best = 0;
            for (std::size_t k = 1; k < n; ++k)
                if (finals[k] > finals[best]) best = k;
            return finals[best];
        };
        const ComputeTally base_min = bon_tally(n_min);
        const ComputeTally base_max = bon_tally(n_max);
        const std::span<const double> ref_rewards(finals.data(), n_min);

        json points = json::array();
        auto push_point = [&](PointRow row) {
            json pt{{"strategy", row.strategy},
                    {"setting", row.setting_is_int
                                    ? json(static_cast<std::uint64_t>(row.setting))
                                    : json(row.setting)}};
            if (row.ok) {
                pt["winner_reward"] = row.winner_reward;
                pt["generated_tokens"] = row.generated_tokens;
                pt["relative_compute"] = row.relative_compute;
                pt["attention_ratio"] = row.attention_ratio;
                pt["speedup"] = row.speedup;
                pt["improvement_score"] = row.improvement;
            } else {
                pt["error"] = row.error;
            }
            points.push_back(pt);
            res.rows.push_back(std::move(row));
        };

        for (std::uint32_t n : cfg.grid.n_values) {
            const ComputeTally t = bon_tally(n);
            PointRow row;
            row.prompt_id = entry.id;
            row.strategy = "bon";
            row.setting = n;
            row.setting_is_int = true;
            row.ok = true;
            row.winner_reward = bon_best(n);
            row.generated_tokens = t.generated_tokens;
            row.relative_compute = metrics::relative_compute(t, base_min);
            row.attention_ratio = metrics::attention_ratio(t, base_min);
            row.speedup = metrics::speedup(t, base_max);
            row.improvement = metrics::improvement_score(row.winner_reward, ref_rewards);
            push_point(std::move(row));
        }

        json sr_runs = json::array();
        for (double alpha : cfg.grid.alpha_values) {
            DecodeConfig dc = cfg.decode;
            dc.seed = seed_p;
            dc.alpha = alpha;
            PointRow row;
            row.prompt_id = entry.id;
            row.strategy = "specrej";
            row.setting = alpha;
            try {
                const DecodeOutcome sr =
                    speculative_rejection(*model, reward, prompt_ids, dc);
                row.ok = true;
                row.winner_reward = sr.winner_reward;
                row.generated_tokens = sr.compute.generated_tokens;
                row.relative_compute = metrics::relative_compute(sr.compute, base_min);
                row.attention_ratio = metrics::attention_ratio(sr.compute, base_min);
                row.speedup = metrics::speedup(sr.compute, base_max);
                row.improvement = metrics::improvement_score(sr.winner_reward, ref_rewards);
                sr_runs.push_back(json{{"alpha", alpha},
                                       {"pool_size", sr.candidate_pool_size},
                                       {"rounds", rounds_to_json(sr.rounds)}});
            } catch (const std::invalid_argument& e) {
                row.ok = false;
                row.error = e.what();
                sr_runs.push_back(json{{"alpha", alpha}, {"error", row.error}});
            }
            push_point(std::move(row));
        }
        res.record["points"] = points;
        res.record["sr_runs"] = sr_runs;
        results[p] = std::move(res);
    });

    // Aggregate in grid order over prompts that produced the point.
    json aggregates = json::array();
    std::string averages_csv =
        "strategy,setting,prompts,avg_relative_compute,avg_attention_ratio,"
        "avg_speedup,avg_improvement_score\n";
    auto aggregate = [&](const std::string& strategy, double setting, bool is_int) {
        double rel = 0, attn = 0, spd = 0, imp = 0;
        std::size_t count = 0;
        for (const auto& res : results)
            for (const auto& row : res.rows)
                if (row.ok && row.strategy == strategy && row.setting == setting) {
                    rel += row.relative_compute;
                    attn += row.attention_ratio;
                    spd += row.speedup;
                    imp += row.improvement;
                    ++count;
                }
        json agg{{"strategy", strategy},
                 {"setting", is_int ? json(static_cast<std::uint64_t>(setting)) : json(setting)},
                 {"prompts", count}};
        std::string setting_text =
            is_int ? std::to_string(static_cast<std::uint64_t>(setting)) : fmt_double(setting);
        if (count) {
            const double d = static_cast<double>(count);
            agg["avg_relative_compute"] = rel / d;
            agg["avg_attention_ratio"] = attn / d;
            agg["avg_speedup"] = spd / d;
            agg["avg_improvement_score"] = imp / d;
            averages_csv += strategy + "," + setting_text + "," + std::to_string(count) + "," +
                            fmt_double(rel / d) + "," + fmt_double(attn / d) + "," +
                            fmt_double(spd / d) + "," + fmt_double(imp / d) + "\n";
        } else {
            averages_csv += strategy + "," + setting_text + ",0,,,,\n";
        }
        aggregates.push_back(agg);
    };
    for (std::uint32_t n : cfg.grid.n_values) aggregate("bon", n, true);
    for (double a : cfg.grid.alpha_values) aggregate("specrej", a, false);

    std::string points_csv =
        "prompt_id,strategy,setting,winner_reward,generated_tokens,relative_compute,"
        "attention_ratio,speedup,improvement_score,error\n";
    json prompt_records = json::array();
    for (const auto& res : results) {
        prompt_records.push_back(res.record);
        for (const auto& row : res.rows) {
            points_csv += row.prompt_id + "," + row.strategy + "," + row.setting_text() + ",";
            if (row.ok) {
                points_csv += fmt_double(row.winner_reward) + "," +
                              std::to_string(row.generated_tokens) + "," +
                              fmt_double(row.relative_compute) + "," +
                              fmt_double(row.attention_ratio) + "," +
                              fmt_double(row.speedup) + "," + fmt_double(row.improvement) +
                              ",\n";
            } else {
                points_csv += ",,,,,," + row.error + "\n";
            }
        }
    }

    json report{{"schema_version", 1},
                {"command", "benchmark"},
                {"seed", cfg.run.seed},
                {"config", cfg.to_json()},
                {"baseline", {{"n_min", n_min}, {"n_max", n_max}}},
                {"prompts", prompt_records},
                {"aggregates", aggregates}};
    CommandOutput out;
    out.report = std::move(report);
    out.files["points.csv"] = std::move(points_csv);
    out.files["averages.csv"] = std::move(averages_csv);
    return out;
}

namespace {

struct CorrPrompt {
    json record;
    bool degenerate = false;
    double pearson = 0.0;
    double kendall = 0.0;
    double savings = 0.0;
    std::vector<double> partials;
    std::vector<double> finals;
    std::string scatter;
};

} // namespace

CommandOutput cmd_correlate(const RunConfig& cfg) {
    if (cfg.prompts.path.empty()) throw std::invalid_argument("prompts.path required");
    const auto prompts = load_prompts_file(cfg.prompts.path, cfg.prompts.limit);
    if (prompts.empty()) throw std::invalid_argument("prompt file has no prompts");
    if (cfg.correlate.samples < 2)
        throw std::invalid_argument("correlate.samples must be at least 2");

    auto model = build_model(cfg.model);
    const RewardSpec reward = build_reward(cfg.reward);
    const std::uint32_t tau =
        cfg.correlate.tau ? cfg.correlate.tau
                          : std::max<std::uint32_t>(1, cfg.decode.max_new_tokens / 2);

    std::vector<CorrPrompt> results(prompts.size());
    parallel_over(prompts.size(), cfg.run.threads, [&](std::size_t p) {
        const PromptEntry& entry = prompts[p];
        const std::uint64_t seed_p = rng::derive_prompt_seed(cfg.run.seed, entry.id);
        const std::vector<TokenId> prompt_ids = model->vocab().encode_const(entry.text);
        const std::uint32_t samples = cfg.correlate.samples;

        CorrPrompt res;
        res.partials.reserve(samples);
        res.finals.reserve(samples);
        std::vector<std::uint64_t> final_lens(samples), partial_lens(samples);
        std::uint64_t total_len = 0;
        for (std::uint32_t i = 0; i < samples; ++i) {
            Sequence seq;
            seq.prompt = prompt_ids;
            seq.stream = i;
            double cum_at_tau = 0.0;
            while (seq.status == SeqStatus::active) {
                extend_one(*model, seq, seed_p, cfg.decode.max_new_tokens);
                if (seq.generated.size() == tau) cum_at_tau = seq.cum_log_prob;
            }
            const std::uint64_t len = seq.generated.size();
            if (len < tau) cum_at_tau = seq.cum_log_prob;
            const std::uint64_t at = std::min<std::uint64_t>(tau, len);
            final_lens[i] = len;
            partial_lens[i] = at;
            total_len += len;
            res.partials.push_back(
                reward.score_prefix(*model, seq.generated, at, cum_at_tau));
            res.finals.push_back(reward.score_final(*model, seq));
            res.scatter += entry.id + "," + std::to_string(i) + "," +
                           fmt_double(res.partials.back()) + "," +
                           fmt_double(res.finals.back()) + "," + std::to_string(len) + "\n";
        }

        res.record = json{{"id", entry.id},
                          {"samples", samples},
                          {"decision_length", tau},
                          {"mean_final_length",
                           static_cast<double>(total_len) / static_cast<double>(samples)}};
        res.savings = metrics::oracle_token_savings(final_lens, partial_lens, res.partials,
                                                    res.finals);
        res.record["oracle_token_savings"] = res.savings;
        try {
            res.pearson = metrics::pearson(res.partials, res.finals);
            res.kendall = metrics::kendall_tau(res.partials, res.finals);
            const metrics::OlsFit fit = metrics::ols_fit(res.partials, res.finals);
            res.record["pearson"] = res.pearson;
            res.record["kendall"] = res.kendall;
            res.record["ols_slope"] = fit.slope;
            res.record["ols_intercept"] = fit.intercept;
            res.record["degenerate"] = false;
        } catch (const std::invalid_argument&) {
            res.degenerate = true;
            res.record["degenerate"] = true;
        }
        results[p] = std::move(res);
    });

    std::vector<double> pearsons, kendalls, savings_all;
    std::vector<double> pooled_x, pooled_y;
    json prompt_records = json::array();
    std::string scatter_csv = "prompt_id,sample,partial_reward,final_reward,final_length\n";
    std::size_t degenerate_count = 0;
    for (const auto& res : results) {
        prompt_records.push_back(res.record);
        scatter_csv += res.scatter;
        savings_all.push_back(res.savings);
        if (res.degenerate) {
            ++degenerate_count;
        } else {
            pearsons.push_back(res.pearson);
            kendalls.push_back(res.kendall);
        }
        pooled_x.insert(pooled_x.end(), res.partials.begin(), res.partials.end());
        pooled_y.insert(pooled_y.end(), res.finals.begin(), res.finals.end());
    }

    json pooled{{"prompts", prompts.size()},
                {"degenerate_prompts", degenerate_count},
                {"points", pooled_x.size()}};
    double mean_savings = 0.0;
    for (double s : savings_all) mean_savings += s;
    pooled["mean_oracle_token_savings"] =
        mean_savings / static_cast<double>(savings_all.size());
    if (!pearsons.empty()) {
        pooled["median_pearson"] = metrics::median(pearsons);
        pooled["median_kendall"] = metrics::median(kendalls);
        double mp = 0.0;
        for (double v : pearsons) mp += v;
        pooled["mean_pearson"] = mp / static_cast<double>(pearsons.size());
    }
    try {
        pooled["pooled_pearson"] = metrics::pearson(pooled_x, pooled_y);
        const metrics::OlsFit fit = metrics::ols_fit(pooled_x, pooled_y);
        pooled["pooled_ols_slope"] = fit.slope;
        pooled["pooled_ols_intercept"] = fit.intercept;
    } catch (const std::invalid_argument&) {
        pooled["pooled_degenerate"] = true;
    }

    json report{{"schema_version", 1},
                {"command", "correlate"},
                {"seed", cfg.run.seed},
                {"decision_length", tau},
                {"config", cfg.to_json()},
                {"prompts", prompt_records},
                {"pooled", pooled}};
    CommandOutput out;
    out.report = std::move(report);
    out.files["scatter.csv"] = std::move(scatter_csv);
    return out;
}

void write_output_dir(const std::string& out_dir, const CommandOutput& out) {
    std::filesystem::create_directories(out_dir);
    write_text_atomic(out_dir + "/report.json", out.report.dump(2) + "\n");
    for (const auto& [name, content] : out.files)
        write_text_atomic(out_dir + "/" + name, content);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open file: " + tmp);
        out << content;
        if (!out) throw std::runtime_error("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

} // namespace specrej::harness
