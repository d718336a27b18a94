#include "specrej/scripted.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace specrej {

ScriptedModel::ScriptedModel(Vocabulary vocab, std::vector<ScriptedResponse> scripts)
    : vocab_(std::move(vocab)), scripts_(std::move(scripts)) {
    if (scripts_.empty()) throw std::invalid_argument("scripted model needs at least one response");
    for (const auto& s : scripts_) {
        if (s.tokens.empty()) throw std::invalid_argument("empty response");
        if (s.tokens.size() != s.log_probs.size())
            throw std::invalid_argument("scripted response token/prob length mismatch");
        if (s.tokens.back() != vocab_.eos_id())
            throw std::invalid_argument("scripted response must end in <eos>");
        for (TokenId t : s.tokens)
            if (t >= vocab_.size()) throw std::out_of_range("unknown token id");
    }
}

const ScriptedResponse& ScriptedModel::script(std::uint32_t stream) const {
    return scripts_[stream % scripts_.size()];
}

TokenId ScriptedModel::token_at(std::uint32_t stream, std::size_t step) const {
    const auto& s = script(stream);
    // Past the script end (possible only if the decoder ignored <eos>): keep
    // emitting <eos> so the sequence still terminates.
    return step < s.tokens.size() ? s.tokens[step] : vocab_.eos_id();
}

std::vector<double> ScriptedModel::next_token_dist(std::span<const TokenId> /*prompt*/,
                                                   std::span<const TokenId> generated,
                                                   std::uint32_t stream) const {
    std::vector<double> dist(vocab_.size(), 0.0);
    dist[token_at(stream, generated.size())] = 1.0;
    return dist;
}

double ScriptedModel::step_log_prob(std::span<const TokenId> /*prompt*/,
                                    std::span<const TokenId> generated,
                                    TokenId token, std::uint32_t stream) const {
    if (token >= vocab_.size()) throw std::out_of_range("unknown token id");
    const auto& s = script(stream);
    const std::size_t step = generated.size();
    if (step < s.log_probs.size() && token == s.tokens[step]) return s.log_probs[step];
    if (step >= s.tokens.size() && token == vocab_.eos_id()) return 0.0;
    return -std::numeric_limits<double>::infinity();
}

ScriptedModel ScriptedModel::load_json(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("bad scripted model file: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("responses") || !doc["responses"].is_array() ||
        doc["responses"].empty())
        throw std::runtime_error("bad scripted model file: missing responses");

    Vocabulary vocab;
    std::vector<ScriptedResponse> scripts;
    for (const auto& r : doc["responses"]) {
        if (!r.contains("tokens") || !r["tokens"].is_array() || r["tokens"].empty())
            throw std::runtime_error("bad scripted model file: response without tokens");
        ScriptedResponse resp;
        for (const auto& t : r["tokens"])
            resp.tokens.push_back(vocab.intern(t.get<std::string>()));
        if (r.contains("probs")) {
            for (const auto& p : r["probs"]) {
                const double prob = p.get<double>();
                if (!(prob > 0.0) || prob > 1.0)
                    throw std::runtime_error("bad scripted model file: prob outside (0, 1]");
                resp.log_probs.push_back(std::log(prob));
            }
            if (resp.log_probs.size() != resp.tokens.size())
                throw std::runtime_error("bad scripted model file: probs length mismatch");
        } else {
            resp.log_probs.assign(resp.tokens.size(), 0.0);
        }
        if (resp.tokens.back() != vocab.eos_id()) {
            resp.tokens.push_back(vocab.eos_id());
            resp.log_probs.push_back(0.0);
        }
        scripts.push_back(std::move(resp));
    }
    return ScriptedModel(std::move(vocab), std::move(scripts));
}

} // namespace specrej
