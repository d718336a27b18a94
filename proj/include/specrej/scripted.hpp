#pragma once

#include <iosfwd>
#include <vector>

#include "specrej/model.hpp"
#include "specrej/vocab.hpp"

namespace specrej {

/// One pre-written response: the tokens a stream will emit, plus the step
/// log-probability the model claims for each.  Claimed values are independent
/// of the sampling distribution (which is a point mass), so tests can dial in
/// any likelihood-based score while generation stays deterministic.
struct ScriptedResponse {
    std::vector<TokenId> tokens;      // must end in <eos>
    std::vector<double> log_probs;    // same length as tokens
};

/// Test double for GenerativeModel.  Stream k plays scripts[k % scripts.size()]:
/// the next-token distribution is a point mass on the scripted token, so any
/// u in [0,1) selects it and decoding is deterministic regardless of seed.
class ScriptedModel final : public GenerativeModel {
public:
    ScriptedModel(Vocabulary vocab, std::vector<ScriptedResponse> scripts);

    const Vocabulary& vocab() const override { return vocab_; }

    std::vector<double> next_token_dist(std::span<const TokenId> prompt,
                                        std::span<const TokenId> generated,
                                        std::uint32_t stream) const override;

    /// Claimed value for the scripted token; -inf for any other token.
    double step_log_prob(std::span<const TokenId> prompt,
                         std::span<const TokenId> generated,
                         TokenId token, std::uint32_t stream) const override;

    std::size_t script_count() const { return scripts_.size(); }
    const ScriptedResponse& script(std::uint32_t stream) const;

    /// JSON file: {"responses": [{"tokens": [...], "probs": [...]}, ...]}.
    /// Tokens are interned in first-appearance order; a missing trailing
    /// <eos> is appended with probability 1.  "probs" may be omitted for
    /// all-ones.  Throws std::runtime_error on malformed input.
    static ScriptedModel load_json(std::istream& in);

private:
    Vocabulary vocab_;
    std::vector<ScriptedResponse> scripts_;

    TokenId token_at(std::uint32_t stream, std::size_t step) const;
};

} // namespace specrej
