#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "specrej/sequence.hpp"
#include "specrej/vocab.hpp"

namespace specrej {

/// Auto-regressive token source.  Implementations must be pure: the returned
/// distribution may depend only on the arguments, never on call order, so the
/// decoder can replay any step.
class GenerativeModel {
public:
    virtual ~GenerativeModel() = default;

    virtual const Vocabulary& vocab() const = 0;

    /// Probabilities over the full vocabulary for the next token after
    /// prompt ++ generated.  Entries are nonnegative and sum to 1 (within
    /// rounding).  `stream` identifies the sequence; corpus-backed models
    /// ignore it, scripted ones dispatch on it.
    virtual std::vector<double> next_token_dist(std::span<const TokenId> prompt,
                                                std::span<const TokenId> generated,
                                                std::uint32_t stream) const = 0;

    /// Log-probability the model reports for emitting `token` at this step.
    /// Defaults to ln of the sampling distribution entry; fixture models may
    /// claim a different value than they sample with.
    virtual double step_log_prob(std::span<const TokenId> prompt,
                                 std::span<const TokenId> generated,
                                 TokenId token, std::uint32_t stream) const;
};

/// Inverse-CDF draw: the first index i with u < sum(dist[0..i]).  The running
/// sum is sequential left-to-right; keep it that way — reorderings change
/// results in the last ulp and break cross-run reproducibility.
TokenId sample_from_dist(std::span<const double> dist, double u);

/// Sample one token for `seq` at step seq.generated.size(), append it, add the
/// model's step log-prob, and mark the sequence completed on <eos> or when the
/// new-token cap is reached.
void extend_one(const GenerativeModel& model, Sequence& seq,
                std::uint64_t run_seed, std::uint32_t max_new_tokens);

/// Grow a fresh sequence until completed.
Sequence sample_full(const GenerativeModel& model, std::span<const TokenId> prompt,
                     std::uint64_t run_seed, std::uint32_t stream,
                     std::uint32_t max_new_tokens);

/// Sum of step log-probs the model assigns to an existing `response` after
/// `prompt`.  Throws std::invalid_argument("empty response") when `response`
/// has no tokens.
double sequence_log_prob(const GenerativeModel& model, std::span<const TokenId> prompt,
                         std::span<const TokenId> response, std::uint32_t stream = 0);

} // namespace specrej
