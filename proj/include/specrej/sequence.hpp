#pragma once

#include <cstdint>
#include <vector>

#include "specrej/vocab.hpp"

namespace specrej {

enum class SeqStatus { active, completed, rejected };

/// One candidate response being grown token by token.  `stream` is the
/// sequence's index within its run and keys its RNG stream, so a sequence
/// regenerated with the same (seed, stream) is bit-identical.
struct Sequence {
    std::vector<TokenId> prompt;
    std::vector<TokenId> generated;  // includes the final <eos> when completed
    SeqStatus status = SeqStatus::active;
    double cum_log_prob = 0.0;       // sum of model step log-probs over `generated`
    std::uint32_t stream = 0;

    std::size_t length() const { return generated.size(); }
};

} // namespace specrej
