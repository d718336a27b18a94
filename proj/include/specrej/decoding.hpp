#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "specrej/memory.hpp"
#include "specrej/metrics.hpp"
#include "specrej/model.hpp"
#include "specrej/reward.hpp"
#include "specrej/sequence.hpp"

namespace specrej {

struct DecodeConfig {
    std::uint64_t seed = 0;
    double alpha = 0.5;              // rejection fraction, in [0, 1); 0 rejects nobody
    std::uint32_t n = 8;             // batch size for best_of_n (ignored by the rejection loop)
    std::uint32_t max_new_tokens = 256;
    std::uint32_t batch_cap = 0;     // 0: initial batch from budget alone; else min with this
    MemoryBudget budget;

    void validate() const;
};

/// Everything needed to replay one grow/score/reject round from the outside.
struct RejectionRoundRecord {
    std::uint32_t round_index = 0;
    std::uint64_t decision_length = 0;     // longest generation any sequence reached this round
    std::vector<std::uint32_t> scored_streams;  // sequences alive at round start, ascending
    std::vector<double> partial_rewards;        // aligned with scored_streams
    double cutoff = 0.0;
    std::vector<std::uint32_t> accepted_streams;
    std::vector<std::uint32_t> completed_streams;  // finished during this round
    std::uint32_t batch_before = 0;
    std::uint32_t batch_after = 0;         // accepted minus completed
    std::uint64_t peak_footprint = 0;      // largest simulated allocation seen this round
};

struct DecodeOutcome {
    Sequence winner;
    double winner_reward = 0.0;
    std::uint32_t candidate_pool_size = 0;  // completed sequences that reached the final argmax
    std::vector<RejectionRoundRecord> rounds;  // empty for best_of_n
    ComputeTally compute;

    // Full candidate pool, in completion order with stream ties broken low.
    // Downstream consumers use the rewards as the reference distribution for
    // improvement scoring.
    std::vector<Sequence> pool;
    std::vector<double> pool_rewards;
};

/// Acceptance threshold: the alpha-quantile of the scores by sorted order,
/// r = x_(k) with k = min(b, floor(alpha * b) + 1) and 1-based indexing.
/// alpha = 0 picks x_(1), the minimum, so nothing scores below it.  Throws
/// std::invalid_argument("no partial rewards") on empty input and
/// "invalid alpha" outside [0, 1).
double compute_cutoff(std::span<const double> partial_rewards, double alpha);

/// Positions (into `partial_rewards`) scoring at or above the cutoff,
/// ascending.  Never empty for a cutoff produced by compute_cutoff.
std::vector<std::uint32_t> accepted_indices(std::span<const double> partial_rewards,
                                            double cutoff);

/// Draw cfg.n complete sequences on streams 0..n-1 and keep the best final
/// score (lowest stream on ties).
DecodeOutcome best_of_n(const GenerativeModel& model, const RewardSpec& reward,
                        std::span<const TokenId> prompt, const DecodeConfig& cfg);

/// Memory-budgeted rejection decoding.  Starts as many sequences as fit,
/// grows them in lockstep until the next step would exceed capacity, then
/// scores partials and halts everything under the alpha-quantile cutoff.
/// Completed sequences always enter the candidate pool; the final answer is
/// the pool argmax by final reward.  Sequences still share the best_of_n RNG
/// streams, so with alpha = 0 and a budget admitting n sequences the result
/// matches best_of_n exactly.
DecodeOutcome speculative_rejection(const GenerativeModel& model, const RewardSpec& reward,
                                    std::span<const TokenId> prompt, const DecodeConfig& cfg);

} // namespace specrej
