#pragma once

#include <cstdint>

namespace specrej {

/// Simulated accelerator memory.  Costs are abstract units per cached token;
/// capacity is the hard ceiling a real device would OOM past.
struct MemoryBudget {
    std::uint64_t capacity = 38400;
    std::uint64_t prompt_cost = 1;   // per prompt token per active sequence
    std::uint64_t gen_cost = 1;      // per generated token per active sequence
    std::uint64_t headroom = 256;    // per-sequence allowance used only for sizing b_init

    void validate() const;
};

/// Units held by `active` sequences that each cache the prompt plus `gen_len`
/// generated tokens.
std::uint64_t footprint(const MemoryBudget& b, std::uint64_t active,
                        std::uint64_t prompt_len, std::uint64_t gen_len);

/// True when growing every active sequence by one token would exceed
/// capacity.  The decoder asks this before a step, so the simulated device
/// never actually over-allocates.
bool would_oom(const MemoryBudget& b, std::uint64_t active,
               std::uint64_t prompt_len, std::uint64_t gen_len);

/// Largest batch whose prompts plus per-sequence headroom fit:
/// floor(capacity / (prompt_len*prompt_cost + headroom*gen_cost)).
/// Throws std::invalid_argument("budget too small for prompt") when not even
/// one sequence fits.
std::uint32_t initial_batch_size(const MemoryBudget& b, std::uint64_t prompt_len);

} // namespace specrej
