#include "specrej/memory.hpp"

#include <stdexcept>

namespace specrej {

void MemoryBudget::validate() const {
    if (capacity == 0) throw std::invalid_argument("budget capacity must be positive");
    if (gen_cost == 0) throw std::invalid_argument("budget gen_cost must be positive");
    // headroom >= 1 guarantees any batch sized by initial_batch_size can
    // always take its first step before hitting the ceiling.
    if (headroom == 0) throw std::invalid_argument("budget headroom must be positive");
}

std::uint64_t footprint(const MemoryBudget& b, std::uint64_t active,
                        std::uint64_t prompt_len, std::uint64_t gen_len) {
    return active * (prompt_len * b.prompt_cost + gen_len * b.gen_cost);
}

bool would_oom(const MemoryBudget& b, std::uint64_t active,
               std::uint64_t prompt_len, std::uint64_t gen_len) {
    return footprint(b, active, prompt_len, gen_len + 1) > b.capacity;
}

std::uint32_t initial_batch_size(const MemoryBudget& b, std::uint64_t prompt_len) {
    b.validate();
    const std::uint64_t per_seq = prompt_len * b.prompt_cost + b.headroom * b.gen_cost;
    if (per_seq == 0) throw std::invalid_argument("budget headroom must be positive");
    if (per_seq > b.capacity) throw std::invalid_argument("budget too small for prompt");
    const std::uint64_t n = b.capacity / per_seq;
    constexpr std::uint64_t cap = 0xFFFFFFFFULL;
    return static_cast<std::uint32_t>(n < cap ? n : cap);
}

} // namespace specrej
