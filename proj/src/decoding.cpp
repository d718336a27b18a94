#include "specrej/decoding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace specrej {

void DecodeConfig::validate() const {
    if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("invalid alpha");
    if (max_new_tokens == 0) throw std::invalid_argument("max_new_tokens must be positive");
    budget.validate();
}

double compute_cutoff(std::span<const double> partial_rewards, double alpha) {
    if (partial_rewards.empty()) throw std::invalid_argument("no partial rewards");
    if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("invalid alpha");
    std::vector<double> sorted(partial_rewards.begin(), partial_rewards.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t b = sorted.size();
    std::size_t k = static_cast<std::size_t>(
                        std::floor(alpha * static_cast<double>(b))) + 1;
    k = std::min(b, k);
    return sorted[k - 1];
}

std::vector<std::uint32_t> accepted_indices(std::span<const double> partial_rewards,
                                            double cutoff) {
    std::vector<std::uint32_t> out;
    for (std::size_t i = 0; i < partial_rewards.size(); ++i)
        if (partial_rewards[i] >= cutoff) out.push_back(static_cast<std::uint32_t>(i));
    return out;
}

DecodeOutcome best_of_n(const GenerativeModel& model, const RewardSpec& reward,
                        std::span<const TokenId> prompt, const DecodeConfig& cfg) {
    cfg.validate();
    if (cfg.n == 0) throw std::invalid_argument("n must be positive");

    DecodeOutcome out;
    out.pool.reserve(cfg.n);
    out.pool_rewards.reserve(cfg.n);
    for (std::uint32_t k = 0; k < cfg.n; ++k) {
        Sequence seq = sample_full(model, prompt, cfg.seed, k, cfg.max_new_tokens);
        const std::uint64_t len = seq.generated.size();
        out.compute.generated_tokens += len;
        out.compute.attention_units += len * (len + 1) / 2;
        out.compute.reward_calls += 1;
        out.compute.reward_tokens_scored += len;
        out.pool_rewards.push_back(reward.score_final(model, seq));
        out.pool.push_back(std::move(seq));
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < out.pool_rewards.size(); ++k)
        if (out.pool_rewards[k] > out.pool_rewards[best]) best = k;
    out.winner = out.pool[best];
    out.winner_reward = out.pool_rewards[best];
    out.candidate_pool_size = cfg.n;
    return out;
}

DecodeOutcome speculative_rejection(const GenerativeModel& model, const RewardSpec& reward,
                                    std::span<const TokenId> prompt, const DecodeConfig& cfg) {
    cfg.validate();
    const std::uint64_t prompt_len = prompt.size();
    std::uint32_t b = initial_batch_size(cfg.budget, prompt_len);
    if (cfg.batch_cap != 0) b = std::min(b, cfg.batch_cap);

    std::vector<Sequence> seqs(b);
    for (std::uint32_t k = 0; k < b; ++k) {
        seqs[k].prompt.assign(prompt.begin(), prompt.end());
        seqs[k].stream = k;
    }
    std::vector<std::uint32_t> active(b);
    for (std::uint32_t k = 0; k < b; ++k) active[k] = k;

    DecodeOutcome out;
    std::uint32_t round_index = 0;
    while (!active.empty()) {
        RejectionRoundRecord rec;
        rec.round_index = round_index;
        rec.batch_before = static_cast<std::uint32_t>(active.size());
        rec.scored_streams = active;

        // Grow phase: all actives advance one token per step, stopping just
        // before the step that would overflow the budget.  Sequences that hit
        // <eos> release their memory immediately (they leave `active`), which
        // can open room for the rest to continue within the same round.
        const std::uint64_t g0 = seqs[active.front()].generated.size();
        rec.peak_footprint = footprint(cfg.budget, active.size(), prompt_len, g0);
        std::uint64_t tokens_this_round = 0;
        std::vector<std::uint32_t> survivors;
        while (!active.empty()) {
            const std::uint64_t g = seqs[active.front()].generated.size();
            if (would_oom(cfg.budget, active.size(), prompt_len, g)) break;
            survivors.clear();
            for (std::uint32_t k : active) {
                extend_one(model, seqs[k], cfg.seed, cfg.max_new_tokens);
                ++out.compute.generated_tokens;
                ++tokens_this_round;
                out.compute.attention_units += seqs[k].generated.size();
                if (seqs[k].status == SeqStatus::completed)
                    rec.completed_streams.push_back(k);
                else
                    survivors.push_back(k);
            }
            rec.peak_footprint = std::max(
                rec.peak_footprint, footprint(cfg.budget, active.size(), prompt_len, g + 1));
            active = survivors;
        }

        // Decision point: everyone alive at round start is scored at the
        // length it reached; the decision length is the longest of those.
        for (std::uint32_t k : rec.scored_streams)
            rec.decision_length = std::max<std::uint64_t>(rec.decision_length,
                                                          seqs[k].generated.size());
        rec.partial_rewards.reserve(rec.scored_streams.size());
        for (std::uint32_t k : rec.scored_streams) {
            rec.partial_rewards.push_back(reward.score_partial(model, seqs[k]));
            ++out.compute.reward_calls;
            out.compute.reward_tokens_scored += seqs[k].generated.size();
        }
        rec.cutoff = compute_cutoff(rec.partial_rewards, cfg.alpha);
        const auto accepted_pos = accepted_indices(rec.partial_rewards, rec.cutoff);
        rec.accepted_streams.reserve(accepted_pos.size());
        for (std::uint32_t pos : accepted_pos)
            rec.accepted_streams.push_back(rec.scored_streams[pos]);

        // A completed sequence joins the candidate pool no matter how it
        // scored; its round-end partial IS its final score (same formula,
        // same length).  Unfinished sequences below the cutoff are dropped.
        std::vector<std::uint32_t> next_active;
        std::size_t ai = 0;
        for (std::size_t i = 0; i < rec.scored_streams.size(); ++i) {
            const std::uint32_t k = rec.scored_streams[i];
            const bool accepted =
                ai < rec.accepted_streams.size() && rec.accepted_streams[ai] == k;
            if (accepted) ++ai;
            Sequence& s = seqs[k];
            if (s.status == SeqStatus::completed) {
                out.pool_rewards.push_back(rec.partial_rewards[i]);
                out.pool.push_back(std::move(s));
            } else if (accepted) {
                next_active.push_back(k);
            } else {
                s.status = SeqStatus::rejected;
            }
        }
        rec.batch_after = static_cast<std::uint32_t>(next_active.size());

        // A round that generated nothing and rejected nobody would repeat
        // forever — the simulated device is wedged, like a real OOM.
        if (tokens_this_round == 0 && rec.batch_after == rec.batch_before)
            throw std::runtime_error("memory budget stalled: rejection cannot shrink the batch");

        out.rounds.push_back(std::move(rec));
        active = std::move(next_active);
        ++round_index;
    }

    if (out.pool.empty())
        throw std::logic_error("rejection loop ended with an empty candidate pool");
    std::size_t best = 0;
    for (std::size_t k = 1; k < out.pool_rewards.size(); ++k) {
        const bool better = out.pool_rewards[k] > out.pool_rewards[best] ||
                            (out.pool_rewards[k] == out.pool_rewards[best] &&
                             out.pool[k].stream < out.pool[best].stream);
        if (better) best = k;
    }
    out.winner = out.pool[best];
    out.winner_reward = out.pool_rewards[best];
    out.candidate_pool_size = static_cast<std::uint32_t>(out.pool.size());
    return out;
}

} // namespace specrej
