#include "specrej/model.hpp"

#include <cmath>
#include <stdexcept>

#include "specrej/rng.hpp"

namespace specrej {

double GenerativeModel::step_log_prob(std::span<const TokenId> prompt,
                                      std::span<const TokenId> generated,
                                      TokenId token, std::uint32_t stream) const {
    const auto dist = next_token_dist(prompt, generated, stream);
    if (token >= dist.size()) throw std::out_of_range("unknown token id");
    return std::log(dist[token]);
}

TokenId sample_from_dist(std::span<const double> dist, double u) {
    double acc = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        acc += dist[i];
        if (u < acc) return static_cast<TokenId>(i);
    }
    // u landed beyond the accumulated mass (rounding shortfall): last token.
    return static_cast<TokenId>(dist.size() - 1);
}

void extend_one(const GenerativeModel& model, Sequence& seq,
                std::uint64_t run_seed, std::uint32_t max_new_tokens) {
    if (seq.status != SeqStatus::active)
        throw std::logic_error("extend_one on a non-active sequence");
    const std::uint64_t step = seq.generated.size();
    const auto dist = model.next_token_dist(seq.prompt, seq.generated, seq.stream);
    const double u = rng::draw_unit(run_seed, seq.stream, step);
    const TokenId tok = sample_from_dist(dist, u);
    seq.cum_log_prob += model.step_log_prob(seq.prompt, seq.generated, tok, seq.stream);
    seq.generated.push_back(tok);
    if (tok == model.vocab().eos_id() || seq.generated.size() >= max_new_tokens)
        seq.status = SeqStatus::completed;
}

Sequence sample_full(const GenerativeModel& model, std::span<const TokenId> prompt,
                     std::uint64_t run_seed, std::uint32_t stream,
                     std::uint32_t max_new_tokens) {
    Sequence seq;
    seq.prompt.assign(prompt.begin(), prompt.end());
    seq.stream = stream;
    while (seq.status == SeqStatus::active)
        extend_one(model, seq, run_seed, max_new_tokens);
    return seq;
}

double sequence_log_prob(const GenerativeModel& model, std::span<const TokenId> prompt,
                         std::span<const TokenId> response, std::uint32_t stream) {
    if (response.empty()) throw std::invalid_argument("empty response");
    double total = 0.0;
    for (std::size_t i = 0; i < response.size(); ++i)
        total += model.step_log_prob(prompt, response.first(i), response[i], stream);
    return total;
}

} // namespace specrej
