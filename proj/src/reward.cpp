#include "specrej/reward.hpp"

#include <cstdlib>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace specrej {

LexicalRewardTable LexicalRewardTable::load(std::istream& in) {
    LexicalRewardTable table;
    std::string line;
    bool saw_gamma = false, saw_bias = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw std::runtime_error("bad reward table: line without tab: " + line);
        const std::string key = line.substr(0, tab);
        const double value = std::strtod(line.c_str() + tab + 1, nullptr);
        if (!saw_gamma && key == "gamma") {
            table.gamma = value;
            saw_gamma = true;
        } else if (!saw_bias && key == "bias") {
            table.bias = value;
            saw_bias = true;
        } else {
            table.weights[key] = value;
        }
    }
    if (!saw_gamma || !saw_bias)
        throw std::runtime_error("bad reward table: gamma and bias lines required");
    return table;
}

RewardSpec RewardSpec::mean_log_prob() {
    RewardSpec r;
    r.kind_ = RewardKind::mean_log_prob;
    return r;
}

RewardSpec RewardSpec::lexical(LexicalRewardTable table) {
    RewardSpec r;
    r.kind_ = RewardKind::lexical;
    r.table_ = std::move(table);
    return r;
}

double RewardSpec::score_prefix(const GenerativeModel& model, std::span<const TokenId> generated,
                                std::size_t k, double cum_log_prob_at_k) const {
    if (k == 0) throw std::invalid_argument("cannot score empty generation");
    if (k > generated.size()) throw std::invalid_argument("prefix longer than generation");
    if (kind_ == RewardKind::mean_log_prob)
        return cum_log_prob_at_k / static_cast<double>(k);
    const Vocabulary& vocab = model.vocab();
    double score = table_.bias;
    double disc = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
        score += disc * table_.weight(vocab.token(generated[i]));
        disc *= table_.gamma;
    }
    return score;
}

double RewardSpec::score_partial(const GenerativeModel& model, const Sequence& seq) const {
    return score_prefix(model, seq.generated, seq.generated.size(), seq.cum_log_prob);
}

double RewardSpec::score_final(const GenerativeModel& model, const Sequence& seq) const {
    if (seq.status != SeqStatus::completed)
        throw std::invalid_argument("sequence not complete");
    return score_partial(model, seq);
}

} // namespace specrej
