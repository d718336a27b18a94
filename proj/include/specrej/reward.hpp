#pragma once

#include <iosfwd>
#include <string>
#include <unordered_map>

#include "specrej/model.hpp"
#include "specrej/sequence.hpp"

namespace specrej {

/// Token weights for the lexical reward, keyed by surface string.  Unknown
/// tokens weigh 0.
struct LexicalRewardTable {
    std::unordered_map<std::string, double> weights;
    double gamma = 0.98;  // per-position discount, applied multiplicatively
    double bias = 0.0;

    double weight(const std::string& token) const {
        auto it = weights.find(token);
        return it == weights.end() ? 0.0 : it->second;
    }

    /// TSV: first two lines `gamma\t<v>` and `bias\t<v>`, then one
    /// `token\t<weight>` per line.  '#' lines and blank lines are skipped.
    static LexicalRewardTable load(std::istream& in);
};

enum class RewardKind { mean_log_prob, lexical };

/// Scores token sequences.  Both kinds are prefix-consistent: scoring a
/// completed sequence "partially" at its full length equals its final score,
/// which is what lets early scores stand in for final ones.
///
///   mean_log_prob:  cum_log_prob / generated length
///   lexical:        bias + sum_i gamma^i * weight(token_i)
///
/// The discount is accumulated by repeated multiplication, never pow(), so
/// independent reimplementations agree bit for bit.
class RewardSpec {
public:
    static RewardSpec mean_log_prob();
    static RewardSpec lexical(LexicalRewardTable table);

    RewardKind kind() const { return kind_; }
    const LexicalRewardTable& table() const { return table_; }

    /// Score over the tokens generated so far, whatever the status.
    /// Throws std::invalid_argument("cannot score empty generation").
    double score_partial(const GenerativeModel& model, const Sequence& seq) const;

    /// Same formula, but the sequence must be completed.
    /// Throws std::invalid_argument("sequence not complete") otherwise.
    double score_final(const GenerativeModel& model, const Sequence& seq) const;

    /// Score of the first `k` generated tokens.  `cum_log_prob_at_k` is the
    /// log-prob accumulated over exactly those steps (ignored by lexical).
    double score_prefix(const GenerativeModel& model, std::span<const TokenId> generated,
                        std::size_t k, double cum_log_prob_at_k) const;

private:
    RewardKind kind_ = RewardKind::mean_log_prob;
    LexicalRewardTable table_;
};

} // namespace specrej
