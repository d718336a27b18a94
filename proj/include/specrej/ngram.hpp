#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "specrej/model.hpp"
#include "specrej/vocab.hpp"

namespace specrej {

/// Count-based n-gram model with additive smoothing and recursive backoff.
///
/// Counts are kept for every context length 0..order-1, so backoff never has
/// to re-scan the corpus.  For a context whose total count is zero the model
/// falls back to its longest non-empty suffix, bottoming out at the unigram
/// row; with no training data at all, every token gets 1/|V|.
///
/// P(t | c) = (count(c, t) + d) / (count(c, .) + d * |V|)
class NGramModel final : public GenerativeModel {
public:
    /// Untrained model: all counts zero.
    NGramModel(Vocabulary vocab, std::uint32_t order, double smoothing);

    const Vocabulary& vocab() const override { return vocab_; }
    std::uint32_t order() const { return order_; }
    double smoothing() const { return smoothing_; }

    /// Smoothed next-token distribution for an explicit context (any length;
    /// only the last order-1 tokens are used).  Throws
    /// std::out_of_range("unknown token id") if the context mentions an id
    /// outside the vocabulary.
    std::vector<double> dist_for_context(std::span<const TokenId> context) const;

    std::vector<double> next_token_dist(std::span<const TokenId> prompt,
                                        std::span<const TokenId> generated,
                                        std::uint32_t stream) const override;

    void add_document(std::span<const TokenId> doc);

    /// Versioned plain-text snapshot.  Counts are integers and the smoothing
    /// constant is written as a hex float, so save -> load -> save is
    /// byte-identical and loaded models reproduce the original bit for bit.
    void save(std::ostream& out) const;
    static NGramModel load(std::istream& in);

    std::uint64_t context_rows() const { return counts_.size(); }

private:
    struct Row {
        std::map<TokenId, std::uint64_t> by_token;
        std::uint64_t total = 0;
    };

    Vocabulary vocab_;
    std::uint32_t order_;
    double smoothing_;
    std::map<std::vector<TokenId>, Row> counts_;  // ordered: deterministic snapshots

    const Row* find_backoff_row(std::span<const TokenId> context) const;
};

/// Count every (context, next) pair of every document at all context lengths
/// up to order-1.  Documents are token sequences that already end in <eos>.
/// Throws std::invalid_argument: "empty corpus" (no documents, or only empty
/// ones), "invalid order" (order == 0), "invalid smoothing" (d <= 0).
NGramModel train_ngram(const std::vector<std::vector<TokenId>>& corpus,
                       const Vocabulary& vocab, std::uint32_t order, double smoothing);

/// Convenience: one corpus line per document, whitespace-tokenized, <eos>
/// appended.  Builds the vocabulary in first-appearance order.
NGramModel train_ngram_text(const std::vector<std::string>& lines,
                            std::uint32_t order, double smoothing);

} // namespace specrej
