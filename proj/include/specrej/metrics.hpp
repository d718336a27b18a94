#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace specrej {

/// Work counters for one decode run.  generated_tokens is the primary compute
/// proxy; attention_units models quadratic attention cost by adding a token's
/// 1-based position for every token generated.
struct ComputeTally {
    std::uint64_t generated_tokens = 0;
    std::uint64_t attention_units = 0;
    std::uint64_t reward_calls = 0;
    std::uint64_t reward_tokens_scored = 0;

    ComputeTally& operator+=(const ComputeTally& o) {
        generated_tokens += o.generated_tokens;
        attention_units += o.attention_units;
        reward_calls += o.reward_calls;
        reward_tokens_scored += o.reward_tokens_scored;
        return *this;
    }
};

} // namespace specrej

namespace specrej::metrics {

/// tally / baseline on generated tokens.  Baseline is the cheapest reference
/// run; throws std::invalid_argument on a zero-token baseline.
double relative_compute(const ComputeTally& tally, const ComputeTally& baseline);

/// Same ratio on attention units.
double attention_ratio(const ComputeTally& tally, const ComputeTally& baseline);

/// max_baseline / tally on generated tokens: how many times cheaper this run
/// was than the most expensive reference.
double speedup(const ComputeTally& tally, const ComputeTally& max_baseline);

/// 100 * (1 - (best_max - achieved) / (best_max - best_min)) where best_max /
/// best_min are the max and min of `reference_rewards`.  >= 100 means the run
/// matched or beat the best reference draw.  Degenerate window (max == min):
/// 100 if achieved >= max, else 0.  Throws on empty references.
double improvement_score(double achieved, std::span<const double> reference_rewards);

/// Sample Pearson correlation.  Throws std::invalid_argument: size mismatch
/// or n < 2, and "degenerate correlation input" when either side has zero
/// variance.
double pearson(std::span<const double> x, std::span<const double> y);

/// Kendall rank correlation, tau-a: (2 / (n(n-1))) * sum_{i<j}
/// sgn(x_i - x_j) * sgn(y_i - y_j), ties contributing 0.  O(n^2) on purpose —
/// it is the definition, and doubles as the oracle for anything faster.
double kendall_tau(std::span<const double> x, std::span<const double> y);

struct OlsFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Least-squares line via the normal equations.  Throws
/// "degenerate correlation input" when x has zero variance.
OlsFit ols_fit(std::span<const double> x, std::span<const double> y);

/// Fraction of generated tokens a clairvoyant early stop would have skipped:
/// sum over sequences whose partial score is below the eventual winner's
/// partial score of (final_len - partial_len), over the total final_len.
/// The winner is the sequence with the highest final score (lowest index on
/// ties).  Throws std::invalid_argument("no partial rewards") on empty input.
double oracle_token_savings(std::span<const std::uint64_t> final_lengths,
                            std::span<const std::uint64_t> partial_lengths,
                            std::span<const double> partial_scores,
                            std::span<const double> final_scores);

/// Median with the even-count midpoint averaged.  Throws on empty input.
double median(std::vector<double> values);

} // namespace specrej::metrics
