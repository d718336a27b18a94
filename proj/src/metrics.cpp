#include "specrej/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace specrej::metrics {

namespace {

double ratio(std::uint64_t num, std::uint64_t den, const char* what) {
    if (den == 0) throw std::invalid_argument(what);
    return static_cast<double>(num) / static_cast<double>(den);
}

int sgn(double d) { return (d > 0.0) - (d < 0.0); }

} // namespace

double relative_compute(const ComputeTally& tally, const ComputeTally& baseline) {
    return ratio(tally.generated_tokens, baseline.generated_tokens,
                 "relative_compute baseline has zero tokens");
}

double attention_ratio(const ComputeTally& tally, const ComputeTally& baseline) {
    return ratio(tally.attention_units, baseline.attention_units,
                 "attention_ratio baseline has zero units");
}

double speedup(const ComputeTally& tally, const ComputeTally& max_baseline) {
    return ratio(max_baseline.generated_tokens, tally.generated_tokens,
                 "speedup over a zero-token run");
}

double improvement_score(double achieved, std::span<const double> reference_rewards) {
    if (reference_rewards.empty())
        throw std::invalid_argument("improvement_score needs reference rewards");
    double lo = reference_rewards[0], hi = reference_rewards[0];
    for (double r : reference_rewards) {
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    if (hi == lo) return achieved >= hi ? 100.0 : 0.0;
    return 100.0 * (1.0 - (hi - achieved) / (hi - lo));
}

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("correlation size mismatch");
    const std::size_t n = x.size();
    if (n < 2) throw std::invalid_argument("correlation needs at least two points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw std::invalid_argument("degenerate correlation input");
    return sxy / std::sqrt(sxx * syy);
}

double kendall_tau(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("correlation size mismatch");
    const std::size_t n = x.size();
    if (n < 2) throw std::invalid_argument("correlation needs at least two points");
    std::int64_t s = 0;
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            s += sgn(x[i] - x[j]) * sgn(y[i] - y[j]);
    return 2.0 * static_cast<double>(s) /
           (static_cast<double>(n) * static_cast<double>(n - 1));
}

OlsFit ols_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("correlation size mismatch");
    const std::size_t n = x.size();
    if (n < 2) throw std::invalid_argument("correlation needs at least two points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        sxy += dx * (y[i] - my);
        sxx += dx * dx;
    }
    if (sxx == 0.0) throw std::invalid_argument("degenerate correlation input");
    OlsFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    return fit;
}

double oracle_token_savings(std::span<const std::uint64_t> final_lengths,
                            std::span<const std::uint64_t> partial_lengths,
                            std::span<const double> partial_scores,
                            std::span<const double> final_scores) {
    const std::size_t n = final_lengths.size();
    if (n == 0 || partial_lengths.size() != n || partial_scores.size() != n ||
        final_scores.size() != n)
        throw std::invalid_argument("no partial rewards");
    std::size_t best = 0;
    for (std::size_t k = 1; k < n; ++k)
        if (final_scores[k] > final_scores[best]) best = k;
    const double c_star = partial_scores[best];
    std::uint64_t saved = 0, total = 0;
    for (std::size_t k = 0; k < n; ++k) {
        total += final_lengths[k];
        if (partial_scores[k] < c_star) saved += final_lengths[k] - partial_lengths[k];
    }
    if (total == 0) throw std::invalid_argument("no partial rewards");
    return static_cast<double>(saved) / static_cast<double>(total);
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median of empty set");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

} // namespace specrej::metrics
