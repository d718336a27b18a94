#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "specrej/metrics.hpp"

using namespace specrej;
using namespace specrej::metrics;

TEST_SUITE_BEGIN("metrics");

namespace {

ComputeTally tally(std::uint64_t tokens, std::uint64_t attn = 0) {
    ComputeTally t;
    t.generated_tokens = tokens;
    t.attention_units = attn;
    return t;
}

} // namespace

TEST_CASE("tally accumulation is field-wise") {
    ComputeTally a;
    a.generated_tokens = 3;
    a.attention_units = 6;
    a.reward_calls = 1;
    a.reward_tokens_scored = 3;
    ComputeTally b = a;
    b += a;
    CHECK(b.generated_tokens == 6);
    CHECK(b.attention_units == 12);
    CHECK(b.reward_calls == 2);
    CHECK(b.reward_tokens_scored == 6);
}

TEST_CASE("compute ratios divide token and attention counters") {
    CHECK(relative_compute(tally(300), tally(100)) == 3.0);
    CHECK(relative_compute(tally(50), tally(100)) == 0.5);
    CHECK(attention_ratio(tally(0, 90), tally(0, 30)) == 3.0);
    CHECK(speedup(tally(100), tally(400)) == 4.0);
    CHECK_THROWS_AS(relative_compute(tally(10), tally(0)), std::invalid_argument);
    CHECK_THROWS_AS(attention_ratio(tally(0, 1), tally(0, 0)), std::invalid_argument);
    CHECK_THROWS_AS(speedup(tally(0), tally(10)), std::invalid_argument);
}

TEST_CASE("improvement score is linear in the reference reward window") {
    const std::vector<double> refs{1.0, 3.0, 2.0};  // window [1, 3]
    CHECK(improvement_score(3.0, refs) == 100.0);
    CHECK(improvement_score(1.0, refs) == 0.0);
    CHECK(improvement_score(2.0, refs) == 50.0);
    CHECK(improvement_score(4.0, refs) == 150.0);  // beating the window
    CHECK(improvement_score(0.0, refs) == -50.0);
}

TEST_CASE("improvement score handles a collapsed reference window") {
    const std::vector<double> flat{2.0, 2.0};
    CHECK(improvement_score(2.0, flat) == 100.0);
    CHECK(improvement_score(2.5, flat) == 100.0);
    CHECK(improvement_score(1.9, flat) == 0.0);
    CHECK_THROWS_AS(improvement_score(1.0, std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("pearson matches hand computation and hits the extremes") {
    const std::vector<double> x{1, 2, 3, 4, 5};
    const std::vector<double> y{2, 4, 6, 8, 10};
    CHECK(pearson(x, y) == 1.0);
    const std::vector<double> neg{10, 8, 6, 4, 2};
    CHECK(pearson(x, neg) == -1.0);
    // Hand case: x = {1,2,3}, y = {1,3,2}: sxy = 1, sxx = 2, syy = 2.
    const std::vector<double> a{1, 2, 3}, b{1, 3, 2};
    CHECK(pearson(a, b) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("pearson rejects degenerate and malformed inputs") {
    const std::vector<double> x{1, 2, 3};
    const std::vector<double> flat{4, 4, 4};
    CHECK_THROWS_WITH_AS(pearson(x, flat), "degenerate correlation input",
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(pearson(flat, x), "degenerate correlation input",
                         std::invalid_argument);
    CHECK_THROWS_AS(pearson(x, std::vector<double>{1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(pearson(std::vector<double>{1}, std::vector<double>{1}),
                    std::invalid_argument);
}

TEST_CASE("kendall tau counts concordant minus discordant pairs") {
    const std::vector<double> x{1, 2, 3};
    CHECK(kendall_tau(x, std::vector<double>{10, 20, 30}) == 1.0);
    CHECK(kendall_tau(x, std::vector<double>{30, 20, 10}) == -1.0);
    // y = {3,1,2}: pairs (0,1) discordant, (0,2) discordant, (1,2) concordant.
    CHECK(kendall_tau(x, std::vector<double>{3, 1, 2}) ==
          doctest::Approx(-1.0 / 3.0).epsilon(1e-15));
    // Ties contribute zero: y = {1,1,2} has one flat pair out of three.
    CHECK(kendall_tau(x, std::vector<double>{1, 1, 2}) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    // All ties on one side: every pair contributes zero, tau is zero.
    CHECK(kendall_tau(x, std::vector<double>{5, 5, 5}) == 0.0);
}

TEST_CASE("least squares recovers an exact line") {
    const std::vector<double> x{0, 1, 2, 3};
    std::vector<double> y;
    for (double xi : x) y.push_back(2.5 * xi - 1.0);
    const OlsFit fit = ols_fit(x, y);
    CHECK(fit.slope == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(fit.intercept == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("least squares on a hand-computed cloud") {
    // x = {1,2,3,4}, y = {2,2,4,4}: slope 0.8, intercept 1.0.
    const std::vector<double> x{1, 2, 3, 4}, y{2, 2, 4, 4};
    const OlsFit fit = ols_fit(x, y);
    CHECK(fit.slope == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(fit.intercept == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_WITH_AS(ols_fit(std::vector<double>{1, 1}, std::vector<double>{1, 2}),
                         "degenerate correlation input", std::invalid_argument);
}

TEST_CASE("oracle savings skip every sequence scoring under the winner's early mark") {
    // Winner is index 1 (final 9).  Its early score is 5; indices 0 and 3
    // score under 5 early, so their tails could have been skipped.
    const std::vector<std::uint64_t> lens{10, 8, 6, 12};
    const std::vector<std::uint64_t> at{4, 4, 4, 4};
    const std::vector<double> part{1.0, 5.0, 6.0, 4.0};
    const std::vector<double> fin{3.0, 9.0, 2.0, 7.0};
    // saved = (10-4) + (12-4) = 14 over 36 tokens.
    CHECK(oracle_token_savings(lens, at, part, fin) == 14.0 / 36.0);
}

TEST_CASE("oracle savings closed form for a symmetric batch") {
    // n sequences, all length L, all stopped at L/2, a unique winner whose
    // early score tops the rest: savings = (n-1)/(2n).
    for (std::uint64_t n : {2ull, 10ull, 1000ull}) {
        std::vector<std::uint64_t> lens(n, 100), at(n, 50);
        std::vector<double> part(n), fin(n);
        for (std::uint64_t k = 0; k < n; ++k) {
            part[k] = static_cast<double>(k);
            fin[k] = static_cast<double>(k);
        }
        const double expect =
            static_cast<double>(n - 1) / (2.0 * static_cast<double>(n));
        CHECK(oracle_token_savings(lens, at, part, fin) ==
              doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("oracle savings break ties toward the earliest winner") {
    const std::vector<std::uint64_t> lens{6, 6};
    const std::vector<std::uint64_t> at{3, 3};
    const std::vector<double> part{2.0, 1.0};
    const std::vector<double> fin{5.0, 5.0};  // tie: index 0 is the winner
    CHECK(oracle_token_savings(lens, at, part, fin) == (6.0 - 3.0) / 12.0);
    CHECK_THROWS_WITH_AS(
        oracle_token_savings({}, {}, {}, {}), "no partial rewards", std::invalid_argument);
}

TEST_CASE("median averages the middle pair on even counts") {
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 3.0, 2.0}) == 2.5);
    CHECK(median({7.0}) == 7.0);
    CHECK_THROWS_AS(median({}), std::invalid_argument);
}

TEST_SUITE_END();
