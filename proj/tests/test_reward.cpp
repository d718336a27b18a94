#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <sstream>

#include "specrej/reward.hpp"
#include "specrej/scripted.hpp"

using namespace specrej;

TEST_SUITE_BEGIN("reward");

namespace {

/// Model whose stream 0 plays [calm rocks <eos>] with fixed claimed values.
ScriptedModel calm_rocks_model() {
    Vocabulary v;
    const TokenId calm = v.intern("calm");
    const TokenId rocks = v.intern("rocks");
    return ScriptedModel(v, {{{calm, rocks, v.eos_id()}, {-1.0, -2.0, -0.5}}});
}

LexicalRewardTable calm_rocks_table(double gamma, double bias) {
    LexicalRewardTable t;
    t.gamma = gamma;
    t.bias = bias;
    t.weights = {{"calm", 2.0}, {"rocks", -1.0}};
    return t;
}

} // namespace

TEST_CASE("mean log prob is the average claimed step likelihood") {
    const ScriptedModel m = calm_rocks_model();
    const Sequence s = sample_full(m, {}, 9, 0, 8);
    const RewardSpec r = RewardSpec::mean_log_prob();
    CHECK(r.score_final(m, s) == (-1.0 + -2.0 + -0.5) / 3.0);
}

TEST_CASE("lexical reward discounts positions multiplicatively") {
    const ScriptedModel m = calm_rocks_model();
    const Sequence s = sample_full(m, {}, 9, 0, 8);
    // gamma 0.5: 2 + 0.5*(-1) + 0.25*0 = 1.5, plus bias 0.25.
    const RewardSpec r = RewardSpec::lexical(calm_rocks_table(0.5, 0.25));
    CHECK(r.score_final(m, s) == 1.75);
}

TEST_CASE("unknown tokens carry zero lexical weight") {
    const ScriptedModel m = calm_rocks_model();
    const Sequence s = sample_full(m, {}, 9, 0, 8);
    LexicalRewardTable t;
    t.gamma = 0.9;
    t.bias = 0.0;  // table knows none of the tokens
    const RewardSpec r = RewardSpec::lexical(t);
    CHECK(r.score_final(m, s) == 0.0);
}

TEST_CASE("iterative discount agrees with the closed form") {
    const ScriptedModel m = calm_rocks_model();
    const Sequence s = sample_full(m, {}, 9, 0, 8);
    const double gamma = 0.98;
    const RewardSpec r = RewardSpec::lexical(calm_rocks_table(gamma, 0.0));
    const double via_pow = 2.0 * std::pow(gamma, 0) + -1.0 * std::pow(gamma, 1);
    CHECK(r.score_final(m, s) == doctest::Approx(via_pow).epsilon(1e-12));
}

TEST_CASE("partial score of a completed sequence equals its final score") {
    const ScriptedModel m = calm_rocks_model();
    const Sequence s = sample_full(m, {}, 9, 0, 8);
    for (double gamma : {1.0, 0.98, 0.5}) {
        const RewardSpec lex = RewardSpec::lexical(calm_rocks_table(gamma, 0.125));
        CHECK(lex.score_partial(m, s) == lex.score_final(m, s));
    }
    const RewardSpec mlp = RewardSpec::mean_log_prob();
    CHECK(mlp.score_partial(m, s) == mlp.score_final(m, s));
}

TEST_CASE("prefix scores track the growing sequence") {
    const ScriptedModel m = calm_rocks_model();
    const Sequence s = sample_full(m, {}, 9, 0, 8);
    const RewardSpec lex = RewardSpec::lexical(calm_rocks_table(0.5, 0.0));
    CHECK(lex.score_prefix(m, s.generated, 1, 0.0) == 2.0);
    CHECK(lex.score_prefix(m, s.generated, 2, 0.0) == 1.5);
    const RewardSpec mlp = RewardSpec::mean_log_prob();
    CHECK(mlp.score_prefix(m, s.generated, 2, -3.0) == -1.5);
    CHECK_THROWS_AS(lex.score_prefix(m, s.generated, 4, 0.0), std::invalid_argument);
}

TEST_CASE("scoring rejects empty generations and incomplete finals") {
    const ScriptedModel m = calm_rocks_model();
    Sequence untouched;
    const RewardSpec r = RewardSpec::mean_log_prob();
    CHECK_THROWS_WITH_AS(r.score_partial(m, untouched), "cannot score empty generation",
                         std::invalid_argument);
    Sequence active;
    active.generated = {2};
    active.status = SeqStatus::active;
    CHECK_THROWS_WITH_AS(r.score_final(m, active), "sequence not complete",
                         std::invalid_argument);
}

TEST_CASE("reward table parses gamma, bias, weights, and comments") {
    std::istringstream in("# weights\ngamma\t0.98\nbias\t-0.5\ncalm\t1.5\nrough\t-1.25\n");
    const LexicalRewardTable t = LexicalRewardTable::load(in);
    CHECK(t.gamma == 0.98);
    CHECK(t.bias == -0.5);
    CHECK(t.weight("calm") == 1.5);
    CHECK(t.weight("rough") == -1.25);
    CHECK(t.weight("absent") == 0.0);
}

TEST_CASE("reward table requires gamma and bias") {
    std::istringstream in("calm\t1.0\n");
    CHECK_THROWS_AS(LexicalRewardTable::load(in), std::runtime_error);
    std::istringstream no_tab("gamma 0.5\n");
    CHECK_THROWS_AS(LexicalRewardTable::load(no_tab), std::runtime_error);
}

TEST_CASE("a token literally named gamma can still carry weight") {
    // The first gamma/bias lines are header; later lines are plain tokens.
    std::istringstream in("gamma\t0.9\nbias\t0\ngamma\t3.0\n");
    const LexicalRewardTable t = LexicalRewardTable::load(in);
    CHECK(t.gamma == 0.9);
    CHECK(t.weight("gamma") == 3.0);
}

TEST_SUITE_END();
