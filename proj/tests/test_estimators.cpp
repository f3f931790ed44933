#include <doctest.h>

#include "ace/estimators.hpp"
#include "ace/rng.hpp"
#include "ace/synthlab.hpp"

using namespace ace::estimators;
using ace::Rational;
using ace::model::ItemTally;

namespace {

ItemTally make_tally(int k, std::int64_t ww_retained, std::int64_t ww_changed,
                     std::int64_t wr, std::int64_t rw, std::int64_t rr,
                     std::string item_id = "it") {
  ItemTally tally;
  tally.item_id = std::move(item_id);
  tally.k = k;
  tally.n_ww_retained = ww_retained;
  tally.n_ww_changed = ww_changed;
  tally.n_wr = wr;
  tally.n_rw = rw;
  tally.n_rr = rr;
  tally.n_total = ww_retained + ww_changed + wr + rw + rr;
  return tally;
}

// The tally of the one fully published item (key D, 69,785 responses).
ItemTally published_item_tally() { return make_tally(4, 8728, 120, 740, 111, 60086, "item1"); }

ace::ingest::CollapsedTally pooled_table() {
  ace::ingest::CollapsedTally tally;
  tally.n_ww = 56587;
  tally.n_wr = 11543;
  tally.n_rw = 1454;
  tally.n_rr = 96481;
  tally.n_examinees = 2555;
  tally.n_items = 65;
  return tally;
}

ItemTally random_two_choice_tally(ace::rng::Xoshiro256& gen) {
  for (;;) {
    const auto tally = make_tally(2, static_cast<std::int64_t>(gen.below(400)), 0,
                                  static_cast<std::int64_t>(gen.below(400)),
                                  static_cast<std::int64_t>(gen.below(400)),
                                  static_cast<std::int64_t>(gen.below(400)));
    if (tally.n_total > 0) return tally;
  }
}

}  // namespace

TEST_SUITE("estimators") {

TEST_CASE("two-choice effects are exact points") {
  const auto effects = effects_true_false(make_tally(2, 2, 0, 1, 1, 6));
  CHECK(effects.ate.identified);
  CHECK(*effects.ate.point == Rational(-2, 5));  // -0.4
  CHECK(*effects.att.point == Rational(0));
  CHECK(*effects.atu.point == Rational(-1, 2));
  CHECK(effects.treated_share == Rational(1, 5));
  // ATE is the treated-share weighted average of ATT and ATU.
  CHECK(*effects.ate.point ==
        effects.treated_share * *effects.att.point +
            (Rational(1) - effects.treated_share) * *effects.atu.point);
}

TEST_CASE("two-choice corners") {
  const auto all_wr = effects_true_false(make_tally(2, 0, 0, 10, 0, 0));
  CHECK(*all_wr.ate.point == Rational(1));
  CHECK(*all_wr.att.point == Rational(1));
  CHECK_FALSE(all_wr.atu.defined);
  CHECK(all_wr.atu.reason == "no control units");

  const auto all_rr = effects_true_false(make_tally(2, 0, 0, 0, 0, 10));
  CHECK(*all_rr.ate.point == Rational(-1));
  CHECK(*all_rr.atu.point == Rational(-1));
  CHECK_FALSE(all_rr.att.defined);
  CHECK(all_rr.att.reason == "no treated units");
}

TEST_CASE("att_item on the published item") {
  const auto result = att_item(published_item_tally());
  CHECK(result.identified);
  CHECK(*result.point == Rational(629, 971));
  CHECK(result.point->decimal(2) == "0.65");
}

TEST_CASE("att_item corners") {
  CHECK(*att_item(make_tally(4, 0, 5, 0, 0, 3)).point == Rational(0));
  CHECK(*att_item(make_tally(4, 0, 0, 3, 1, 0)).point == Rational(1, 2));
  const auto none = att_item(make_tally(4, 7, 0, 0, 0, 2));
  CHECK_FALSE(none.defined);
  CHECK(none.reason == "no treated units");
}

TEST_CASE("ate_bound_item on the published item") {
  const auto result = ate_bound_item(published_item_tally());
  CHECK_FALSE(result.identified);
  CHECK(result.bound->lower == Rational(-59457, 69785));
  CHECK(result.bound->upper == Rational(-50729, 69785));
  CHECK(result.bound->lower.decimal(2) == "-0.85");
  CHECK(result.bound->upper.decimal(2) == "-0.73");
}

TEST_CASE("ate_bound_item reduces to the exact point for two choices") {
  const auto result = ate_bound_item(make_tally(2, 2, 0, 1, 1, 6));
  CHECK(result.identified);
  CHECK(*result.point == Rational(-2, 5));
  CHECK(result.lower() == result.upper());
}

TEST_CASE("ate_bound_item with only retained wrong-to-wrong mass") {
  const auto result = ate_bound_item(make_tally(4, 10, 0, 0, 0, 0));
  CHECK(result.bound->lower == Rational(0));
  CHECK(result.bound->upper == Rational(1));
}

TEST_CASE("atu_bound_item on the published item") {
  const auto result = atu_bound_item(published_item_tally());
  CHECK(result.bound->lower == Rational(-60086, 68814));
  CHECK(result.bound->upper == Rational(-51358, 68814));
  CHECK(result.bound->lower.decimal(2) == "-0.87");
  CHECK(result.bound->upper.decimal(2) == "-0.75");
}

TEST_CASE("atu_bound_item corners") {
  const auto all_right = atu_bound_item(make_tally(4, 0, 3, 0, 0, 5));
  CHECK(all_right.bound->lower == Rational(-1));
  CHECK(all_right.bound->upper == Rational(-1));

  const auto no_rr = atu_bound_item(make_tally(4, 5, 0, 0, 0, 0));
  CHECK(no_rr.bound->lower == Rational(0));
  CHECK(no_rr.bound->upper == Rational(1));

  const auto none = atu_bound_item(make_tally(4, 0, 2, 3, 1, 0));
  CHECK_FALSE(none.defined);
  CHECK(none.reason == "no control units");
}

TEST_CASE("test_level means") {
  std::vector<ItemEffects> items;
  items.push_back(analyze_item(make_tally(4, 0, 0, 3, 1, 0, "a")));  // att 1/2
  items.push_back(analyze_item(make_tally(4, 0, 2, 4, 1, 3, "b")));  // att 3/7
  SUBCASE("two-item mean") {
    items[0].att = EffectResult::point_result(Estimand::ATT, Level::Item, Rational(1, 2), "x");
    items[1].att = EffectResult::point_result(Estimand::ATT, Level::Item, Rational(3, 10), "x");
    const auto level = test_level(items);
    CHECK(*level.att.point == Rational(2, 5));  // mean of .5 and .3
  }
  SUBCASE("single item is the identity") {
    const auto level = test_level({items[0]});
    CHECK(*level.att.point == *items[0].att.point);
    CHECK(level.ate.lower() == items[0].ate.lower());
    CHECK(level.ate.upper() == items[0].ate.upper());
  }
  SUBCASE("endpoint-wise bound averaging") {
    const auto level = test_level(items);
    CHECK(level.ate.lower() == (items[0].ate.lower() + items[1].ate.lower()) / Rational(2));
    CHECK(level.ate.upper() == (items[0].ate.upper() + items[1].ate.upper()) / Rational(2));
  }
  SUBCASE("undefined items are excluded and counted") {
    items.push_back(analyze_item(make_tally(4, 6, 0, 0, 0, 1, "c")));  // no changers
    const auto level = test_level(items);
    CHECK(level.att_excluded == 1);
    CHECK(level.att.defined);
    CHECK(*level.att.point == (Rational(1, 2) + Rational(3, 7)) / Rational(2));
  }
  SUBCASE("all undefined means undefined") {
    std::vector<ItemEffects> silent = {analyze_item(make_tally(4, 6, 0, 0, 0, 1, "c"))};
    const auto level = test_level(silent);
    CHECK_FALSE(level.att.defined);
    CHECK(level.att_excluded == 1);
  }
}

TEST_CASE("collapsed_ate_bound on the pooled table") {
  const auto result = collapsed_ate_bound(pooled_table());
  CHECK(result.bound->lower == Rational(-86392, 166075));
  CHECK(result.bound->upper == Rational(-29805, 166075));
  CHECK(result.bound->lower.decimal(2, false) == "-.52");
  CHECK(result.bound->upper.decimal(2, false) == "-.18");
}

TEST_CASE("collapsed_ate_bound respects a known changed count") {
  auto tally = pooled_table();
  tally.n_ww_changed = 1000;
  const auto result = collapsed_ate_bound(tally);
  CHECK(result.bound->lower == Rational(-86392, 166075));
  CHECK(result.bound->upper == Rational(-30805, 166075));
}

TEST_CASE("collapsed_ate_bound all-zero counts") {
  ace::ingest::CollapsedTally tally;
  tally.n_examinees = 1;
  tally.n_items = 1;
  const auto result = collapsed_ate_bound(tally);
  CHECK(result.bound->lower == Rational(0));
  CHECK(result.bound->upper == Rational(0));
}

TEST_CASE("changer share diagnostic") {
  CHECK(changer_share(pooled_table()) == Rational(12997, 166065));
  CHECK(changer_share(pooled_table()).percent(2) == "7.83%");
}

TEST_CASE("collapsed_envelope on the pooled table") {
  const auto env = collapsed_envelope(pooled_table());
  REQUIRE(env.att.has_value());
  CHECK(env.att->lower == Rational(10089, 69584));
  CHECK(env.att->upper == Rational(10089, 12997));
  REQUIRE(env.atu.has_value());
  CHECK(env.atu->lower == Rational(-1));
  CHECK(env.atu->upper == Rational(-39894, 153068));
}

TEST_CASE("collapsed_envelope corners") {
  SUBCASE("no wrong-to-wrong mass degenerates to points") {
    ace::ingest::CollapsedTally tally;
    tally.n_wr = 4;
    tally.n_rw = 1;
    tally.n_rr = 5;
    tally.n_examinees = 10;
    tally.n_items = 1;
    const auto env = collapsed_envelope(tally);
    CHECK(env.att->lower == env.att->upper);
    CHECK(env.att->lower == Rational(3, 5));
    CHECK(env.atu->lower == env.atu->upper);
    CHECK(env.atu->lower == Rational(-1));
  }
  SUBCASE("no changers leaves the att envelope undefined") {
    ace::ingest::CollapsedTally tally;
    tally.n_ww = 3;
    tally.n_rr = 2;
    tally.n_examinees = 5;
    tally.n_items = 1;
    const auto env = collapsed_envelope(tally);
    CHECK_FALSE(env.att.has_value());
    CHECK(env.att_reason == "no obvious changers");
    CHECK(env.atu->lower == Rational(-1));
  }
  SUBCASE("no RR mass keeps the atu lower endpoint at zero") {
    ace::ingest::CollapsedTally tally;
    tally.n_ww = 3;
    tally.n_wr = 1;
    tally.n_examinees = 4;
    tally.n_items = 1;
    const auto env = collapsed_envelope(tally);
    CHECK(env.atu->lower == Rational(0));
    CHECK(env.atu->upper == Rational(1));
  }
}

TEST_CASE("att envelope is monotone in the changed count when WR > RW") {
  ace::ingest::CollapsedTally tally;
  tally.n_ww = 20;
  tally.n_wr = 9;
  tally.n_rw = 2;
  tally.n_rr = 5;
  tally.n_examinees = 36;
  tally.n_items = 1;
  Rational previous(2);  // above any possible value
  for (std::int64_t w3 = 0; w3 <= tally.n_ww; ++w3) {
    const Rational value(tally.n_wr - tally.n_rw, w3 + tally.n_wr + tally.n_rw);
    CHECK(value < previous);
    previous = value;
  }
  const auto env = collapsed_envelope(tally);
  CHECK(env.att->upper == Rational(7, 11));   // w3 = 0
  CHECK(env.att->lower == Rational(7, 31));   // w3 = n_ww
}

TEST_CASE("bounds are ordered, in range, and match brute force on random tallies") {
  ace::rng::Xoshiro256 gen(99);
  for (int trial = 0; trial < 300; ++trial) {
    const auto tally = make_tally(4, static_cast<std::int64_t>(gen.below(7)),
                                  static_cast<std::int64_t>(gen.below(7)),
                                  static_cast<std::int64_t>(gen.below(7)),
                                  static_cast<std::int64_t>(gen.below(7)),
                                  static_cast<std::int64_t>(gen.below(7)));
    if (tally.n_total == 0) continue;
    const auto ate = ate_bound_item(tally);
    const auto atu = atu_bound_item(tally);
    const auto oracle = ace::synth::brute_force_bounds(tally);

    CHECK(ate.lower() <= ate.upper());
    CHECK(Rational(-1) <= ate.lower());
    CHECK(ate.upper() <= Rational(1));
    CHECK(ate.lower() == oracle.ate.lower);
    CHECK(ate.upper() == oracle.ate.upper);

    CHECK(atu.defined == oracle.atu.has_value());
    if (atu.defined) {
      CHECK(atu.lower() <= atu.upper());
      CHECK(Rational(-1) <= atu.lower());
      CHECK(atu.upper() <= Rational(1));
      CHECK(atu.lower() == oracle.atu->lower);
      CHECK(atu.upper() == oracle.atu->upper);
    }

    const auto att = att_item(tally);
    if (att.defined) {
      // Sign agreement with the simple WR-vs-RW comparison.
      const std::int64_t diff = tally.n_wr - tally.n_rw;
      if (diff > 0) CHECK(*att.point > Rational(0));
      if (diff < 0) CHECK(*att.point < Rational(0));
      if (diff == 0) CHECK(*att.point == Rational(0));
    }
  }
}

TEST_CASE("two-choice collapse and weighted-average identity on random tallies") {
  ace::rng::Xoshiro256 gen(123);
  for (int trial = 0; trial < 300; ++trial) {
    const auto tally = random_two_choice_tally(gen);
    const auto ate = ate_bound_item(tally);
    const auto atu = atu_bound_item(tally);
    const auto exact = effects_true_false(tally);

    // The generic ATT formula degenerates to the two-choice one.
    const auto att = att_item(tally);
    CHECK(att.defined == exact.att.defined);
    if (att.defined) CHECK(*att.point == *exact.att.point);

    CHECK(ate.identified);
    CHECK(ate.lower() == ate.upper());
    CHECK(*ate.point == *exact.ate.point);
    CHECK(atu.defined == exact.atu.defined);
    if (atu.defined) {
      CHECK(atu.identified);
      CHECK(*atu.point == *exact.atu.point);
    }

    if (exact.att.defined && exact.atu.defined) {
      const Rational share = exact.treated_share;
      CHECK(*exact.ate.point ==
            share * *exact.att.point + (Rational(1) - share) * *exact.atu.point);
    }
  }
}

}  // TEST_SUITE
