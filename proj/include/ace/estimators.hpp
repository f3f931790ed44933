#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ace/ingest.hpp"
#include "ace/model.hpp"
#include "ace/rational.hpp"

namespace ace::estimators {

enum class Estimand { ATE, ATT, ATU };
enum class Level { Item, Test };

std::string to_string(Estimand estimand);

struct Bound {
  Rational lower;
  Rational upper;
};

/// One estimand at item or test level. A result is either a point
/// (identified), a [lower, upper] bound (partially identified), or
/// undefined with a reason (no treated or no control units). Undefined
/// results are ordinary values so aggregation can count and skip them.
struct EffectResult {
  Estimand estimand = Estimand::ATE;
  Level level = Level::Item;
  bool defined = true;
  bool identified = false;
  std::optional<Rational> point;
  std::optional<Bound> bound;
  std::string basis;
  std::string reason;

  static EffectResult point_result(Estimand estimand, Level level, Rational value,
                                   std::string basis);
  static EffectResult bound_result(Estimand estimand, Level level, Bound bound,
                                   std::string basis);
  static EffectResult undefined(Estimand estimand, Level level, std::string reason);

  /// Bound view of the result: a point counts as a width-0 interval.
  Rational lower() const;
  Rational upper() const;
};

struct ItemEffects {
  std::string item_id;
  EffectResult att;
  EffectResult ate;
  EffectResult atu;
  Rational treated_share;
};

/// ATT from observable proportions: (WR - RW) / (WW_changed + WR + RW).
/// Identified for every k. Undefined when the item has no changers.
EffectResult att_item(const model::ItemTally& tally);

/// ATE bound from the latent wrong-to-wrong split. The upper bound uses
/// only the retained wrong-to-wrong mass, since changed wrong-to-wrong is
/// observed and contributes no gain. Collapses to the exact two-choice
/// point when k = 2.
EffectResult ate_bound_item(const model::ItemTally& tally);

/// ATU bound over untreated units (retained wrong-to-wrong plus RR).
/// Collapses to the exact two-choice point when k = 2. Undefined when
/// there are no untreated units.
EffectResult atu_bound_item(const model::ItemTally& tally);

/// Exact two-choice effects: with only two alternatives every potential
/// outcome is determinate, so ATE, ATT, and ATU are all points.
ItemEffects effects_true_false(const model::ItemTally& tally);

/// Bundle ATT point, ATE bound, and ATU bound for one item.
ItemEffects analyze_item(const model::ItemTally& tally);

struct TestLevelEffects {
  EffectResult ate;
  EffectResult att;
  EffectResult atu;
  int items = 0;
  int att_excluded = 0;
  int ate_excluded = 0;
  int atu_excluded = 0;
};

/// Test-level aggregation: ATT is the mean of defined item ATT points;
/// ATE and ATU bounds are endpoint-wise means of the item bounds. Items
/// with an undefined estimand are excluded from that estimand's mean and
/// counted.
TestLevelEffects test_level(const std::vector<ItemEffects>& items);

/// Test-level ATE bound from a collapsed table. The denominator is
/// n_examinees * n_items even when observed counts fall short of it.
/// When the extended wrong-to-wrong-changed count is present the upper
/// bound shrinks by it.
EffectResult collapsed_ate_bound(const ingest::CollapsedTally& tally);

/// Share of obvious changers (WR + RW) among observed responses.
Rational changer_share(const ingest::CollapsedTally& tally);

struct CollapsedEnvelope {
  std::optional<Bound> att;
  std::optional<Bound> atu;
  std::string att_reason;
  std::string atu_reason;
};

/// Closed-form extremes, over every feasible wrong-to-wrong-changed count
/// w3 in [0, n_ww], of the pooled ATT point and of the pooled ATU bound
/// endpoints. These are the corners the simulation's random splits can
/// approach. The pooled ATT is monotone in w3, so endpoints suffice; the
/// ATU lower endpoint degenerates to -1 at w3 = n_ww whenever RR mass
/// exists.
CollapsedEnvelope collapsed_envelope(const ingest::CollapsedTally& tally);

}  // namespace ace::estimators
