#include "ace/estimators.hpp"

#include <stdexcept>

namespace ace::estimators {

namespace {

constexpr const char* kBasisExactTwoChoice = "exact-two-choice";
constexpr const char* kBasisObservedPoint = "observed-point";
constexpr const char* kBasisLatentSplitBound = "latent-split-bound";
constexpr const char* kBasisItemMean = "item-mean";
constexpr const char* kBasisPooledBound = "pooled-bound";

void require_nonempty(const model::ItemTally& tally) {
  model::validate(tally);
  if (tally.n_total <= 0) throw std::invalid_argument("empty item tally");
}

}  // namespace

std::string to_string(Estimand estimand) {
  switch (estimand) {
    case Estimand::ATE: return "ATE";
    case Estimand::ATT: return "ATT";
    case Estimand::ATU: return "ATU";
  }
  return "?";
}

EffectResult EffectResult::point_result(Estimand estimand, Level level, Rational value,
                                        std::string basis) {
  EffectResult r;
  r.estimand = estimand;
  r.level = level;
  r.defined = true;
  r.identified = true;
  r.point = value;
  r.basis = std::move(basis);
  return r;
}

EffectResult EffectResult::bound_result(Estimand estimand, Level level, Bound bound,
                                        std::string basis) {
  if (bound.upper < bound.lower) throw std::invalid_argument("inverted bound");
  EffectResult r;
  r.estimand = estimand;
  r.level = level;
  r.defined = true;
  r.identified = false;
  r.bound = bound;
  r.basis = std::move(basis);
  return r;
}

EffectResult EffectResult::undefined(Estimand estimand, Level level, std::string reason) {
  EffectResult r;
  r.estimand = estimand;
  r.level = level;
  r.defined = false;
  r.identified = false;
  r.reason = std::move(reason);
  return r;
}

Rational EffectResult::lower() const {
  if (point) return *point;
  if (bound) return bound->lower;
  throw std::logic_error("undefined effect has no bound");
}

Rational EffectResult::upper() const {
  if (point) return *point;
  if (bound) return bound->upper;
  throw std::logic_error("undefined effect has no bound");
}

EffectResult att_item(const model::ItemTally& tally) {
  require_nonempty(tally);
  const std::int64_t den = tally.n_changed();
  if (den == 0) {
    return EffectResult::undefined(Estimand::ATT, Level::Item, "no treated units");
  }
  return EffectResult::point_result(Estimand::ATT, Level::Item,
                                    Rational(tally.n_wr - tally.n_rw, den),
                                    kBasisObservedPoint);
}

EffectResult ate_bound_item(const model::ItemTally& tally) {
  require_nonempty(tally);
  if (tally.k == 2) {
    // Determinate case: wrong-to-wrong retainers would have gained.
    const Rational point(tally.n_ww_retained + tally.n_wr - tally.n_rw - tally.n_rr,
                         tally.n_total);
    return EffectResult::point_result(Estimand::ATE, Level::Item, point,
                                      kBasisExactTwoChoice);
  }
  const Rational lower(tally.n_wr - tally.n_rw - tally.n_rr, tally.n_total);
  const Rational upper(tally.n_ww_retained + tally.n_wr - tally.n_rw - tally.n_rr,
                       tally.n_total);
  return EffectResult::bound_result(Estimand::ATE, Level::Item, {lower, upper},
                                    kBasisLatentSplitBound);
}

EffectResult atu_bound_item(const model::ItemTally& tally) {
  require_nonempty(tally);
  const std::int64_t den = tally.n_retained();
  if (den == 0) {
    return EffectResult::undefined(Estimand::ATU, Level::Item, "no control units");
  }
  if (tally.k == 2) {
    return EffectResult::point_result(Estimand::ATU, Level::Item,
                                      Rational(tally.n_ww_retained - tally.n_rr, den),
                                      kBasisExactTwoChoice);
  }
  const Rational lower(-tally.n_rr, den);
  const Rational upper(tally.n_ww_retained - tally.n_rr, den);
  return EffectResult::bound_result(Estimand::ATU, Level::Item, {lower, upper},
                                    kBasisLatentSplitBound);
}

ItemEffects effects_true_false(const model::ItemTally& tally) {
  require_nonempty(tally);
  if (tally.k != 2) throw std::invalid_argument("effects_true_false needs k = 2");

  ItemEffects out;
  out.item_id = tally.item_id;
  out.treated_share = Rational(tally.n_changed(), tally.n_total);
  out.ate = EffectResult::point_result(
      Estimand::ATE, Level::Item,
      Rational(tally.n_ww_retained + tally.n_wr - tally.n_rw - tally.n_rr, tally.n_total),
      kBasisExactTwoChoice);
  if (tally.n_wr + tally.n_rw == 0) {
    out.att = EffectResult::undefined(Estimand::ATT, Level::Item, "no treated units");
  } else {
    out.att = EffectResult::point_result(
        Estimand::ATT, Level::Item,
        Rational(tally.n_wr - tally.n_rw, tally.n_wr + tally.n_rw), kBasisExactTwoChoice);
  }
  if (tally.n_ww_retained + tally.n_rr == 0) {
    out.atu = EffectResult::undefined(Estimand::ATU, Level::Item, "no control units");
  } else {
    out.atu = EffectResult::point_result(
        Estimand::ATU, Level::Item,
        Rational(tally.n_ww_retained - tally.n_rr, tally.n_ww_retained + tally.n_rr),
        kBasisExactTwoChoice);
  }
  return out;
}

ItemEffects analyze_item(const model::ItemTally& tally) {
  model::validate(tally);
  ItemEffects out;
  out.item_id = tally.item_id;
  if (tally.n_total <= 0) {
    out.att = EffectResult::undefined(Estimand::ATT, Level::Item, "no responses");
    out.ate = EffectResult::undefined(Estimand::ATE, Level::Item, "no responses");
    out.atu = EffectResult::undefined(Estimand::ATU, Level::Item, "no responses");
    out.treated_share = Rational(0);
    return out;
  }
  if (tally.k == 2) {
    out = effects_true_false(tally);
    // The generic ATT denominator includes changed wrong-to-wrong, which
    // is structurally zero here, so the two formulas agree.
    return out;
  }
  out.treated_share = Rational(tally.n_changed(), tally.n_total);
  out.att = att_item(tally);
  out.ate = ate_bound_item(tally);
  out.atu = atu_bound_item(tally);
  return out;
}

TestLevelEffects test_level(const std::vector<ItemEffects>& items) {
  if (items.empty()) throw std::invalid_argument("test_level needs at least one item");
  TestLevelEffects out;
  out.items = static_cast<int>(items.size());

  Rational att_sum(0);
  std::int64_t att_n = 0;
  Rational ate_lo(0), ate_hi(0);
  std::int64_t ate_n = 0;
  Rational atu_lo(0), atu_hi(0);
  std::int64_t atu_n = 0;
  bool ate_all_points = true;
  bool atu_all_points = true;

  for (const auto& item : items) {
    if (item.att.defined) {
      att_sum += *item.att.point;
      ++att_n;
    } else {
      ++out.att_excluded;
    }
    if (item.ate.defined) {
      ate_lo += item.ate.lower();
      ate_hi += item.ate.upper();
      ate_all_points = ate_all_points && item.ate.identified;
      ++ate_n;
    } else {
      ++out.ate_excluded;
    }
    if (item.atu.defined) {
      atu_lo += item.atu.lower();
      atu_hi += item.atu.upper();
      atu_all_points = atu_all_points && item.atu.identified;
      ++atu_n;
    } else {
      ++out.atu_excluded;
    }
  }

  if (att_n == 0) {
    out.att = EffectResult::undefined(Estimand::ATT, Level::Test, "no item with treated units");
  } else {
    out.att = EffectResult::point_result(Estimand::ATT, Level::Test,
                                         att_sum / Rational(att_n), kBasisItemMean);
  }
  auto aggregate = [](Estimand estimand, Rational lo_sum, Rational hi_sum, std::int64_t n,
                      bool all_points, const char* missing_reason) {
    if (n == 0) return EffectResult::undefined(estimand, Level::Test, missing_reason);
    const Rational lo = lo_sum / Rational(n);
    const Rational hi = hi_sum / Rational(n);
    if (all_points) {
      return EffectResult::point_result(estimand, Level::Test, lo, kBasisItemMean);
    }
    return EffectResult::bound_result(estimand, Level::Test, {lo, hi}, kBasisItemMean);
  };
  out.ate = aggregate(Estimand::ATE, ate_lo, ate_hi, ate_n, ate_all_points,
                      "no item with responses");
  out.atu = aggregate(Estimand::ATU, atu_lo, atu_hi, atu_n, atu_all_points,
                      "no item with control units");
  return out;
}

EffectResult collapsed_ate_bound(const ingest::CollapsedTally& tally) {
  ingest::validate(tally);
  const std::int64_t nj = tally.n_examinees * tally.n_items;
  const std::int64_t ww_free =
      tally.n_ww - (tally.n_ww_changed ? *tally.n_ww_changed : 0);
  const Rational lower(tally.n_wr - tally.n_rw - tally.n_rr, nj);
  const Rational upper(ww_free + tally.n_wr - tally.n_rw - tally.n_rr, nj);
  return EffectResult::bound_result(Estimand::ATE, Level::Test, {lower, upper},
                                    kBasisPooledBound);
}

Rational changer_share(const ingest::CollapsedTally& tally) {
  ingest::validate(tally);
  const std::int64_t total = tally.observed_total();
  if (total == 0) return Rational(0);
  return Rational(tally.n_wr + tally.n_rw, total);
}

CollapsedEnvelope collapsed_envelope(const ingest::CollapsedTally& tally) {
  ingest::validate(tally);
  CollapsedEnvelope env;

  const std::int64_t changers = tally.n_wr + tally.n_rw;
  if (changers == 0) {
    env.att_reason = "no obvious changers";
  } else {
    // f(w3) = (wr - rw) / (w3 + wr + rw) is monotone in w3.
    const Rational at_zero(tally.n_wr - tally.n_rw, changers);
    const Rational at_full(tally.n_wr - tally.n_rw, tally.n_ww + changers);
    env.att = at_zero <= at_full ? Bound{at_zero, at_full} : Bound{at_full, at_zero};
  }

  if (tally.n_ww + tally.n_rr == 0) {
    env.atu_reason = "no possible control units";
  } else if (tally.n_ww == 0) {
    // Nothing to allocate: the bound at w3 = 0 is the whole envelope.
    const Rational lower(-tally.n_rr, tally.n_rr);
    env.atu = Bound{lower, lower};
  } else if (tally.n_rr == 0) {
    // No RR mass: the lower endpoint cannot drop below zero.
    env.atu = Bound{Rational(0), Rational(1)};
  } else {
    // Lower endpoint -> -1 as w3 -> n_ww; upper endpoint is largest at w3 = 0.
    const Rational lower(-1);
    const Rational upper(tally.n_ww - tally.n_rr, tally.n_ww + tally.n_rr);
    env.atu = Bound{lower, upper};
  }
  return env;
}

}  // namespace ace::estimators
