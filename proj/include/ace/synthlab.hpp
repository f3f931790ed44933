#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ace/estimators.hpp"
#include "ace/ingest.hpp"
#include "ace/model.hpp"
#include "ace/rational.hpp"

namespace ace::synth {

/// One synthetic examinee-item cell with its full latent state. Both
/// potential outcomes are explicit, so every estimand has a ground truth.
struct LatentUnit {
  std::string examinee_id;
  std::string item_id;
  int f;   // first-answer correctness
  int t;   // change decision
  int y1;  // outcome had the answer been changed
  int y0;  // outcome had the answer been retained (= f)
  std::string initial;
  std::string final;
};

/// The persisted truth row: latent state without the choice labels
/// (those live in the responses file and are joined back during
/// verification).
struct TruthRow {
  std::string examinee_id;
  std::string item_id;
  int f;
  int t;
  int y1;
  int y0;
};

TruthRow to_row(const LatentUnit& unit);
std::vector<TruthRow> to_rows(const std::vector<LatentUnit>& units);

struct GenConfig {
  std::int64_t n_examinees = 200;
  int n_items = 10;
  int k = 4;
  double p_first_correct = 0.7;
  std::vector<double> p_first_correct_per_item;  // optional; size n_items when set
  double p_change_given_wrong = 0.08;
  double p_change_given_right = 0.02;
  // When set, overrides both conditional change probabilities: treatment
  // becomes independent of the first answer (no confounding).
  std::optional<double> p_change_unconditional;
  double p_switch_success = 0.5;  // P(y1 = 1 | f = 0); must be 1 when k = 2
  std::uint64_t seed = 1;
};

/// Throws std::invalid_argument on out-of-range probabilities, k < 2,
/// k = 2 with p_switch_success != 1, or a per-item vector of wrong size.
void validate(const GenConfig& config);

struct Population {
  std::vector<model::ResponseRecord> records;
  std::vector<ingest::KeyEntry> keys;
  std::vector<LatentUnit> units;
};

/// Draw a population cell by cell. Deterministic per seed; each
/// examinee-item cell uses its own indexed substream.
Population generate(const GenConfig& config);

struct ItemTruth {
  std::string item_id;
  Rational ate;
  std::optional<Rational> att;
  std::optional<Rational> atu;
  std::int64_t n_units = 0;
  std::int64_t n_treated = 0;
};

struct LatentCounts {
  std::int64_t ww1 = 0, ww2 = 0, ww3 = 0, wr = 0, rw = 0, rr = 0;
  std::int64_t total() const { return ww1 + ww2 + ww3 + wr + rw + rr; }
};

struct TruthSummary {
  std::vector<ItemTruth> items;
  // Pooled over all units; satisfies ate = share*att + (1-share)*atu.
  Rational ate;
  std::optional<Rational> att;
  std::optional<Rational> atu;
  Rational treated_share;
  // Mean of item-level truths, the aggregation the estimators use.
  std::optional<Rational> ate_item_mean;
  std::optional<Rational> att_item_mean;
  std::optional<Rational> atu_item_mean;
  int att_items_excluded = 0;
  int atu_items_excluded = 0;
  LatentCounts latent;
};

/// Ground-truth estimands by direct averaging of y1 - y0.
TruthSummary true_effects(const std::vector<TruthRow>& rows);

struct BruteForceBounds {
  estimators::Bound ate;
  std::optional<estimators::Bound> atu;  // absent when there are no control units
};

/// Enumerate every feasible latent split of the retained wrong-to-wrong
/// count and take exact min/max of the resulting ATE and ATU values.
/// Independent of the closed-form bound formulas; intended for small
/// tallies.
BruteForceBounds brute_force_bounds(const model::ItemTally& tally);

struct VerifyReport {
  bool passed = true;
  std::int64_t units_checked = 0;
  std::int64_t unit_failures = 0;
  int items_checked = 0;
  int att_mismatches = 0;
  int ate_violations = 0;
  int atu_violations = 0;
  bool test_level_checked = false;
  std::vector<std::string> failures;  // first few, itemized
};

/// End-to-end identification check of a generated population:
///  (a) ATT estimated from observables equals the true ATT exactly,
///      item by item and at test level;
///  (b) the true ATE and ATU lie inside their estimated bounds;
///  (c) structural consistency holds for every unit (y0 = f, observed
///      outcome matches the realized potential outcome, labels agree
///      with the latent state).
VerifyReport verify(const std::vector<model::ResponseRecord>& records,
                    const std::vector<ingest::KeyEntry>& keys,
                    const std::vector<TruthRow>& rows);

std::string write_truth(const std::vector<TruthRow>& rows);
std::vector<TruthRow> parse_truth(std::istream& in);

}  // namespace ace::synth
