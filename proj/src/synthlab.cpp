#include "ace/synthlab.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "ace/rng.hpp"

namespace ace::synth {

namespace {

std::string padded_id(char prefix, std::int64_t index, std::int64_t max_value) {
  std::string digits = std::to_string(index + 1);
  std::size_t width = std::to_string(max_value).size();
  std::string out(1, prefix);
  out.append(width > digits.size() ? width - digits.size() : 0, '0');
  out += digits;
  return out;
}

bool probability(double p) { return p >= 0.0 && p <= 1.0; }

int draw_bernoulli(rng::Xoshiro256& gen, double p) { return gen.unit() < p ? 1 : 0; }

}  // namespace

TruthRow to_row(const LatentUnit& unit) {
  return {unit.examinee_id, unit.item_id, unit.f, unit.t, unit.y1, unit.y0};
}

std::vector<TruthRow> to_rows(const std::vector<LatentUnit>& units) {
  std::vector<TruthRow> rows;
  rows.reserve(units.size());
  for (const auto& unit : units) rows.push_back(to_row(unit));
  return rows;
}

void validate(const GenConfig& config) {
  if (config.n_examinees < 1) throw std::invalid_argument("n_examinees must be >= 1");
  if (config.n_items < 1) throw std::invalid_argument("n_items must be >= 1");
  if (config.k < 2) throw std::invalid_argument("k must be >= 2");
  if (config.k > 26) throw std::invalid_argument("k must be <= 26 (canonical labels)");
  if (!probability(config.p_first_correct) || !probability(config.p_change_given_wrong) ||
      !probability(config.p_change_given_right) || !probability(config.p_switch_success)) {
    throw std::invalid_argument("probabilities must lie in [0, 1]");
  }
  if (config.p_change_unconditional && !probability(*config.p_change_unconditional)) {
    throw std::invalid_argument("probabilities must lie in [0, 1]");
  }
  if (config.k == 2 && config.p_switch_success != 1.0) {
    throw std::invalid_argument(
        "two-choice items force p_switch_success = 1 (changing a wrong answer "
        "always lands on the key)");
  }
  if (!config.p_first_correct_per_item.empty()) {
    if (static_cast<int>(config.p_first_correct_per_item.size()) != config.n_items) {
      throw std::invalid_argument("per-item p_first_correct must have n_items entries");
    }
    for (double p : config.p_first_correct_per_item) {
      if (!probability(p)) throw std::invalid_argument("probabilities must lie in [0, 1]");
    }
  }
}

Population generate(const GenConfig& config) {
  validate(config);
  const auto alts = model::AlternativeSet::canonical(config.k);
  const auto& labels = alts.labels();
  const std::int64_t cells = config.n_examinees * config.n_items;

  Population pop;
  pop.records.reserve(cells);
  pop.units.reserve(cells);
  pop.keys.reserve(config.n_items);

  // Per-item streams (key choice) live above the cell index space.
  std::vector<std::string> item_keys(config.n_items);
  std::vector<std::string> item_ids(config.n_items);
  for (int j = 0; j < config.n_items; ++j) {
    rng::Xoshiro256 gen = rng::substream(config.seed, static_cast<std::uint64_t>(cells) + j);
    item_ids[j] = padded_id('i', j, config.n_items);
    item_keys[j] = labels[gen.below(labels.size())];
    pop.keys.push_back({item_ids[j], item_keys[j], alts});
  }

  for (std::int64_t e = 0; e < config.n_examinees; ++e) {
    const std::string examinee_id = padded_id('e', e, config.n_examinees);
    for (int j = 0; j < config.n_items; ++j) {
      rng::Xoshiro256 gen =
          rng::substream(config.seed, static_cast<std::uint64_t>(e) * config.n_items + j);
      const std::string& key = item_keys[j];
      const int key_index = alts.index_of(key);
      const double p_first = config.p_first_correct_per_item.empty()
                                 ? config.p_first_correct
                                 : config.p_first_correct_per_item[j];

      LatentUnit unit;
      unit.examinee_id = examinee_id;
      unit.item_id = item_ids[j];
      unit.f = draw_bernoulli(gen, p_first);
      unit.y0 = unit.f;
      if (unit.f == 1) {
        unit.y1 = 0;  // a correct answer changed lands on a distractor
      } else if (config.k == 2) {
        unit.y1 = 1;
      } else {
        unit.y1 = draw_bernoulli(gen, config.p_switch_success);
      }
      const double p_change =
          config.p_change_unconditional
              ? *config.p_change_unconditional
              : (unit.f == 1 ? config.p_change_given_right : config.p_change_given_wrong);
      unit.t = draw_bernoulli(gen, p_change);

      // Realize choices consistent with (f, t, y1, y0).
      auto wrong_label_excluding = [&](int exclude_index) {
        // Uniform among wrong options, optionally excluding one of them.
        std::vector<int> pool;
        pool.reserve(labels.size());
        for (int idx = 0; idx < static_cast<int>(labels.size()); ++idx) {
          if (idx != key_index && idx != exclude_index) pool.push_back(idx);
        }
        return labels[pool[gen.below(pool.size())]];
      };
      unit.initial = unit.f == 1 ? key : wrong_label_excluding(-1);
      if (unit.t == 0) {
        unit.final = unit.initial;
      } else if (unit.y1 == 1) {
        unit.final = key;
      } else {
        unit.final = wrong_label_excluding(alts.index_of(unit.initial));
      }

      pop.records.push_back({examinee_id, unit.item_id, unit.initial, unit.final});
      pop.units.push_back(std::move(unit));
    }
  }
  return pop;
}

TruthSummary true_effects(const std::vector<TruthRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("true_effects needs at least one unit");

  struct ItemAcc {
    std::int64_t n = 0, treated = 0;
    std::int64_t tau_sum = 0, tau_treated = 0, tau_untreated = 0;
  };
  std::vector<std::string> order;
  std::unordered_map<std::string, ItemAcc> by_item;

  TruthSummary out;
  std::int64_t tau_sum = 0, tau_treated = 0, tau_untreated = 0, treated = 0;
  for (const auto& row : rows) {
    const int tau = row.y1 - row.y0;
    auto [it, inserted] = by_item.try_emplace(row.item_id);
    if (inserted) order.push_back(row.item_id);
    ItemAcc& acc = it->second;
    ++acc.n;
    acc.tau_sum += tau;
    tau_sum += tau;
    if (row.t == 1) {
      ++acc.treated;
      acc.tau_treated += tau;
      ++treated;
      tau_treated += tau;
    } else {
      acc.tau_untreated += tau;
      tau_untreated += tau;
    }
    // Latent class per the imputed table.
    if (row.f == 1) {
      row.t == 1 ? ++out.latent.rw : ++out.latent.rr;
    } else if (row.t == 1) {
      row.y1 == 1 ? ++out.latent.wr : ++out.latent.ww3;
    } else {
      row.y1 == 1 ? ++out.latent.ww1 : ++out.latent.ww2;
    }
  }

  const auto n = static_cast<std::int64_t>(rows.size());
  out.ate = Rational(tau_sum, n);
  out.treated_share = Rational(treated, n);
  if (treated > 0) out.att = Rational(tau_treated, treated);
  if (treated < n) out.atu = Rational(tau_untreated, n - treated);

  Rational ate_sum(0), att_sum(0), atu_sum(0);
  std::int64_t att_n = 0, atu_n = 0;
  for (const auto& item_id : order) {
    const ItemAcc& acc = by_item[item_id];
    ItemTruth truth;
    truth.item_id = item_id;
    truth.n_units = acc.n;
    truth.n_treated = acc.treated;
    truth.ate = Rational(acc.tau_sum, acc.n);
    ate_sum += truth.ate;
    if (acc.treated > 0) {
      truth.att = Rational(acc.tau_treated, acc.treated);
      att_sum += *truth.att;
      ++att_n;
    } else {
      ++out.att_items_excluded;
    }
    if (acc.treated < acc.n) {
      truth.atu = Rational(acc.tau_untreated, acc.n - acc.treated);
      atu_sum += *truth.atu;
      ++atu_n;
    } else {
      ++out.atu_items_excluded;
    }
    out.items.push_back(std::move(truth));
  }
  out.ate_item_mean = ate_sum / Rational(static_cast<std::int64_t>(out.items.size()));
  if (att_n > 0) out.att_item_mean = att_sum / Rational(att_n);
  if (atu_n > 0) out.atu_item_mean = atu_sum / Rational(atu_n);
  return out;
}

BruteForceBounds brute_force_bounds(const model::ItemTally& tally) {
  model::validate(tally);
  if (tally.n_total <= 0) throw std::invalid_argument("empty item tally");

  BruteForceBounds out;
  bool first = true;
  const std::int64_t untreated = tally.n_ww_retained + tally.n_rr;
  for (std::int64_t w1 = 0; w1 <= tally.n_ww_retained; ++w1) {
    // w2 = n_ww_retained - w1 is implied; ATE gains one per WW1 unit.
    const Rational ate(w1 + tally.n_wr - tally.n_rw - tally.n_rr, tally.n_total);
    if (first) {
      out.ate = {ate, ate};
    } else {
      out.ate.lower = std::min(out.ate.lower, ate);
      out.ate.upper = std::max(out.ate.upper, ate);
    }
    if (untreated > 0) {
      const Rational atu(w1 - tally.n_rr, untreated);
      if (first) {
        out.atu = estimators::Bound{atu, atu};
      } else {
        out.atu->lower = std::min(out.atu->lower, atu);
        out.atu->upper = std::max(out.atu->upper, atu);
      }
    }
    first = false;
  }
  return out;
}

namespace {

void note_failure(VerifyReport& report, std::string message) {
  report.passed = false;
  if (report.failures.size() < 25) report.failures.push_back(std::move(message));
}

}  // namespace

VerifyReport verify(const std::vector<model::ResponseRecord>& records,
                    const std::vector<ingest::KeyEntry>& keys,
                    const std::vector<TruthRow>& rows) {
  VerifyReport report;

  std::unordered_map<std::string, const ingest::KeyEntry*> key_by_item;
  for (const auto& entry : keys) key_by_item[entry.item_id] = &entry;

  std::unordered_map<std::string, const model::ResponseRecord*> record_by_pair;
  for (const auto& rec : records) {
    record_by_pair[rec.examinee_id + '\x1f' + rec.item_id] = &rec;
  }
  if (record_by_pair.size() != records.size()) {
    note_failure(report, "duplicate (examinee, item) pairs in records");
  }
  if (records.size() != rows.size()) {
    note_failure(report, "record count " + std::to_string(records.size()) +
                             " differs from truth row count " + std::to_string(rows.size()));
  }

  // (c) per-unit structural consistency.
  for (const auto& row : rows) {
    ++report.units_checked;
    auto fail = [&](const std::string& what) {
      ++report.unit_failures;
      note_failure(report, "unit (" + row.examinee_id + ", " + row.item_id + "): " + what);
    };
    const auto key_it = key_by_item.find(row.item_id);
    if (key_it == key_by_item.end()) {
      fail("no key entry for item");
      continue;
    }
    const auto rec_it = record_by_pair.find(row.examinee_id + '\x1f' + row.item_id);
    if (rec_it == record_by_pair.end()) {
      fail("no response record for unit");
      continue;
    }
    const ingest::KeyEntry& key = *key_it->second;
    const model::ResponseRecord& rec = *rec_it->second;
    const int f = rec.initial == key.key ? 1 : 0;
    const int t = rec.initial != rec.final ? 1 : 0;
    const int y = rec.final == key.key ? 1 : 0;
    bool ok = true;
    if (row.f != f) { fail("first-answer correctness disagrees with choices"); ok = false; }
    if (row.t != t) { fail("treatment status disagrees with choices"); ok = false; }
    if (row.y0 != row.f) { fail("retained potential outcome differs from first answer"); ok = false; }
    if (row.f == 1 && row.y1 != 0) { fail("changed correct answer must become wrong"); ok = false; }
    if (key.k() == 2 && row.y1 != 1 - row.f) { fail("two-choice potential outcome must flip"); ok = false; }
    if (ok && y != (t == 1 ? row.y1 : row.y0)) {
      fail("observed outcome differs from realized potential outcome");
    }
  }

  // (a) + (b): per-item estimates vs truth.
  std::map<std::string, std::vector<model::ResponseRecord>> records_by_item;
  for (const auto& rec : records) records_by_item[rec.item_id].push_back(rec);

  const TruthSummary truth = true_effects(rows);
  std::unordered_map<std::string, const ItemTruth*> truth_by_item;
  for (const auto& item : truth.items) truth_by_item[item.item_id] = &item;

  std::vector<estimators::ItemEffects> estimated;
  for (const auto& [item_id, item_records] : records_by_item) {
    const auto key_it = key_by_item.find(item_id);
    const auto truth_it = truth_by_item.find(item_id);
    if (key_it == key_by_item.end() || truth_it == truth_by_item.end()) {
      note_failure(report, "item " + item_id + ": missing key or truth");
      continue;
    }
    const ingest::KeyEntry& key = *key_it->second;
    const model::ItemTally tally =
        model::tally_item(item_records, key.key, key.alternatives, item_id);
    const estimators::ItemEffects effects = estimators::analyze_item(tally);
    const ItemTruth& item_truth = *truth_it->second;
    ++report.items_checked;

    if (effects.att.defined != item_truth.att.has_value()) {
      ++report.att_mismatches;
      note_failure(report, "item " + item_id + ": ATT definedness disagrees");
    } else if (effects.att.defined && *effects.att.point != *item_truth.att) {
      ++report.att_mismatches;
      note_failure(report, "item " + item_id + ": estimated ATT " +
                               effects.att.point->fraction() + " != true " +
                               item_truth.att->fraction());
    }
    if (effects.ate.defined &&
        !(effects.ate.lower() <= item_truth.ate && item_truth.ate <= effects.ate.upper())) {
      ++report.ate_violations;
      note_failure(report, "item " + item_id + ": true ATE " + item_truth.ate.fraction() +
                               " outside estimated bound");
    }
    if (effects.atu.defined && item_truth.atu &&
        !(effects.atu.lower() <= *item_truth.atu && *item_truth.atu <= effects.atu.upper())) {
      ++report.atu_violations;
      note_failure(report, "item " + item_id + ": true ATU " + item_truth.atu->fraction() +
                               " outside estimated bound");
    }
    estimated.push_back(effects);
  }

  if (!estimated.empty()) {
    report.test_level_checked = true;
    const estimators::TestLevelEffects level = estimators::test_level(estimated);
    if (level.att.defined != truth.att_item_mean.has_value()) {
      ++report.att_mismatches;
      note_failure(report, "test level: ATT definedness disagrees");
    } else if (level.att.defined && *level.att.point != *truth.att_item_mean) {
      ++report.att_mismatches;
      note_failure(report, "test level: estimated ATT " + level.att.point->fraction() +
                               " != true " + truth.att_item_mean->fraction());
    }
    if (level.ate.defined && truth.ate_item_mean &&
        !(level.ate.lower() <= *truth.ate_item_mean &&
          *truth.ate_item_mean <= level.ate.upper())) {
      ++report.ate_violations;
      note_failure(report, "test level: true ATE outside estimated bound");
    }
    if (level.atu.defined && truth.atu_item_mean &&
        !(level.atu.lower() <= *truth.atu_item_mean &&
          *truth.atu_item_mean <= level.atu.upper())) {
      ++report.atu_violations;
      note_failure(report, "test level: true ATU outside estimated bound");
    }
  }

  return report;
}

std::string write_truth(const std::vector<TruthRow>& rows) {
  std::ostringstream out;
  out << "examinee_id,item_id,f,t,y1,y0\n";
  for (const auto& row : rows) {
    out << row.examinee_id << ',' << row.item_id << ',' << row.f << ',' << row.t << ','
        << row.y1 << ',' << row.y0 << '\n';
  }
  return out.str();
}

std::vector<TruthRow> parse_truth(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ingest::ParseError("empty truth file", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (ingest::trim(line) != "examinee_id,item_id,f,t,y1,y0") {
    throw ingest::ParseError("truth header must be 'examinee_id,item_id,f,t,y1,y0'", 1);
  }
  std::vector<TruthRow> rows;
  std::int64_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (ingest::trim(line).empty()) continue;
    std::vector<std::string> fields;
    std::string::size_type start = 0;
    for (;;) {
      auto pos = line.find(',', start);
      if (pos == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, pos - start));
      start = pos + 1;
    }
    if (fields.size() != 6) throw ingest::ParseError("truth row needs 6 fields", line_no);
    auto bit = [&](const std::string& text) {
      const std::string t = ingest::trim(text);
      if (t == "0") return 0;
      if (t == "1") return 1;
      throw ingest::ParseError("truth flags must be 0 or 1", line_no);
    };
    rows.push_back({ingest::trim(fields[0]), ingest::trim(fields[1]), bit(fields[2]),
                    bit(fields[3]), bit(fields[4]), bit(fields[5])});
  }
  return rows;
}

}  // namespace ace::synth
