#include "ace/model.hpp"

#include <stdexcept>
#include <unordered_set>

namespace ace::model {

AlternativeSet AlternativeSet::canonical(int k) {
  if (k < 2) throw std::invalid_argument("alternative set needs k >= 2");
  if (k > 26) {
    throw std::invalid_argument(
        "canonical labels stop at 26 alternatives; supply explicit labels");
  }
  std::vector<std::string> labels;
  labels.reserve(k);
  for (int i = 0; i < k; ++i) labels.push_back(std::string(1, static_cast<char>('A' + i)));
  return AlternativeSet(std::move(labels));
}

AlternativeSet AlternativeSet::with_labels(std::vector<std::string> labels) {
  return AlternativeSet(std::move(labels));
}

AlternativeSet::AlternativeSet(std::vector<std::string> labels)
    : labels_(std::move(labels)) {
  if (labels_.size() < 2) throw std::invalid_argument("alternative set needs k >= 2");
  std::unordered_set<std::string> seen;
  for (const auto& label : labels_) {
    if (label.empty()) throw std::invalid_argument("empty alternative label");
    if (!seen.insert(label).second) {
      throw std::invalid_argument("duplicate alternative label: " + label);
    }
  }
}

int AlternativeSet::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == label) return static_cast<int>(i);
  }
  return -1;
}

std::string to_string(ResponseType type) {
  switch (type) {
    case ResponseType::WWRetained: return "WW_retained";
    case ResponseType::WWChanged: return "WW_changed";
    case ResponseType::WR: return "WR";
    case ResponseType::RW: return "RW";
    case ResponseType::RR: return "RR";
  }
  return "?";
}

ClassifyResult classify(const std::string& initial, const std::string& final,
                        const std::string& key, const AlternativeSet& alts) {
  if (!alts.contains(key)) throw std::invalid_argument("key not in alternative set: " + key);
  if (!alts.contains(initial)) {
    throw std::invalid_argument("initial choice not in alternative set: " + initial);
  }
  if (!alts.contains(final)) {
    throw std::invalid_argument("final choice not in alternative set: " + final);
  }
  const bool first_correct = initial == key;
  const bool final_correct = final == key;
  const int t = initial != final ? 1 : 0;
  ResponseType type;
  if (first_correct && final_correct) {
    type = ResponseType::RR;  // same choice twice: t is necessarily 0
  } else if (first_correct) {
    type = ResponseType::RW;
  } else if (final_correct) {
    type = ResponseType::WR;
  } else {
    type = t == 1 ? ResponseType::WWChanged : ResponseType::WWRetained;
  }
  return {type, t};
}

ClassifyResult classify(const std::string& initial, const std::string& final,
                        const std::string& key, int k) {
  return classify(initial, final, key, AlternativeSet::canonical(k));
}

void validate(const ItemTally& tally) {
  const std::int64_t counts[] = {tally.n_ww_retained, tally.n_ww_changed,
                                 tally.n_wr, tally.n_rw, tally.n_rr};
  for (std::int64_t c : counts) {
    if (c < 0) throw std::invalid_argument("negative tally count");
  }
  std::int64_t sum = 0;
  for (std::int64_t c : counts) sum += c;
  if (sum != tally.n_total) throw std::invalid_argument("tally counts do not sum to n_total");
  if (tally.k < 2) throw std::invalid_argument("tally needs k >= 2");
  if (tally.k == 2 && tally.n_ww_changed != 0) {
    throw std::invalid_argument("two-choice item cannot have wrong-to-wrong changes");
  }
}

ItemTally tally_from_matrix(const CountMatrix& counts, int key_index, int k,
                            std::string item_id) {
  if (k < 2) throw std::invalid_argument("matrix needs k >= 2");
  if (key_index < 0 || key_index >= k) throw std::invalid_argument("key index out of range");
  if (static_cast<int>(counts.size()) != k) {
    throw std::invalid_argument("matrix row count does not match k");
  }
  ItemTally tally;
  tally.item_id = std::move(item_id);
  tally.k = k;
  for (int r = 0; r < k; ++r) {
    if (static_cast<int>(counts[r].size()) != k) {
      throw std::invalid_argument("matrix is not square");
    }
    for (int c = 0; c < k; ++c) {
      const std::int64_t n = counts[r][c];
      if (n < 0) throw std::invalid_argument("negative matrix cell");
      if (r == key_index && c == key_index) {
        tally.n_rr += n;
      } else if (r == key_index) {
        tally.n_rw += n;
      } else if (c == key_index) {
        tally.n_wr += n;
      } else if (r == c) {
        tally.n_ww_retained += n;
      } else {
        tally.n_ww_changed += n;
      }
      tally.n_total += n;
    }
  }
  validate(tally);
  return tally;
}

ItemTally tally_item(const std::vector<ResponseRecord>& records,
                     const std::string& key, const AlternativeSet& alts,
                     std::string item_id) {
  ItemTally tally;
  tally.k = alts.k();
  if (!records.empty() && item_id.empty()) item_id = records.front().item_id;
  tally.item_id = std::move(item_id);
  std::unordered_set<std::string> seen;
  for (const auto& rec : records) {
    if (!tally.item_id.empty() && rec.item_id != tally.item_id) {
      throw std::invalid_argument("tally_item given records for multiple items");
    }
    if (!seen.insert(rec.examinee_id).second) {
      throw std::invalid_argument("duplicate examinee in item records: " + rec.examinee_id);
    }
    const auto cls = classify(rec.initial, rec.final, key, alts);
    switch (cls.type) {
      case ResponseType::WWRetained: ++tally.n_ww_retained; break;
      case ResponseType::WWChanged: ++tally.n_ww_changed; break;
      case ResponseType::WR: ++tally.n_wr; break;
      case ResponseType::RW: ++tally.n_rw; break;
      case ResponseType::RR: ++tally.n_rr; break;
    }
    ++tally.n_total;
  }
  validate(tally);
  return tally;
}

std::string to_string(LatentClass cls) {
  switch (cls) {
    case LatentClass::WW: return "WW";
    case LatentClass::WW1: return "WW1";
    case LatentClass::WW2: return "WW2";
    case LatentClass::WW3: return "WW3";
    case LatentClass::WR: return "WR";
    case LatentClass::RW: return "RW";
    case LatentClass::RR: return "RR";
  }
  return "?";
}

std::vector<PotentialRow> impute_rows(int k) {
  if (k < 2) throw std::invalid_argument("impute_rows needs k >= 2");
  std::vector<PotentialRow> rows;
  if (k == 2) {
    // Changing a two-choice answer always flips correctness, so every
    // potential outcome is determinate.
    rows.push_back({LatentClass::WW, 0, 1, 0, +1});
    rows.push_back({LatentClass::WR, 1, 1, 0, +1});
    rows.push_back({LatentClass::RW, 1, 0, 1, -1});
    rows.push_back({LatentClass::RR, 0, 0, 1, -1});
  } else {
    rows.push_back({LatentClass::WW1, 0, 1, 0, +1});
    rows.push_back({LatentClass::WW2, 0, 0, 0, 0});
    rows.push_back({LatentClass::WW3, 1, 0, 0, 0});
    rows.push_back({LatentClass::WR, 1, 1, 0, +1});
    rows.push_back({LatentClass::RW, 1, 0, 1, -1});
    rows.push_back({LatentClass::RR, 0, 0, 1, -1});
  }
  return rows;
}

}  // namespace ace::model
