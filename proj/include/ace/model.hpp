#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ace::model {

/// The declared alternative labels of one item. Canonical sets are the
/// first k uppercase letters (A, B, C, ...); exams with other option
/// schemes supply explicit labels.
class AlternativeSet {
 public:
  static AlternativeSet canonical(int k);
  static AlternativeSet with_labels(std::vector<std::string> labels);

  int k() const { return static_cast<int>(labels_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }
  bool contains(const std::string& label) const { return index_of(label) >= 0; }
  int index_of(const std::string& label) const;

 private:
  explicit AlternativeSet(std::vector<std::string> labels);
  std::vector<std::string> labels_;
};

/// One examinee's initial and final choice on one item.
struct ResponseRecord {
  std::string examinee_id;
  std::string item_id;
  std::string initial;
  std::string final;
};

/// Observable response classes. Wrong-to-wrong splits by whether the
/// answer was changed: retained (T=0) or changed to a different wrong
/// option (T=1, only possible with three or more alternatives).
enum class ResponseType { WWRetained, WWChanged, WR, RW, RR };

std::string to_string(ResponseType type);

struct ClassifyResult {
  ResponseType type;
  int t;  // 1 iff initial != final
};

/// Map one observed (initial, final) pair to its response class and
/// treatment status. Throws std::invalid_argument when a label is outside
/// the alternative set.
ClassifyResult classify(const std::string& initial, const std::string& final,
                        const std::string& key, const AlternativeSet& alts);

/// Convenience overload over the canonical k-letter alternative set.
ClassifyResult classify(const std::string& initial, const std::string& final,
                        const std::string& key, int k);

/// Counts of the five observable response classes for one item.
struct ItemTally {
  std::string item_id;
  int k = 0;
  std::int64_t n_ww_retained = 0;
  std::int64_t n_ww_changed = 0;
  std::int64_t n_wr = 0;
  std::int64_t n_rw = 0;
  std::int64_t n_rr = 0;
  std::int64_t n_total = 0;

  std::int64_t n_ww() const { return n_ww_retained + n_ww_changed; }
  std::int64_t n_changed() const { return n_ww_changed + n_wr + n_rw; }
  std::int64_t n_retained() const { return n_ww_retained + n_rr; }
};

/// Throws std::invalid_argument when counts are negative, do not sum to
/// n_total, or violate the k=2 structure (no wrong-to-wrong changes).
void validate(const ItemTally& tally);

using CountMatrix = std::vector<std::vector<std::int64_t>>;

/// Collapse a k-by-k initial(row) x final(column) count matrix into an
/// ItemTally given the key's index.
ItemTally tally_from_matrix(const CountMatrix& counts, int key_index, int k,
                            std::string item_id = {});

/// Tally a list of records for a single item. Duplicate (examinee, item)
/// pairs and mixed item ids are validation errors.
ItemTally tally_item(const std::vector<ResponseRecord>& records,
                     const std::string& key, const AlternativeSet& alts,
                     std::string item_id = {});

/// Latent response classes: WW is the two-choice aggregate; WW1/WW2/WW3
/// are the k>2 split of wrong-to-wrong by treatment status and potential
/// treatment outcome.
enum class LatentClass { WW, WW1, WW2, WW3, WR, RW, RR };

std::string to_string(LatentClass cls);

/// One row of the imputed potential-outcome table.
struct PotentialRow {
  LatentClass cls;
  int t;
  std::optional<int> y1;   // absent = indeterminate
  int y0;
  std::optional<int> tau;  // y1 - y0 when y1 is determinate
};

/// The imputed potential-outcome table for a k-choice item: four fully
/// determinate rows for k=2, six rows (with the wrong-to-wrong split)
/// for k>2. Throws std::invalid_argument for k < 2.
std::vector<PotentialRow> impute_rows(int k);

}  // namespace ace::model
