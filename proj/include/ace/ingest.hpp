#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ace/model.hpp"

namespace ace::ingest {

/// Fatal input problem: bad header, malformed structure, invariant
/// violation. Row-level problems are reported, not thrown.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string message, std::int64_t line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message
                                    : std::move(message)),
        line_(line) {}
  std::int64_t line() const { return line_; }

 private:
  std::int64_t line_;
};

/// Scoring key and alternative set for one item.
struct KeyEntry {
  std::string item_id;
  std::string key;
  model::AlternativeSet alternatives;

  int k() const { return alternatives.k(); }
};

/// Wrong/right initial-final counts pooled across all items of a test.
/// The wrong-to-wrong-changed count is unobservable in this shape unless
/// the producer supplies it through the optional extended field.
struct CollapsedTally {
  std::int64_t n_ww = 0;
  std::int64_t n_wr = 0;
  std::int64_t n_rw = 0;
  std::int64_t n_rr = 0;
  std::int64_t n_examinees = 0;
  std::int64_t n_items = 0;
  std::optional<std::int64_t> n_ww_changed;

  std::int64_t observed_total() const { return n_ww + n_wr + n_rw + n_rr; }
};

void validate(const CollapsedTally& tally);

struct DropRecord {
  std::int64_t line;
  std::string reason;  // "nonresponse", "duplicate", "malformed"
};

struct ValidationReport {
  std::int64_t rows_read = 0;
  std::int64_t rows_kept = 0;
  std::int64_t rows_dropped = 0;
  std::vector<DropRecord> drops;
  std::vector<std::string> warnings;
};

struct ResponsesResult {
  std::vector<model::ResponseRecord> records;
  ValidationReport report;
};

/// Parse the long-format responses file. Rows with a blank initial or
/// final choice are dropped as nonresponses; duplicate (examinee, item)
/// pairs keep the first occurrence. Kept rows preserve file order.
ResponsesResult parse_responses(std::istream& in);

/// Cross-check: one warning per item whose record count falls short of
/// the number of distinct examinees seen anywhere in the file (usually
/// nonresponses on that item).
std::vector<std::string> examinee_coverage_warnings(
    const std::vector<model::ResponseRecord>& records);

/// Parse the keys file. Any structural problem is fatal.
std::vector<KeyEntry> parse_keys(std::istream& in);

/// A labeled k-by-k initial(row) x final(column) count matrix.
struct ItemMatrix {
  std::vector<std::string> labels;
  int key_index = -1;
  model::CountMatrix counts;

  int k() const { return static_cast<int>(labels.size()); }
};

ItemMatrix parse_item_matrix(std::istream& in);

struct CollapsedResult {
  CollapsedTally tally;
  std::vector<std::string> warnings;
};

CollapsedResult parse_collapsed(std::istream& in);

// Writers for the same formats, used for fixtures, round trips, and the
// synthetic lab's persisted outputs.
std::string write_responses(const std::vector<model::ResponseRecord>& records);
std::string write_keys(const std::vector<KeyEntry>& keys);
std::string write_item_matrix(const ItemMatrix& matrix);
std::string write_collapsed(const CollapsedTally& tally);

/// Trim ASCII whitespace from both ends.
std::string trim(const std::string& s);

}  // namespace ace::ingest
