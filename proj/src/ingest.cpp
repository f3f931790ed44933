#include "ace/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace ace::ingest {

namespace {

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string::size_type start = 0;
  for (;;) {
    auto pos = line.find(delim, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

bool next_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

std::int64_t parse_count(const std::string& text, std::int64_t line_no) {
  const std::string t = trim(text);
  std::int64_t value = 0;
  const char* begin = t.data();
  const char* end = begin + t.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || t.empty()) {
    throw ParseError("not an integer: '" + t + "'", line_no);
  }
  return value;
}

void check_field(const std::string& value, const char* what) {
  if (value.find_first_of(",\n\r\"") != std::string::npos) {
    throw std::invalid_argument(std::string(what) + " contains a delimiter: " + value);
  }
}

}  // namespace

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

void validate(const CollapsedTally& tally) {
  const std::int64_t counts[] = {tally.n_ww, tally.n_wr, tally.n_rw, tally.n_rr};
  for (std::int64_t c : counts) {
    if (c < 0) throw std::invalid_argument("negative collapsed count");
  }
  if (tally.n_examinees <= 0) throw std::invalid_argument("n_examinees must be positive");
  if (tally.n_items <= 0) throw std::invalid_argument("n_items must be positive");
  if (tally.observed_total() > tally.n_examinees * tally.n_items) {
    throw std::invalid_argument("collapsed counts exceed n_examinees * n_items");
  }
  if (tally.n_ww_changed) {
    if (*tally.n_ww_changed < 0) throw std::invalid_argument("negative ww_changed count");
    if (*tally.n_ww_changed > tally.n_ww) {
      throw std::invalid_argument("ww_changed exceeds the wrong-to-wrong total");
    }
  }
}

ResponsesResult parse_responses(std::istream& in) {
  std::string line;
  if (!next_line(in, line)) throw ParseError("empty responses file", 1);
  const auto header = split(line, ',');
  const std::vector<std::string> expected = {"examinee_id", "item_id", "initial", "final"};
  if (header.size() != expected.size()) {
    throw ParseError("responses header must be 'examinee_id,item_id,initial,final'", 1);
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (trim(header[i]) != expected[i]) {
      throw ParseError("responses header must be 'examinee_id,item_id,initial,final'", 1);
    }
  }

  ResponsesResult result;
  std::unordered_set<std::string> seen;
  std::int64_t line_no = 1;
  while (next_line(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++result.report.rows_read;
    auto fields = split(line, ',');
    if (fields.size() != 4) {
      result.report.drops.push_back({line_no, "malformed"});
      continue;
    }
    model::ResponseRecord rec{trim(fields[0]), trim(fields[1]), trim(fields[2]),
                              trim(fields[3])};
    if (rec.examinee_id.empty() || rec.item_id.empty()) {
      result.report.drops.push_back({line_no, "malformed"});
      continue;
    }
    if (rec.initial.empty() || rec.final.empty()) {
      result.report.drops.push_back({line_no, "nonresponse"});
      continue;
    }
    std::string pair_key = rec.examinee_id;
    pair_key += '\x1f';
    pair_key += rec.item_id;
    if (!seen.insert(std::move(pair_key)).second) {
      result.report.drops.push_back({line_no, "duplicate"});
      continue;
    }
    result.records.push_back(std::move(rec));
  }
  result.report.rows_kept = static_cast<std::int64_t>(result.records.size());
  result.report.rows_dropped = static_cast<std::int64_t>(result.report.drops.size());
  return result;
}

std::vector<std::string> examinee_coverage_warnings(
    const std::vector<model::ResponseRecord>& records) {
  std::unordered_set<std::string> examinees;
  std::unordered_map<std::string, std::int64_t> per_item;
  std::vector<std::string> item_order;
  for (const auto& rec : records) {
    examinees.insert(rec.examinee_id);
    if (per_item.try_emplace(rec.item_id, 0).second) item_order.push_back(rec.item_id);
    ++per_item[rec.item_id];
  }
  const auto total = static_cast<std::int64_t>(examinees.size());
  std::vector<std::string> warnings;
  for (const auto& item_id : item_order) {
    const std::int64_t have = per_item[item_id];
    if (have < total) {
      warnings.push_back("item " + item_id + ": " + std::to_string(have) +
                         " responses from " + std::to_string(total) +
                         " distinct examinees (" + std::to_string(total - have) +
                         " missing)");
    }
  }
  return warnings;
}

std::vector<KeyEntry> parse_keys(std::istream& in) {
  std::string line;
  if (!next_line(in, line)) throw ParseError("empty keys file", 1);
  auto header = split(line, ',');
  for (auto& h : header) h = trim(h);
  const bool has_labels = header.size() == 4 && header[3] == "labels";
  if (!(header.size() == 3 || has_labels) || header[0] != "item_id" ||
      header[1] != "key" || header[2] != "k") {
    throw ParseError("keys header must be 'item_id,key,k' (optionally ',labels')", 1);
  }

  std::vector<KeyEntry> keys;
  std::unordered_set<std::string> seen;
  std::int64_t line_no = 1;
  while (next_line(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split(line, ',');
    if (fields.size() != header.size()) {
      throw ParseError("wrong field count in keys row", line_no);
    }
    const std::string item_id = trim(fields[0]);
    const std::string key = trim(fields[1]);
    const std::int64_t k = parse_count(fields[2], line_no);
    if (item_id.empty()) throw ParseError("blank item_id", line_no);
    if (!seen.insert(item_id).second) {
      throw ParseError("duplicate item_id: " + item_id, line_no);
    }
    if (k < 2) throw ParseError("k must be at least 2", line_no);

    std::string label_spec = has_labels ? trim(fields[3]) : std::string{};
    try {
      model::AlternativeSet alts = [&] {
        if (!label_spec.empty()) {
          auto labels = split(label_spec, '|');
          for (auto& l : labels) l = trim(l);
          if (static_cast<std::int64_t>(labels.size()) != k) {
            throw std::invalid_argument("label list length does not match k");
          }
          return model::AlternativeSet::with_labels(std::move(labels));
        }
        return model::AlternativeSet::canonical(static_cast<int>(k));
      }();
      if (!alts.contains(key)) {
        throw std::invalid_argument("key '" + key + "' not in alternative set");
      }
      keys.push_back({item_id, key, std::move(alts)});
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return keys;
}

ItemMatrix parse_item_matrix(std::istream& in) {
  std::string line;
  if (!next_line(in, line)) throw ParseError("empty matrix file", 1);
  auto header = split(line, ',');
  if (header.size() < 3 || trim(header[0]) != "initial\\final") {
    throw ParseError("matrix header must start with 'initial\\final'", 1);
  }

  ItemMatrix matrix;
  for (std::size_t i = 1; i < header.size(); ++i) {
    std::string label = trim(header[i]);
    if (!label.empty() && label.back() == '*') {
      if (matrix.key_index >= 0) throw ParseError("multiple key annotations", 1);
      matrix.key_index = static_cast<int>(i - 1);
      label = trim(label.substr(0, label.size() - 1));
    }
    if (label.empty()) throw ParseError("blank column label", 1);
    matrix.labels.push_back(std::move(label));
  }
  if (matrix.key_index < 0) throw ParseError("no key annotation ('*') in matrix header", 1);
  const int k = matrix.k();
  if (k < 2) throw ParseError("matrix needs at least 2 alternatives", 1);

  std::int64_t line_no = 1;
  while (next_line(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split(line, ',');
    if (static_cast<int>(fields.size()) != k + 1) {
      throw ParseError("matrix row must have a label and " + std::to_string(k) + " counts",
                       line_no);
    }
    const int r = static_cast<int>(matrix.counts.size());
    if (r >= k) throw ParseError("matrix has more rows than columns", line_no);
    std::string row_label = trim(fields[0]);
    if (!row_label.empty() && row_label.back() == '*') {
      row_label = trim(row_label.substr(0, row_label.size() - 1));
    }
    if (row_label != matrix.labels[r]) {
      throw ParseError("row label '" + row_label + "' does not match column order", line_no);
    }
    std::vector<std::int64_t> row;
    row.reserve(k);
    for (int c = 0; c < k; ++c) {
      const std::int64_t value = parse_count(fields[c + 1], line_no);
      if (value < 0) throw ParseError("negative count", line_no);
      row.push_back(value);
    }
    matrix.counts.push_back(std::move(row));
  }
  if (static_cast<int>(matrix.counts.size()) != k) {
    throw ParseError("matrix has fewer rows than columns", line_no);
  }
  return matrix;
}

CollapsedResult parse_collapsed(std::istream& in) {
  std::unordered_map<std::string, std::int64_t> values;
  const std::unordered_set<std::string> known = {"ww", "wr", "rw",
                                                 "rr", "n_examinees", "n_items",
                                                 "ww_changed"};
  std::string line;
  std::int64_t line_no = 0;
  while (next_line(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'name = value'", line_no);
    const std::string name = trim(text.substr(0, eq));
    if (!known.count(name)) throw ParseError("unknown field: " + name, line_no);
    if (values.count(name)) throw ParseError("duplicate field: " + name, line_no);
    values[name] = parse_count(text.substr(eq + 1), line_no);
  }
  for (const char* required : {"ww", "wr", "rw", "rr", "n_examinees", "n_items"}) {
    if (!values.count(required)) {
      throw ParseError(std::string("missing field: ") + required);
    }
  }

  CollapsedResult result;
  result.tally.n_ww = values["ww"];
  result.tally.n_wr = values["wr"];
  result.tally.n_rw = values["rw"];
  result.tally.n_rr = values["rr"];
  result.tally.n_examinees = values["n_examinees"];
  result.tally.n_items = values["n_items"];
  if (values.count("ww_changed")) result.tally.n_ww_changed = values["ww_changed"];
  try {
    validate(result.tally);
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }

  const std::int64_t expected = result.tally.n_examinees * result.tally.n_items;
  const std::int64_t shortfall = expected - result.tally.observed_total();
  if (shortfall > 0) {
    result.warnings.push_back(std::to_string(shortfall) +
                              " responses short of n_examinees * n_items = " +
                              std::to_string(expected));
  }
  return result;
}

std::string write_responses(const std::vector<model::ResponseRecord>& records) {
  std::ostringstream out;
  out << "examinee_id,item_id,initial,final\n";
  for (const auto& rec : records) {
    check_field(rec.examinee_id, "examinee_id");
    check_field(rec.item_id, "item_id");
    check_field(rec.initial, "initial");
    check_field(rec.final, "final");
    out << rec.examinee_id << ',' << rec.item_id << ',' << rec.initial << ','
        << rec.final << '\n';
  }
  return out.str();
}

std::string write_keys(const std::vector<KeyEntry>& keys) {
  std::ostringstream out;
  out << "item_id,key,k,labels\n";
  for (const auto& entry : keys) {
    check_field(entry.item_id, "item_id");
    out << entry.item_id << ',' << entry.key << ',' << entry.k() << ',';
    const auto& labels = entry.alternatives.labels();
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (i > 0) out << '|';
      out << labels[i];
    }
    out << '\n';
  }
  return out.str();
}

std::string write_item_matrix(const ItemMatrix& matrix) {
  const int k = matrix.k();
  if (matrix.key_index < 0 || matrix.key_index >= k) {
    throw std::invalid_argument("matrix key index out of range");
  }
  if (static_cast<int>(matrix.counts.size()) != k) {
    throw std::invalid_argument("matrix is not square");
  }
  std::ostringstream out;
  out << "initial\\final";
  for (int c = 0; c < k; ++c) {
    out << ',' << matrix.labels[c];
    if (c == matrix.key_index) out << '*';
  }
  out << '\n';
  for (int r = 0; r < k; ++r) {
    if (static_cast<int>(matrix.counts[r].size()) != k) {
      throw std::invalid_argument("matrix is not square");
    }
    out << matrix.labels[r];
    for (int c = 0; c < k; ++c) out << ',' << matrix.counts[r][c];
    out << '\n';
  }
  return out.str();
}

std::string write_collapsed(const CollapsedTally& tally) {
  std::ostringstream out;
  out << "ww = " << tally.n_ww << '\n';
  out << "wr = " << tally.n_wr << '\n';
  out << "rw = " << tally.n_rw << '\n';
  out << "rr = " << tally.n_rr << '\n';
  out << "n_examinees = " << tally.n_examinees << '\n';
  out << "n_items = " << tally.n_items << '\n';
  if (tally.n_ww_changed) out << "ww_changed = " << *tally.n_ww_changed << '\n';
  return out.str();
}

}  // namespace ace::ingest
