#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ace/estimators.hpp"
#include "ace/ingest.hpp"
#include "ace/mc_bounds.hpp"
#include "ace/model.hpp"

namespace ace::report {

inline constexpr const char* kToolVersion = "0.1.0";

/// Decimal rendering of a rational: round half away from zero.
/// style "plain" keeps the integer-part zero ("-0.85"); style "bare"
/// drops it ("-.52").
std::string render_plain(const Rational& value, int places);
std::string render_bare(const Rational& value, int places);
std::string render_bare(double value, int places);

/// Fixed six-decimal rendering used for all floating-point report fields.
std::string render_double(double value);

/// The per-item effects table. Column set is fixed; effect cells are
/// decimals, empty when undefined, counts are exact.
std::string items_csv(const std::vector<model::ItemTally>& tallies,
                      const std::vector<estimators::ItemEffects>& effects);

struct AnalyzeSummaryInput {
  std::vector<std::string> input_names;
  const ingest::ValidationReport* validation = nullptr;  // optional
  int items = 0;
  const estimators::TestLevelEffects* level = nullptr;
};

std::string analyze_summary(const AnalyzeSummaryInput& input);

struct CollapsedSummaryInput {
  std::string input_name;
  ingest::CollapsedTally tally;
  std::vector<std::string> warnings;
  estimators::EffectResult ate;
  Rational changer_share;
  estimators::CollapsedEnvelope envelope;
  const mc::SimResult* sim = nullptr;  // present when --simulate ran
};

std::string collapsed_summary(const CollapsedSummaryInput& input);

std::string validation_text(const ingest::ValidationReport& report);

/// Figure-style chart: one vertical segment per item for the ATE bound
/// (class "ate-bound") and one filled square per defined ATT point
/// (class "att-point"). Y axis is fixed to [-1, +1]. Self-contained
/// SVG 1.1.
std::string chart_svg(const std::vector<estimators::ItemEffects>& effects);

/// Collects output files and moves them into place only when every file
/// has been written, so failed runs leave no partial outputs behind.
class OutputStager {
 public:
  explicit OutputStager(std::filesystem::path out_dir);
  ~OutputStager();
  OutputStager(const OutputStager&) = delete;
  OutputStager& operator=(const OutputStager&) = delete;

  void add(const std::string& name, const std::string& content);
  void commit();

 private:
  std::filesystem::path out_dir_;
  std::filesystem::path stage_dir_;
  std::vector<std::string> names_;
  bool committed_ = false;
};

}  // namespace ace::report
