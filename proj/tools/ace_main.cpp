#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "ace/estimators.hpp"
#include "ace/ingest.hpp"
#include "ace/mc_bounds.hpp"
#include "ace/model.hpp"
#include "ace/report.hpp"
#include "ace/synthlab.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitVerifyFailed = 4;

struct FormatFlags {
  bool csv = true;
  bool report = true;
  bool svg = true;
};

std::optional<FormatFlags> parse_format(const std::string& text) {
  FormatFlags flags{false, false, false};
  if (text == "all") return FormatFlags{true, true, true};
  if (text == "csv") {
    flags.csv = true;
    return flags;
  }
  if (text == "report") {
    flags.report = true;
    return flags;
  }
  if (text == "svg") {
    flags.svg = true;
    return flags;
  }
  return std::nullopt;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ace::ingest::ParseError("cannot open file: " + path);
  return in;
}

int run_analyze(const std::string& responses_path, const std::string& keys_path,
                const std::vector<std::string>& matrix_paths, const std::string& out_dir,
                const FormatFlags& format) {
  using ace::estimators::ItemEffects;
  using ace::model::ItemTally;

  std::vector<std::string> input_names;
  ace::ingest::ValidationReport validation;
  bool have_validation = false;

  std::vector<ItemTally> tallies;
  if (!responses_path.empty()) {
    auto keys_in = open_input(keys_path);
    const auto keys = ace::ingest::parse_keys(keys_in);
    std::map<std::string, const ace::ingest::KeyEntry*> key_by_item;
    for (const auto& entry : keys) key_by_item[entry.item_id] = &entry;

    auto responses_in = open_input(responses_path);
    auto parsed = ace::ingest::parse_responses(responses_in);
    validation = std::move(parsed.report);
    have_validation = true;
    input_names.push_back(fs::path(responses_path).filename().string());
    input_names.push_back(fs::path(keys_path).filename().string());

    for (auto& warning : ace::ingest::examinee_coverage_warnings(parsed.records)) {
      validation.warnings.push_back(std::move(warning));
    }
    std::map<std::string, std::vector<ace::model::ResponseRecord>> by_item;
    std::int64_t unknown_items = 0;
    for (auto& rec : parsed.records) {
      if (!key_by_item.count(rec.item_id)) {
        ++unknown_items;
        continue;
      }
      by_item[rec.item_id].push_back(std::move(rec));
    }
    if (unknown_items > 0) {
      validation.warnings.push_back(std::to_string(unknown_items) +
                                    " records dropped: item_id not in keys file");
    }
    // Item order follows the keys file; items without records still get a row.
    for (const auto& entry : keys) {
      auto it = by_item.find(entry.item_id);
      if (it == by_item.end()) {
        ItemTally empty;
        empty.item_id = entry.item_id;
        empty.k = entry.k();
        tallies.push_back(empty);
        continue;
      }
      tallies.push_back(ace::model::tally_item(it->second, entry.key, entry.alternatives,
                                               entry.item_id));
    }
  }

  for (const auto& path : matrix_paths) {
    auto in = open_input(path);
    const auto matrix = ace::ingest::parse_item_matrix(in);
    input_names.push_back(fs::path(path).filename().string());
    tallies.push_back(ace::model::tally_from_matrix(matrix.counts, matrix.key_index,
                                                    matrix.k(),
                                                    fs::path(path).stem().string()));
  }

  std::int64_t responses_total = 0;
  for (const auto& tally : tallies) responses_total += tally.n_total;
  if (tallies.empty() || responses_total == 0) {
    std::cerr << "error: no usable responses\n";
    if (have_validation) std::cerr << ace::report::validation_text(validation);
    return kExitValidation;
  }

  std::vector<ItemEffects> effects;
  effects.reserve(tallies.size());
  for (const auto& tally : tallies) effects.push_back(ace::estimators::analyze_item(tally));
  const auto level = ace::estimators::test_level(effects);

  ace::report::AnalyzeSummaryInput summary;
  summary.input_names = input_names;
  summary.validation = have_validation ? &validation : nullptr;
  summary.items = static_cast<int>(tallies.size());
  summary.level = &level;

  ace::report::OutputStager stager(out_dir);
  if (format.csv) stager.add("items.csv", ace::report::items_csv(tallies, effects));
  if (format.report) {
    stager.add("summary.txt", ace::report::analyze_summary(summary));
    if (have_validation) {
      stager.add("validation.txt", ace::report::validation_text(validation));
    }
  }
  if (format.svg) stager.add("chart.svg", ace::report::chart_svg(effects));
  stager.commit();
  return kExitOk;
}

int run_collapsed(const std::string& input_path, const std::string& out_dir, bool simulate,
                  std::uint64_t iterations, std::uint64_t seed, const std::string& atu_mode,
                  int parallel) {
  const auto mode = ace::mc::atu_mode_from_string(atu_mode);
  if (simulate && !mode) {
    std::cerr << "error: --atu-mode must be 'interval' or 'point'\n";
    return kExitUsage;
  }

  auto in = open_input(input_path);
  const auto parsed = ace::ingest::parse_collapsed(in);

  ace::report::CollapsedSummaryInput summary;
  summary.input_name = fs::path(input_path).filename().string();
  summary.tally = parsed.tally;
  summary.warnings = parsed.warnings;
  summary.ate = ace::estimators::collapsed_ate_bound(parsed.tally);
  summary.changer_share = ace::estimators::changer_share(parsed.tally);
  summary.envelope = ace::estimators::collapsed_envelope(parsed.tally);

  ace::mc::SimResult sim;
  if (simulate) {
    ace::mc::SimConfig config;
    config.iterations = iterations;
    config.seed = seed;
    config.atu_mode = *mode;
    config.parallel_width =
        parallel > 0 ? parallel
                     : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    sim = ace::mc::simulate(parsed.tally, config);
    summary.sim = &sim;
  }

  ace::report::OutputStager stager(out_dir);
  stager.add("summary.txt", ace::report::collapsed_summary(summary));
  stager.commit();
  return kExitOk;
}

int run_synth(const ace::synth::GenConfig& config, const std::string& out_dir) {
  const auto population = ace::synth::generate(config);
  const auto rows = ace::synth::to_rows(population.units);
  const auto truth = ace::synth::true_effects(rows);

  std::ostringstream summary;
  summary << "tool = ace " << ace::report::kToolVersion << '\n';
  summary << "command = synth\n";
  summary << "seed = " << config.seed << '\n';
  summary << "n_examinees = " << config.n_examinees << '\n';
  summary << "n_items = " << config.n_items << '\n';
  summary << "k = " << config.k << '\n';
  summary << "units = " << rows.size() << '\n';
  summary << "true_ate = " << truth.ate.fraction() << '\n';
  summary << "true_att = " << (truth.att ? truth.att->fraction() : "undefined") << '\n';
  summary << "true_atu = " << (truth.atu ? truth.atu->fraction() : "undefined") << '\n';
  summary << "treated_share = " << truth.treated_share.fraction() << '\n';

  ace::report::OutputStager stager(out_dir);
  stager.add("responses.csv", ace::ingest::write_responses(population.records));
  stager.add("keys.csv", ace::ingest::write_keys(population.keys));
  stager.add("truth.csv", ace::synth::write_truth(rows));
  stager.add("summary.txt", summary.str());
  stager.commit();
  return kExitOk;
}

int run_verify(const std::string& dir) {
  auto responses_in = open_input((fs::path(dir) / "responses.csv").string());
  auto parsed = ace::ingest::parse_responses(responses_in);
  auto keys_in = open_input((fs::path(dir) / "keys.csv").string());
  const auto keys = ace::ingest::parse_keys(keys_in);
  auto truth_in = open_input((fs::path(dir) / "truth.csv").string());
  const auto rows = ace::synth::parse_truth(truth_in);

  const auto report = ace::synth::verify(parsed.records, keys, rows);
  std::cout << "units_checked = " << report.units_checked << '\n';
  std::cout << "unit_failures = " << report.unit_failures << '\n';
  std::cout << "items_checked = " << report.items_checked << '\n';
  std::cout << "att_mismatches = " << report.att_mismatches << '\n';
  std::cout << "ate_violations = " << report.ate_violations << '\n';
  std::cout << "atu_violations = " << report.atu_violations << '\n';
  for (const auto& failure : report.failures) std::cout << "failure: " << failure << '\n';
  std::cout << (report.passed ? "verified = true" : "verified = false") << '\n';
  return report.passed ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ace: causal effects of answer changing in multiple-choice exams"};
  app.require_subcommand(1);

  // analyze
  auto* analyze = app.add_subcommand(
      "analyze", "Per-item and test-level effects from responses or item matrices");
  std::string responses_path, keys_path, out_dir = "ace-out", format_text = "all";
  std::vector<std::string> matrix_paths;
  analyze->add_option("--responses", responses_path, "long-format responses CSV");
  analyze->add_option("--keys", keys_path, "keys CSV");
  analyze->add_option("--matrix", matrix_paths, "per-item choice matrix file (repeatable)");
  analyze->add_option("--out", out_dir, "output directory");
  analyze->add_option("--format", format_text, "csv|report|svg|all");

  // collapsed
  auto* collapsed = app.add_subcommand(
      "collapsed", "Test-level bounds from a pooled wrong/right table");
  std::string collapsed_path, collapsed_out = "ace-out", atu_mode = "interval";
  bool simulate = false;
  std::uint64_t iterations = 1'000'000, seed = 1;
  int parallel = 0;
  collapsed->add_option("--input", collapsed_path, "collapsed table file")->required();
  collapsed->add_option("--out", collapsed_out, "output directory");
  collapsed->add_flag("--simulate", simulate, "run the latent-split simulation");
  collapsed->add_option("--iters", iterations, "simulation iterations");
  collapsed->add_option("--seed", seed, "simulation seed");
  collapsed->add_option("--atu-mode", atu_mode, "interval|point");
  collapsed->add_option("--parallel", parallel, "worker threads (0 = hardware)");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic population with ground truth");
  ace::synth::GenConfig gen;
  std::string synth_out = "ace-out";
  synth->add_option("--examinees", gen.n_examinees, "number of examinees");
  synth->add_option("--items", gen.n_items, "number of items");
  synth->add_option("--choices", gen.k, "alternatives per item");
  synth->add_option("--p-first-correct", gen.p_first_correct, "P(first answer correct)");
  synth->add_option("--p-change-wrong", gen.p_change_given_wrong,
                    "P(change | first answer wrong)");
  synth->add_option("--p-change-right", gen.p_change_given_right,
                    "P(change | first answer right)");
  synth->add_option("--p-switch", gen.p_switch_success,
                    "P(change lands on the key | first answer wrong)");
  synth->add_option("--seed", gen.seed, "generator seed");
  synth->add_option("--out", synth_out, "output directory");

  // verify
  auto* verify = app.add_subcommand("verify", "Re-check a generated population end to end");
  std::string verify_dir;
  verify->add_option("--dir", verify_dir, "directory with responses/keys/truth files")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (analyze->parsed()) {
      const auto format = parse_format(format_text);
      if (!format) {
        std::cerr << "error: --format must be csv, report, svg, or all\n";
        return kExitUsage;
      }
      if (responses_path.empty() && matrix_paths.empty()) {
        std::cerr << "error: provide --responses with --keys, or at least one --matrix\n";
        return kExitUsage;
      }
      if (!responses_path.empty() && keys_path.empty()) {
        std::cerr << "error: --responses requires --keys\n";
        return kExitUsage;
      }
      return run_analyze(responses_path, keys_path, matrix_paths, out_dir, *format);
    }
    if (collapsed->parsed()) {
      if (simulate && iterations < 1) {
        std::cerr << "error: --iters must be at least 1\n";
        return kExitUsage;
      }
      return run_collapsed(collapsed_path, collapsed_out, simulate, iterations, seed,
                           atu_mode, parallel);
    }
    if (synth->parsed()) return run_synth(gen, synth_out);
    if (verify->parsed()) return run_verify(verify_dir);
  } catch (const ace::ingest::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::overflow_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitUsage;
}
