#include "ace/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ace::report {

namespace fs = std::filesystem;

std::string render_plain(const Rational& value, int places) {
  return value.decimal(places, /*leading_zero=*/true);
}

std::string render_bare(const Rational& value, int places) {
  return value.decimal(places, /*leading_zero=*/false);
}

std::string render_bare(double value, int places) {
  if (!std::isfinite(value)) throw std::invalid_argument("non-finite value");
  // Exact decimal rendering of the rounded value, reusing the rational path.
  double scale = 1.0;
  for (int i = 0; i < places; ++i) scale *= 10.0;
  const double scaled = value * scale;
  if (std::fabs(scaled) > 1e15) throw std::invalid_argument("value too large to render");
  auto rounded = static_cast<std::int64_t>(scaled >= 0 ? std::floor(scaled + 0.5)
                                                       : std::ceil(scaled - 0.5));
  return Rational(rounded, static_cast<std::int64_t>(scale)).decimal(places, false);
}

std::string render_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

namespace {

std::string effect_cell(const estimators::EffectResult& effect, bool upper) {
  if (!effect.defined) return "";
  const Rational value = upper ? effect.upper() : effect.lower();
  return render_double(value.to_double());
}

std::string identified_flags(const estimators::ItemEffects& effects) {
  auto tag = [](const estimators::EffectResult& e) {
    if (!e.defined) return "undefined";
    return e.identified ? "point" : "bound";
  };
  std::string out = "att:";
  out += tag(effects.att);
  out += ";ate:";
  out += tag(effects.ate);
  out += ";atu:";
  out += tag(effects.atu);
  return out;
}

void append_effect_lines(std::ostringstream& out, const std::string& prefix,
                         const estimators::EffectResult& effect, int places,
                         bool bare_style) {
  if (!effect.defined) {
    out << prefix << "_defined = false\n";
    out << prefix << "_reason = " << effect.reason << '\n';
    return;
  }
  out << prefix << "_defined = true\n";
  out << prefix << "_basis = " << effect.basis << '\n';
  const std::string name = to_string(effect.estimand);
  auto render = [&](const Rational& v) {
    return bare_style ? render_bare(v, places) : render_plain(v, places);
  };
  if (effect.identified) {
    const Rational v = *effect.point;
    out << prefix << " = " << v.fraction() << '\n';
    out << prefix << "_decimal = " << render_double(v.to_double()) << '\n';
    out << prefix << "_rendered = " << name << " = " << render(v) << '\n';
  } else {
    const Rational lo = effect.bound->lower;
    const Rational hi = effect.bound->upper;
    out << prefix << "_lower = " << lo.fraction() << '\n';
    out << prefix << "_lower_decimal = " << render_double(lo.to_double()) << '\n';
    out << prefix << "_upper = " << hi.fraction() << '\n';
    out << prefix << "_upper_decimal = " << render_double(hi.to_double()) << '\n';
    out << prefix << "_rendered = " << render(lo) << " <= " << name
        << " <= " << render(hi) << '\n';
  }
}

}  // namespace

std::string items_csv(const std::vector<model::ItemTally>& tallies,
                      const std::vector<estimators::ItemEffects>& effects) {
  if (tallies.size() != effects.size()) {
    throw std::invalid_argument("tally/effect row mismatch");
  }
  std::ostringstream out;
  out << "item_id,k,n_total,n_ww_retained,n_ww_changed,n_wr,n_rw,n_rr,"
         "treated_share,att,att_defined,ate_lo,ate_hi,atu_lo,atu_hi,identified_flags\n";
  for (std::size_t i = 0; i < tallies.size(); ++i) {
    const auto& tally = tallies[i];
    const auto& effect = effects[i];
    out << tally.item_id << ',' << tally.k << ',' << tally.n_total << ','
        << tally.n_ww_retained << ',' << tally.n_ww_changed << ',' << tally.n_wr << ','
        << tally.n_rw << ',' << tally.n_rr << ','
        << render_double(effect.treated_share.to_double()) << ','
        << (effect.att.defined ? render_double(effect.att.point->to_double()) : "") << ','
        << (effect.att.defined ? "true" : "false") << ','
        << effect_cell(effect.ate, false) << ',' << effect_cell(effect.ate, true) << ','
        << effect_cell(effect.atu, false) << ',' << effect_cell(effect.atu, true) << ','
        << identified_flags(effect) << '\n';
  }
  return out.str();
}

std::string analyze_summary(const AnalyzeSummaryInput& input) {
  std::ostringstream out;
  out << "tool = ace " << kToolVersion << '\n';
  out << "command = analyze\n";
  for (const auto& name : input.input_names) out << "input = " << name << '\n';
  if (input.validation) {
    out << "rows_read = " << input.validation->rows_read << '\n';
    out << "rows_kept = " << input.validation->rows_kept << '\n';
    out << "rows_dropped = " << input.validation->rows_dropped << '\n';
  }
  out << "items = " << input.items << '\n';
  if (input.level) {
    append_effect_lines(out, "test_att", input.level->att, 2, false);
    out << "test_att_items_excluded = " << input.level->att_excluded << '\n';
    append_effect_lines(out, "test_ate", input.level->ate, 2, false);
    out << "test_ate_items_excluded = " << input.level->ate_excluded << '\n';
    append_effect_lines(out, "test_atu", input.level->atu, 2, false);
    out << "test_atu_items_excluded = " << input.level->atu_excluded << '\n';
  }
  return out.str();
}

std::string collapsed_summary(const CollapsedSummaryInput& input) {
  std::ostringstream out;
  out << "tool = ace " << kToolVersion << '\n';
  out << "command = collapsed\n";
  out << "input = " << input.input_name << '\n';
  out << "ww = " << input.tally.n_ww << '\n';
  out << "wr = " << input.tally.n_wr << '\n';
  out << "rw = " << input.tally.n_rw << '\n';
  out << "rr = " << input.tally.n_rr << '\n';
  out << "n_examinees = " << input.tally.n_examinees << '\n';
  out << "n_items = " << input.tally.n_items << '\n';
  if (input.tally.n_ww_changed) out << "ww_changed = " << *input.tally.n_ww_changed << '\n';
  for (const auto& warning : input.warnings) out << "warning = " << warning << '\n';

  append_effect_lines(out, "ate", input.ate, 2, true);
  out << "changer_share = " << input.changer_share.fraction() << '\n';
  out << "changer_share_rendered = " << input.changer_share.percent(2) << '\n';

  if (input.envelope.att) {
    out << "att_envelope_lower = " << input.envelope.att->lower.fraction() << '\n';
    out << "att_envelope_lower_decimal = "
        << render_double(input.envelope.att->lower.to_double()) << '\n';
    out << "att_envelope_upper = " << input.envelope.att->upper.fraction() << '\n';
    out << "att_envelope_upper_decimal = "
        << render_double(input.envelope.att->upper.to_double()) << '\n';
  } else {
    out << "att_envelope = undefined (" << input.envelope.att_reason << ")\n";
  }
  if (input.envelope.atu) {
    out << "atu_envelope_lower = " << input.envelope.atu->lower.fraction() << '\n';
    out << "atu_envelope_lower_decimal = "
        << render_double(input.envelope.atu->lower.to_double()) << '\n';
    out << "atu_envelope_upper = " << input.envelope.atu->upper.fraction() << '\n';
    out << "atu_envelope_upper_decimal = "
        << render_double(input.envelope.atu->upper.to_double()) << '\n';
  } else {
    out << "atu_envelope = undefined (" << input.envelope.atu_reason << ")\n";
  }

  if (input.sim) {
    const mc::SimResult& sim = *input.sim;
    out << "sim_iterations = " << sim.iterations_run << '\n';
    out << "sim_seed = " << sim.seed << '\n';
    out << "sim_atu_mode = " << to_string(sim.atu_mode) << '\n';
    if (sim.att_interval) {
      out << "sim_att_min = " << render_double(sim.att_interval->min) << '\n';
      out << "sim_att_max = " << render_double(sim.att_interval->max) << '\n';
      out << "sim_att_rendered = " << render_bare(sim.att_interval->min, 2)
          << " <= ATT <= " << render_bare(sim.att_interval->max, 2) << '\n';
    } else {
      out << "sim_att = undefined (no iteration had an item with changers)\n";
    }
    if (sim.atu_interval) {
      out << "sim_atu_min = " << render_double(sim.atu_interval->min) << '\n';
      out << "sim_atu_max = " << render_double(sim.atu_interval->max) << '\n';
      out << "sim_atu_rendered = " << render_bare(sim.atu_interval->min, 2)
          << " <= ATU <= " << render_bare(sim.atu_interval->max, 2) << '\n';
    } else {
      out << "sim_atu = undefined (no iteration had an item with control units)\n";
    }
    out << "sim_ate_min = " << render_double(sim.ate_interval.min) << '\n';
    out << "sim_ate_max = " << render_double(sim.ate_interval.max) << '\n';
    out << "sim_items_skipped = " << sim.items_skipped_total << '\n';
    out << "sim_atu_items_skipped = " << sim.atu_items_skipped_total << '\n';
  }
  return out.str();
}

std::string validation_text(const ingest::ValidationReport& report) {
  std::ostringstream out;
  out << "rows_read = " << report.rows_read << '\n';
  out << "rows_kept = " << report.rows_kept << '\n';
  out << "rows_dropped = " << report.rows_dropped << '\n';
  for (const auto& drop : report.drops) {
    out << "dropped line " << drop.line << ": " << drop.reason << '\n';
  }
  for (const auto& warning : report.warnings) out << "warning = " << warning << '\n';
  return out.str();
}

std::string chart_svg(const std::vector<estimators::ItemEffects>& effects) {
  const int n = static_cast<int>(effects.size());
  const int margin_left = 64, margin_right = 24, margin_top = 32, margin_bottom = 56;
  const int plot_height = 360;
  const int step = n <= 40 ? 24 : 12;
  const int plot_width = std::max(240, step * n);
  const int width = margin_left + plot_width + margin_right;
  const int height = margin_top + plot_height + margin_bottom;

  auto y_of = [&](double value) {
    // value in [-1, +1]; +1 at the top.
    return margin_top + (1.0 - value) * plot_height / 2.0;
  };
  auto x_of = [&](int index) {
    return margin_left + step / 2.0 + static_cast<double>(index) * step;
  };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return std::string(buf);
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height
      << "\">\n";
  out << "<style>text{font-family:sans-serif;font-size:11px;fill:#333}"
         ".ate-bound{stroke:#355e8d;stroke-width:2}"
         ".att-point{fill:#1a1a1a}"
         ".grid{stroke:#ddd;stroke-width:1}"
         ".zero{stroke:#999;stroke-width:1}</style>\n";
  out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"#fff\"/>\n";

  for (double tick = -1.0; tick <= 1.0001; tick += 0.5) {
    const double y = y_of(tick);
    out << "<line class=\"" << (tick == 0.0 ? "zero" : "grid") << "\" x1=\"" << margin_left
        << "\" y1=\"" << num(y) << "\" x2=\"" << (margin_left + plot_width) << "\" y2=\""
        << num(y) << "\"/>\n";
    out << "<text x=\"" << (margin_left - 8) << "\" y=\"" << num(y + 4)
        << "\" text-anchor=\"end\">" << (tick == 0.0 ? "0" : num(tick)) << "</text>\n";
  }

  const int label_every = n <= 30 ? 1 : (n + 29) / 30;
  for (int i = 0; i < n; ++i) {
    const auto& item = effects[i];
    const double x = x_of(i);
    if (item.ate.defined) {
      out << "<line class=\"ate-bound\" x1=\"" << num(x) << "\" y1=\""
          << num(y_of(item.ate.lower().to_double())) << "\" x2=\"" << num(x) << "\" y2=\""
          << num(y_of(item.ate.upper().to_double())) << "\"/>\n";
    }
    if (item.att.defined) {
      const double y = y_of(item.att.point->to_double());
      out << "<rect class=\"att-point\" x=\"" << num(x - 3.5) << "\" y=\"" << num(y - 3.5)
          << "\" width=\"7\" height=\"7\"/>\n";
    }
    if (i % label_every == 0) {
      out << "<text x=\"" << num(x) << "\" y=\"" << (margin_top + plot_height + 16)
          << "\" text-anchor=\"middle\">" << item.item_id << "</text>\n";
    }
  }
  out << "<text x=\"" << (margin_left + plot_width / 2) << "\" y=\"" << (height - 12)
      << "\" text-anchor=\"middle\">items: ATE bound (line), ATT (square)</text>\n";
  out << "</svg>\n";
  return out.str();
}

OutputStager::OutputStager(fs::path out_dir) : out_dir_(std::move(out_dir)) {
  fs::create_directories(out_dir_);
  stage_dir_ = out_dir_ / ".stage";
  fs::remove_all(stage_dir_);
  fs::create_directories(stage_dir_);
}

OutputStager::~OutputStager() {
  if (!committed_) {
    std::error_code ec;
    fs::remove_all(stage_dir_, ec);
  }
}

void OutputStager::add(const std::string& name, const std::string& content) {
  std::ofstream out(stage_dir_ / name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write staged file: " + name);
  out << content;
  out.close();
  if (!out) throw std::runtime_error("cannot write staged file: " + name);
  names_.push_back(name);
}

void OutputStager::commit() {
  for (const auto& name : names_) {
    fs::rename(stage_dir_ / name, out_dir_ / name);
  }
  std::error_code ec;
  fs::remove_all(stage_dir_, ec);
  committed_ = true;
}

}  // namespace ace::report
