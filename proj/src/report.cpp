#include "gamelab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "gamelab/csv.hpp"

namespace gamelab {
namespace {

struct Row {
  std::string label;
  std::vector<OptCell> cells;
};

struct GridTable {
  TableId id;
  std::string title;
  std::vector<std::string> columns;
  std::vector<Row> rows;
  std::vector<std::string> notes;
};

std::string opt_num(const std::optional<double>& v, int decimals = 6) { return v ? format_number(*v, decimals) : ""; }

std::string grid_csv(const GridTable& t) {
  std::string out = csv_row({"table", "row", "column", "estimate", "se", "n", "p_value", "stars"});
  for (const auto& r : t.rows) {
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      const auto& cell = r.cells[c];
      if (!cell) {
        out += csv_row({std::string(to_string(t.id)), r.label, t.columns[c], "", "", "0", "", ""});
        continue;
      }
      out += csv_row({std::string(to_string(t.id)), r.label, t.columns[c], format_number(cell->value), opt_num(cell->se),
                      std::to_string(cell->n), opt_num(cell->p_value), cell->stars()});
    }
  }
  return out;
}

std::string pad(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

std::string grid_text(const GridTable& t) {
  const std::size_t lw = 40, cw = 18;
  std::string out = std::string(to_string(t.id)) + ": " + t.title + "\n";
  std::string line = pad("", lw);
  for (const auto& c : t.columns) line += pad(c, cw);
  out += line + "\n";
  for (const auto& r : t.rows) {
    std::string est = pad(r.label, lw), se = pad("", lw);
    for (const auto& cell : r.cells) {
      if (!cell) {
        est += pad("--", cw);
        se += pad("", cw);
        continue;
      }
      est += pad(format_number(cell->value, 3) + cell->stars(), cw);
      se += pad(cell->se ? "(" + format_number(*cell->se, 3) + ")" : "(n=1)", cw);
    }
    out += est + "\n" + se + "\n";
  }
  for (const auto& n : t.notes) out += "  note: " + n + "\n";
  return out + "\n";
}

GridTable t1(const TranscriptSet& set, const AnalysisOptions& opt) {
  const auto d = offer_dynamics(set, opt);
  GridTable t{TableId::T1, "proposer behaviour by treatment", {}, {{"mean offer", {}}, {"change after acceptance", {}}, {"change after rejection", {}}}, {}};
  for (const auto& r : d.rows) {
    t.columns.push_back(r.treatment.label());
    t.rows[0].cells.push_back(r.mean_offer);
    t.rows[1].cells.push_back(r.change_after_accept);
    t.rows[2].cells.push_back(r.change_after_reject);
  }
  if (d.fair_vs_selfish) {
    const auto& c = *d.fair_vs_selfish;
    t.notes.push_back("fair vs selfish proposer offers, Wilcoxon " + std::string(to_string(c.test.mode)) +
                      (c.test.exact ? " (exact)" : " (normal approx.)") + ": W = " + format_number(c.test.statistic, 1) +
                      ", p = " + format_number(c.test.p_value, 4) + star_annotate(c.test.p_value) + ", n = " +
                      std::to_string(c.n_fair) + "/" + std::to_string(c.n_selfish));
  }
  return t;
}

GridTable t2(const TranscriptSet& set, const AnalysisOptions& opt) {
  const auto rows = rejection_table(set, opt);
  GridTable t{TableId::T2, "responder behaviour by treatment", {}, {{"overall rejection rate", {}}, {"rejection rate after offer increase", {}}, {"rejection rate after offer decrease", {}}}, {}};
  for (const auto& r : rows) {
    t.columns.push_back(r.treatment.label());
    t.rows[0].cells.push_back(r.overall);
    t.rows[1].cells.push_back(r.after_increase);
    t.rows[2].cells.push_back(r.after_decrease);
    t.notes.push_back(r.treatment.label() + ": " + std::to_string(r.n_increase) + " increases, " +
                      std::to_string(r.n_decrease) + " decreases, " + std::to_string(r.n_unchanged) +
                      " unchanged offers (in neither bucket)");
  }
  return t;
}

GridTable t4(const TranscriptSet& set, const AnalysisOptions& opt) {
  const auto rows = pd_outcome_rates(set, opt);
  GridTable t{TableId::T4, "prisoner's dilemma outcomes by treatment", {}, {{"rate of choosing C", {}}, {"rate of CC", {}}, {"rate of CD and DC", {}}, {"rate of DD", {}}}, {}};
  for (const auto& r : rows) {
    t.columns.push_back(r.treatment.label());
    t.rows[0].cells.push_back(r.rate_c);
    t.rows[1].cells.push_back(r.rate_cc);
    t.rows[2].cells.push_back(r.rate_cd_or_dc);
    t.rows[3].cells.push_back(r.rate_dd);
  }
  return t;
}

GridTable t5(const TranscriptSet& set, const AnalysisOptions& opt) {
  const auto cc = conditional_coop(set, opt);
  GridTable t{TableId::T5, "cooperation given the previous round, by the deciding player's trait", {}, {}, {}};
  for (const auto& r : cc.rows) t.columns.push_back(std::string(to_string(r.trait)));
  for (std::size_t c = 0; c < kOutcomes.size(); ++c) {
    Row row{"cooperation rate given " + std::string(to_string(kOutcomes[c])), {}};
    for (const auto& r : cc.rows) row.cells.push_back(r.given[c]);
    t.rows.push_back(row);
    std::string note = std::string(to_string(kOutcomes[c])) + ": n = ";
    note += std::to_string(cc.rows[0].counts[c]) + "/" + std::to_string(cc.rows[1].counts[c]);
    if (const auto& z = cc.trait_difference[c]) {
      note += ", fair vs selfish two-proportion z = " + format_number(z->z, 3) + ", p = " + format_number(z->p_value, 4) +
              star_annotate(z->p_value);
    }
    t.notes.push_back(note);
  }
  return t;
}

std::string regression_csv(const UltimatumRegressions& reg) {
  std::string out = csv_row({"table", "regressor", "model", "coefficient", "se", "p_value", "stars", "n_obs", "converged",
                             "iterations", "se_kind"});
  auto emit = [&](const std::optional<RegressionResult>& r, const std::string& model) {
    if (!r) return;
    for (std::size_t j = 0; j < r->names.size(); ++j) {
      out += csv_row({"t3", r->names[j], model, format_number(r->coefficients[j]), format_number(r->standard_errors[j]),
                      format_number(r->p_values[j]), star_annotate(r->p_values[j]), std::to_string(r->n_obs),
                      r->converged ? "true" : "false", std::to_string(r->iterations),
                      r->se_kind == SEKind::Clustered ? "clustered" : "classical"});
    }
  };
  emit(reg.offer, "offered_amount_ols");
  emit(reg.rejection, "rejection_logit");
  return out;
}

std::string regression_text(const UltimatumRegressions& reg) {
  const std::size_t lw = 28, cw = 20;
  std::string out = "t3: pooled regressions (OLS offered amount, logit rejection)\n";
  out += pad("", lw) + pad("offered amount", cw) + pad("rejection", cw) + "\n";
  for (const auto& name : kRejectionRegressors) {
    std::string est = pad(name, lw), se = pad("", lw);
    for (const auto* r : {&reg.offer, &reg.rejection}) {
      const auto it = *r ? std::find((*r)->names.begin(), (*r)->names.end(), name) : std::vector<std::string>::const_iterator{};
      if (!*r || it == (*r)->names.end()) {
        est += pad("", cw);
        se += pad("", cw);
        continue;
      }
      const auto j = static_cast<std::size_t>(it - (*r)->names.begin());
      est += pad(format_number((*r)->coefficients[j], 3) + star_annotate((*r)->p_values[j]), cw);
      se += pad("(" + format_number((*r)->standard_errors[j], 3) + ")", cw);
    }
    out += est + "\n" + se + "\n";
  }
  for (const auto* r : {&reg.offer, &reg.rejection}) {
    if (!*r) continue;
    out += "  note: " + (*r)->method + " n = " + std::to_string((*r)->n_obs) +
           ((*r)->method == "ols" ? ", R^2 = " + format_number((*r)->r_squared, 4)
                                  : ", log-likelihood = " + format_number((*r)->log_likelihood, 4) + ", iterations = " +
                                        std::to_string((*r)->iterations) + ((*r)->converged ? ", converged" : ", not converged")) +
           "\n";
    for (const auto& w : (*r)->warnings) out += "  warning: " + (*r)->method + ": " + w + "\n";
  }
  for (const auto& n : reg.notes) out += "  note: " + n + "\n";
  return out + "\n";
}

std::string series_csv(const std::vector<SeriesPoint>& pts, std::string_view figure) {
  std::string out = csv_row({"figure", "group", "measure", "round", "estimate", "se", "n"});
  for (const auto& p : pts) {
    if (p.figure != figure) continue;
    out += csv_row({p.figure, p.group, p.measure, std::to_string(p.round), p.cell ? format_number(p.cell->value) : "",
                    p.cell ? opt_num(p.cell->se) : "", p.cell ? std::to_string(p.cell->n) : "0"});
  }
  return out;
}

std::string series_text(const std::vector<SeriesPoint>& pts, std::string_view figure) {
  std::string out = std::string(figure) + ": per-round series\n";
  std::string key;
  for (const auto& p : pts) {
    if (p.figure != figure) continue;
    const std::string k = p.group + " / " + p.measure;
    if (k != key) {
      if (!key.empty()) out += "\n";
      out += pad("  " + k, 44);
      key = k;
    }
    out += pad(p.cell ? format_number(p.cell->value, 3) : "--", 10);
  }
  return out + "\n\n";
}

}  // namespace

std::string_view to_string(TableId t) {
  switch (t) {
    case TableId::T1: return "t1";
    case TableId::T2: return "t2";
    case TableId::T3: return "t3";
    case TableId::T4: return "t4";
    case TableId::T5: return "t5";
    case TableId::Fig1: return "fig1";
    case TableId::Fig2: return "fig2";
  }
  return "?";
}

TableId parse_table_id(std::string_view s) {
  for (TableId t : {TableId::T1, TableId::T2, TableId::T3, TableId::T4, TableId::T5, TableId::Fig1, TableId::Fig2})
    if (to_string(t) == s) return t;
  throw UsageError("unknown table '" + std::string(s) + "' (expected t1, t2, t3, t4, t5, fig1 or fig2)");
}

GameKind game_for(TableId t) {
  switch (t) {
    case TableId::T1:
    case TableId::T2:
    case TableId::T3:
    case TableId::Fig1: return GameKind::Ultimatum;
    default: return GameKind::PrisonersDilemma;
  }
}

std::vector<TableId> tables_for(GameKind game) {
  if (game == GameKind::Ultimatum) return {TableId::T1, TableId::T2, TableId::T3, TableId::Fig1};
  return {TableId::T4, TableId::T5, TableId::Fig2};
}

std::string format_number(double v, int decimals) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);  // no "-0.000"
  return s;
}

Report build_report(const TranscriptSet& set, const std::vector<TableId>& tables, const AnalysisOptions& opt,
                    const std::vector<std::string>& inputs) {
  std::optional<GameKind> game;
  if (set.header) game = set.header->game;
  else if (!set.sessions.empty()) game = set.sessions.front().treatment.game;
  for (TableId t : tables) {
    if (game && game_for(t) != *game) {
      throw UsageError("table " + std::string(to_string(t)) + " needs " + std::string(to_string(game_for(t))) +
                       " transcripts, got " + std::string(to_string(*game)));
    }
  }

  Report rep;
  std::string& text = rep.text;
  text += "gamelab analysis report\n";
  for (const auto& in : inputs) text += "input: " + in + "\n";
  if (game) text += "game: " + std::string(to_string(*game)) + "\n";
  text += "sessions analysed: " + std::to_string(set.count(SessionStatus::Complete)) + " complete\n";
  text += "sessions excluded: " + std::to_string(set.count(SessionStatus::Aborted)) + " aborted, " +
          std::to_string(set.count(SessionStatus::Incomplete)) + " incomplete\n";
  if (set.truncated) text += "warning: input ended with a torn line, which was ignored\n";
  text += std::string("standard errors: ") + (opt.clustered ? "session-clustered" : "observation-level") + "\n";
  text += "offer comparison test: Wilcoxon " + std::string(to_string(opt.rank_mode)) + "\n";
  text += "significance: *** p<0.01, ** p<0.05, * p<0.1 (cells test the estimate against zero)\n";
  if (set.header) {
    text += "plan hash: " + set.header->plan_hash + "\nconfig:\n";
    for (const auto& [k, v] : set.header->config) text += "  " + k + " = " + v + "\n";
  }
  text += "\n";

  std::optional<std::vector<SeriesPoint>> series;
  for (TableId t : tables) {
    const std::string name = std::string(to_string(t)) + ".csv";
    switch (t) {
      case TableId::T1:
      case TableId::T2:
      case TableId::T4:
      case TableId::T5: {
        const GridTable g = t == TableId::T1   ? t1(set, opt)
                            : t == TableId::T2 ? t2(set, opt)
                            : t == TableId::T4 ? t4(set, opt)
                                               : t5(set, opt);
        rep.files.push_back({name, grid_csv(g)});
        text += grid_text(g);
        break;
      }
      case TableId::T3: {
        const auto reg = ug_regressions(set, opt);
        rep.files.push_back({name, regression_csv(reg)});
        text += regression_text(reg);
        break;
      }
      case TableId::Fig1:
      case TableId::Fig2: {
        if (!series) series = per_round_series(set, opt);
        rep.files.push_back({name, series_csv(*series, to_string(t))});
        text += series_text(*series, to_string(t));
        break;
      }
    }
  }
  return rep;
}

}  // namespace gamelab
