#include "gamelab/tables.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace gamelab {
namespace {

const UltimatumRound& ug(const RoundEntry& e) { return std::get<UltimatumRound>(e.record); }
const PDRound& pd(const RoundEntry& e) { return std::get<PDRound>(e.record); }

double dummy(bool b) { return b ? 1.0 : 0.0; }

// Samples and their session cluster ids, grouped by key.
template <typename Key>
struct Buckets {
  std::map<Key, std::vector<double>> values;
  std::map<Key, std::vector<std::size_t>> clusters;
  void add(const Key& k, double v, std::size_t cluster) {
    values[k].push_back(v);
    clusters[k].push_back(cluster);
  }
  OptCell mean(const Key& k, const AnalysisOptions& opt) const {
    const auto it = values.find(k);
    if (it == values.end()) return std::nullopt;
    return mean_cell(it->second, clusters.at(k), opt);
  }
  OptCell proportion(const Key& k, const AnalysisOptions& opt) const {
    const auto it = values.find(k);
    if (it == values.end()) return std::nullopt;
    return proportion_cell(it->second, clusters.at(k), opt);
  }
};

std::size_t distinct(const std::vector<std::size_t>& ids) {
  std::vector<std::size_t> v = ids;
  std::sort(v.begin(), v.end());
  return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
}

void finish_cell(Cell& c, const AnalysisOptions& opt, std::size_t groups, bool use_t) {
  if (!c.se || *c.se <= 0) return;
  const double stat = c.value / *c.se;
  if (use_t) {
    const double df = opt.clustered ? static_cast<double>(groups) - 1.0 : static_cast<double>(c.n) - 1.0;
    c.p_value = t_two_sided_p(stat, df);
  } else {
    c.p_value = normal_two_sided_p(stat);
  }
}

int max_rounds(const std::vector<const Transcript*>& sessions) {
  int r = 0;
  for (const auto* t : sessions) r = std::max(r, t->rounds);
  return r;
}

}  // namespace

std::vector<const Transcript*> analysable_sessions(const TranscriptSet& set, GameKind game) {
  if (set.header && set.header->game != game) {
    throw UsageError("transcripts hold the " + std::string(to_string(set.header->game)) + " game; this table needs " +
                     std::string(to_string(game)));
  }
  std::vector<const Transcript*> out;
  for (const auto& t : set.sessions) {
    if (t.treatment.game != game) {
      throw UsageError("session " + t.session_id + " is not a " + std::string(to_string(game)) + " session");
    }
    if (t.status == SessionStatus::Complete) out.push_back(&t);
  }
  return out;
}

OptCell mean_cell(const std::vector<double>& samples, const std::vector<std::size_t>& clusters,
                  const AnalysisOptions& opt) {
  if (samples.empty()) return std::nullopt;
  Cell c;
  c.n = samples.size();
  if (samples.size() == 1) {
    c.value = samples[0];
    return c;
  }
  const std::size_t groups = distinct(clusters);
  const MeanSE m = opt.clustered && groups >= 2 ? mean_se_clustered(samples, clusters) : mean_se(samples);
  c.value = m.mean;
  c.se = m.se;
  finish_cell(c, opt, groups, true);
  return c;
}

OptCell proportion_cell(const std::vector<double>& outcomes, const std::vector<std::size_t>& clusters,
                        const AnalysisOptions& opt) {
  if (outcomes.empty()) return std::nullopt;
  Cell c;
  c.n = outcomes.size();
  double k = 0.0;
  for (double v : outcomes) k += v;
  c.value = k / static_cast<double>(c.n);
  const std::size_t groups = distinct(clusters);
  if (opt.clustered && groups >= 2) {
    c.se = mean_se_clustered(outcomes, clusters).se;
  } else {
    c.se = std::sqrt(c.value * (1.0 - c.value) / static_cast<double>(c.n));
  }
  finish_cell(c, opt, groups, false);
  return c;
}

OfferDynamics offer_dynamics(const TranscriptSet& set, const AnalysisOptions& opt) {
  const auto sessions = analysable_sessions(set, GameKind::Ultimatum);
  enum Kind { Mean, AfterAccept, AfterReject };
  Buckets<std::pair<std::string, int>> b;
  std::vector<double> fair, selfish;
  // signed-rank pairing key: (responder trait, session index, round)
  std::map<std::tuple<Trait, int, int>, std::pair<std::optional<double>, std::optional<double>>> paired;
  for (std::size_t s = 0; s < sessions.size(); ++s) {
    const auto& t = *sessions[s];
    const std::string code = t.treatment.code();
    for (std::size_t i = 0; i < t.entries.size(); ++i) {
      const auto& r = ug(t.entries[i]);
      const double offer = r.offer.value();
      b.add({code, Mean}, offer, s);
      (t.treatment.seat_a == Trait::Fair ? fair : selfish).push_back(offer);
      auto& slot = paired[{t.treatment.seat_b, t.index, r.round_index}];
      (t.treatment.seat_a == Trait::Fair ? slot.first : slot.second) = offer;
      if (i == 0) continue;
      const auto& prev = ug(t.entries[i - 1]);
      b.add({code, prev.response == Response::Accept ? AfterAccept : AfterReject}, offer - prev.offer.value(), s);
    }
  }
  OfferDynamics out;
  for (const auto& tr : expand_treatments(GameKind::Ultimatum)) {
    const std::string code = tr.code();
    out.rows.push_back({tr, b.mean({code, Mean}, opt), b.mean({code, AfterAccept}, opt), b.mean({code, AfterReject}, opt)});
  }
  if (opt.rank_mode == RankTestMode::RankSum) {
    if (!fair.empty() && !selfish.empty()) out.fair_vs_selfish = OfferComparison{wilcoxon_rank(fair, selfish), fair.size(), selfish.size()};
  } else {
    std::vector<double> x, y;
    for (const auto& [key, pr] : paired) {
      if (pr.first && pr.second) {
        x.push_back(*pr.first);
        y.push_back(*pr.second);
      }
    }
    if (!x.empty()) out.fair_vs_selfish = OfferComparison{wilcoxon_rank(x, y, RankTestMode::SignedRank), x.size(), y.size()};
  }
  return out;
}

std::vector<RejectionRow> rejection_table(const TranscriptSet& set, const AnalysisOptions& opt) {
  const auto sessions = analysable_sessions(set, GameKind::Ultimatum);
  enum Kind { Overall, AfterIncrease, AfterDecrease };
  Buckets<std::pair<std::string, int>> b;
  std::map<std::string, std::size_t> unchanged;
  for (std::size_t s = 0; s < sessions.size(); ++s) {
    const auto& t = *sessions[s];
    const std::string code = t.treatment.code();
    for (std::size_t i = 0; i < t.entries.size(); ++i) {
      const auto& r = ug(t.entries[i]);
      const double rejected = dummy(r.response == Response::Reject);
      b.add({code, Overall}, rejected, s);
      if (i == 0) continue;
      const auto prev = ug(t.entries[i - 1]).offer;
      if (r.offer > prev) {
        b.add({code, AfterIncrease}, rejected, s);
      } else if (r.offer < prev) {
        b.add({code, AfterDecrease}, rejected, s);
      } else {
        ++unchanged[code];
      }
    }
  }
  std::vector<RejectionRow> rows;
  for (const auto& tr : expand_treatments(GameKind::Ultimatum)) {
    const std::string code = tr.code();
    RejectionRow row{tr, b.proportion({code, Overall}, opt), b.proportion({code, AfterIncrease}, opt),
                     b.proportion({code, AfterDecrease}, opt)};
    if (auto it = b.values.find({code, AfterIncrease}); it != b.values.end()) row.n_increase = it->second.size();
    if (auto it = b.values.find({code, AfterDecrease}); it != b.values.end()) row.n_decrease = it->second.size();
    row.n_unchanged = unchanged[code];
    rows.push_back(row);
  }
  return rows;
}

UltimatumRegressions ug_regressions(const TranscriptSet& set, const AnalysisOptions& opt) {
  const auto sessions = analysable_sessions(set, GameKind::Ultimatum);
  std::vector<double> offers, rejected;
  std::vector<std::vector<double>> offer_rows, reject_rows;
  std::vector<std::size_t> clusters;
  for (std::size_t s = 0; s < sessions.size(); ++s) {
    const auto& t = *sessions[s];
    const double ps = dummy(t.treatment.seat_a == Trait::Selfish);
    const double rs = dummy(t.treatment.seat_b == Trait::Selfish);
    for (const auto& e : t.entries) {
      const auto& r = ug(e);
      const double round = r.round_index;
      offers.push_back(r.offer.value());
      offer_rows.push_back({round, ps, rs, 1.0});
      rejected.push_back(dummy(r.response == Response::Reject));
      reject_rows.push_back({r.offer.value(), round, ps, rs, 1.0});
      clusters.push_back(s);
    }
  }
  const std::span<const std::size_t> cl = opt.clustered ? std::span<const std::size_t>(clusters) : std::span<const std::size_t>{};
  UltimatumRegressions out;
  try {
    out.offer = ols(offers, make_design(kOfferRegressors, offer_rows), cl);
  } catch (const DomainError& e) {
    out.notes.push_back(std::string("offered amount regression not estimable: ") + e.what());
  }
  try {
    out.rejection = logit(rejected, make_design(kRejectionRegressors, reject_rows), {}, cl);
  } catch (const DomainError& e) {
    out.notes.push_back(std::string("rejection regression not estimable: ") + e.what());
  }
  return out;
}

std::vector<PDOutcomeRow> pd_outcome_rates(const TranscriptSet& set, const AnalysisOptions& opt) {
  const auto sessions = analysable_sessions(set, GameKind::PrisonersDilemma);
  enum Kind { C, CCk, Mixed, DDk };
  Buckets<std::pair<std::string, int>> b;
  for (std::size_t s = 0; s < sessions.size(); ++s) {
    const auto& t = *sessions[s];
    const std::string code = t.treatment.code();
    for (const auto& e : t.entries) {
      const auto& r = pd(e);
      b.add({code, C}, dummy(r.action_a == Move::Cooperate), s);
      b.add({code, C}, dummy(r.action_b == Move::Cooperate), s);
      const Outcome o = outcome_for(r, Seat::A);
      b.add({code, CCk}, dummy(o == Outcome::CC), s);
      b.add({code, Mixed}, dummy(o == Outcome::CD || o == Outcome::DC), s);
      b.add({code, DDk}, dummy(o == Outcome::DD), s);
    }
  }
  std::vector<PDOutcomeRow> rows;
  for (const auto& tr : expand_treatments(GameKind::PrisonersDilemma)) {
    const std::string code = tr.code();
    rows.push_back({tr, b.proportion({code, C}, opt), b.proportion({code, CCk}, opt), b.proportion({code, Mixed}, opt),
                    b.proportion({code, DDk}, opt)});
  }
  return rows;
}

ConditionalCoop conditional_coop(const TranscriptSet& set, const AnalysisOptions& opt) {
  const auto sessions = analysable_sessions(set, GameKind::PrisonersDilemma);
  Buckets<std::pair<Trait, int>> b;
  for (std::size_t s = 0; s < sessions.size(); ++s) {
    const auto& t = *sessions[s];
    for (std::size_t i = 1; i < t.entries.size(); ++i) {
      const auto& prev = pd(t.entries[i - 1]);
      const auto& cur = pd(t.entries[i]);
      for (Seat seat : {Seat::A, Seat::B}) {
        const int cond = static_cast<int>(outcome_for(prev, seat));
        b.add({t.treatment.trait(seat), cond}, dummy(cur.action(seat) == Move::Cooperate), s);
      }
    }
  }
  ConditionalCoop out;
  for (Trait trait : {Trait::Selfish, Trait::Fair}) {
    ConditionalCoopRow row;
    row.trait = trait;
    for (std::size_t c = 0; c < kOutcomes.size(); ++c) {
      const std::pair<Trait, int> key{trait, static_cast<int>(kOutcomes[c])};
      row.given[c] = b.proportion(key, opt);
      if (auto it = b.values.find(key); it != b.values.end()) {
        row.counts[c] = it->second.size();
        double k = 0;
        for (double v : it->second) k += v;
        row.cooperations[c] = static_cast<std::size_t>(std::lround(k));
      }
    }
    out.rows.push_back(row);
  }
  const auto& sel = out.rows[0];
  const auto& fair = out.rows[1];
  for (std::size_t c = 0; c < kOutcomes.size(); ++c) {
    if (sel.counts[c] > 0 && fair.counts[c] > 0) {
      out.trait_difference[c] = two_prop_z(fair.cooperations[c], fair.counts[c], sel.cooperations[c], sel.counts[c]);
    }
  }
  return out;
}

std::vector<SeriesPoint> per_round_series(const TranscriptSet& set, const AnalysisOptions& opt) {
  std::vector<SeriesPoint> out;
  const GameKind game = set.header ? set.header->game
                                   : (set.sessions.empty() ? GameKind::Ultimatum : set.sessions.front().treatment.game);
  const auto sessions = analysable_sessions(set, game);
  const int rounds = max_rounds(sessions);

  if (game == GameKind::Ultimatum) {
    Buckets<std::tuple<std::string, int, int>> b;  // (code, measure, round)
    for (std::size_t s = 0; s < sessions.size(); ++s) {
      const auto& t = *sessions[s];
      for (const auto& e : t.entries) {
        const auto& r = ug(e);
        b.add({t.treatment.code(), 0, r.round_index}, r.offer.value(), s);
        b.add({t.treatment.code(), 1, r.round_index}, dummy(r.response == Response::Reject), s);
      }
    }
    for (const auto& tr : expand_treatments(game)) {
      for (int r = 1; r <= rounds; ++r) out.push_back({"fig1", tr.label(), "mean_offer", r, b.mean({tr.code(), 0, r}, opt)});
      for (int r = 1; r <= rounds; ++r)
        out.push_back({"fig1", tr.label(), "rejection_rate", r, b.proportion({tr.code(), 1, r}, opt)});
    }
    return out;
  }

  Buckets<std::tuple<Trait, Trait, int>> b;  // (own, opponent, round)
  for (std::size_t s = 0; s < sessions.size(); ++s) {
    const auto& t = *sessions[s];
    for (const auto& e : t.entries) {
      const auto& r = pd(e);
      for (Seat seat : {Seat::A, Seat::B}) {
        b.add({t.treatment.trait(seat), t.treatment.trait(other(seat)), r.round_index},
              dummy(r.action(seat) == Move::Cooperate), s);
      }
    }
  }
  for (Trait own : {Trait::Fair, Trait::Selfish}) {
    for (Trait opp : {Trait::Fair, Trait::Selfish}) {
      const std::string group = std::string(to_string(own)) + " vs " + std::string(to_string(opp));
      for (int r = 1; r <= rounds; ++r) out.push_back({"fig2", group, "cooperation_rate", r, b.proportion({own, opp, r}, opt)});
    }
  }
  return out;
}

}  // namespace gamelab
