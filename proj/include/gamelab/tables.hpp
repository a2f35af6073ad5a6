#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gamelab/game_core.hpp"
#include "gamelab/stats.hpp"
#include "gamelab/transcript.hpp"

namespace gamelab {

// One table cell: an estimate with its standard error and a test against zero.
struct Cell {
  double value = 0.0;
  std::optional<double> se;       // absent with a single observation
  std::size_t n = 0;
  std::optional<double> p_value;  // absent when se is absent or zero

  std::string stars() const { return p_value ? star_annotate(*p_value) : ""; }
};
using OptCell = std::optional<Cell>;  // absent = empty condition

struct AnalysisOptions {
  bool clustered = false;  // session-clustered SEs
  RankTestMode rank_mode = RankTestMode::RankSum;
};

// Complete sessions of `game`. Throws UsageError if the set holds the other game.
std::vector<const Transcript*> analysable_sessions(const TranscriptSet& set, GameKind game);

OptCell mean_cell(const std::vector<double>& samples, const std::vector<std::size_t>& clusters,
                  const AnalysisOptions& opt);
OptCell proportion_cell(const std::vector<double>& outcomes, const std::vector<std::size_t>& clusters,
                        const AnalysisOptions& opt);

struct OfferDynamicsRow {
  Treatment treatment;
  OptCell mean_offer;
  OptCell change_after_accept;
  OptCell change_after_reject;
};

struct OfferComparison {
  RankTestResult test;  // fair vs selfish proposers' offers
  std::size_t n_fair = 0;
  std::size_t n_selfish = 0;
};

struct OfferDynamics {
  std::vector<OfferDynamicsRow> rows;
  std::optional<OfferComparison> fair_vs_selfish;
};

OfferDynamics offer_dynamics(const TranscriptSet& set, const AnalysisOptions& opt = {});

struct RejectionRow {
  Treatment treatment;
  OptCell overall;
  OptCell after_increase;
  OptCell after_decrease;
  std::size_t n_increase = 0;
  std::size_t n_decrease = 0;
  std::size_t n_unchanged = 0;
};

std::vector<RejectionRow> rejection_table(const TranscriptSet& set, const AnalysisOptions& opt = {});

inline const std::vector<std::string> kOfferRegressors = {"round", "proposer_selfish", "responder_selfish", "constant"};
inline const std::vector<std::string> kRejectionRegressors = {"offered_amount", "round", "proposer_selfish",
                                                              "responder_selfish", "constant"};

struct UltimatumRegressions {
  std::optional<RegressionResult> offer;      // OLS, all proposer offers
  std::optional<RegressionResult> rejection;  // logit, all responder decisions
  std::vector<std::string> notes;             // why a column is absent
};

UltimatumRegressions ug_regressions(const TranscriptSet& set, const AnalysisOptions& opt = {});

struct PDOutcomeRow {
  Treatment treatment;
  OptCell rate_c;
  OptCell rate_cc;
  OptCell rate_cd_or_dc;
  OptCell rate_dd;
};

std::vector<PDOutcomeRow> pd_outcome_rates(const TranscriptSet& set, const AnalysisOptions& opt = {});

inline constexpr std::array<Outcome, 4> kOutcomes = {Outcome::CC, Outcome::CD, Outcome::DC, Outcome::DD};

struct ConditionalCoopRow {
  Trait trait;                      // the deciding player's trait
  std::array<OptCell, 4> given;     // indexed like kOutcomes
  std::array<std::size_t, 4> counts{};
  std::array<std::size_t, 4> cooperations{};
};

struct ConditionalCoop {
  std::vector<ConditionalCoopRow> rows;  // selfish, fair
  // Fair vs selfish per condition, when both cells are non-empty.
  std::array<std::optional<ZTest>, 4> trait_difference;
};

ConditionalCoop conditional_coop(const TranscriptSet& set, const AnalysisOptions& opt = {});

struct SeriesPoint {
  std::string figure;   // "fig1" | "fig2"
  std::string group;
  std::string measure;  // mean_offer | rejection_rate | cooperation_rate
  int round = 0;
  OptCell cell;
};

// fig1: per UG treatment, offer and rejection per round.
// fig2: per (own trait, opponent trait), cooperation per round.
std::vector<SeriesPoint> per_round_series(const TranscriptSet& set, const AnalysisOptions& opt = {});

}  // namespace gamelab
