#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "gamelab/money.hpp"

namespace gamelab {

inline constexpr int kDefaultRounds = 5;
inline constexpr Dollars kPie = Dollars::whole(100);

enum class Trait { Fair, Selfish };
enum class GameKind { Ultimatum, PrisonersDilemma };
enum class Response { Accept, Reject };
enum class Move { Cooperate, Defect };
// Seat A is the proposer / player 1, seat B the responder / player 2.
enum class Seat { A, B };

std::string_view to_string(Trait t);
std::string_view to_string(GameKind g);
std::string_view to_string(Response r);
std::string_view to_string(Move m);
std::string_view to_string(Seat s);

Trait parse_trait(std::string_view s);
// Accepts "ultimatum"/"ug" and "prisoners_dilemma"/"pd".
GameKind parse_game(std::string_view s);
Response parse_response(std::string_view s);
Move parse_move(std::string_view s);
Seat parse_seat(std::string_view s);

inline Seat other(Seat s) { return s == Seat::A ? Seat::B : Seat::A; }

struct Treatment {
  GameKind game = GameKind::Ultimatum;
  Trait seat_a = Trait::Fair;
  Trait seat_b = Trait::Fair;

  Trait trait(Seat s) const { return s == Seat::A ? seat_a : seat_b; }
  // Two-letter cell code, seat A first: "SF" = selfish A, fair B.
  std::string code() const;
  // "selfish-fair" style label used in reports.
  std::string label() const;

  bool operator==(const Treatment&) const = default;
};

struct UltimatumRound {
  int round_index = 1;
  Dollars offer;  // amount offered to the responder
  Response response = Response::Accept;
  Dollars proposer_payoff;
  Dollars responder_payoff;

  bool operator==(const UltimatumRound&) const = default;
};

struct PDRound {
  int round_index = 1;
  Move action_a = Move::Cooperate;
  Move action_b = Move::Cooperate;
  Dollars payoff_a;
  Dollars payoff_b;

  Move action(Seat s) const { return s == Seat::A ? action_a : action_b; }
  Dollars payoff(Seat s) const { return s == Seat::A ? payoff_a : payoff_b; }

  bool operator==(const PDRound&) const = default;
};

using RoundRecord = std::variant<UltimatumRound, PDRound>;

// Previous-round joint outcome from one seat's perspective, own action first.
enum class Outcome { CC, CD, DC, DD };

std::string_view to_string(Outcome o);
Outcome outcome_for(const PDRound& r, Seat seat);

int round_index(const RoundRecord& r);
// Payoff for seat A (proposer / player 1) and seat B.
std::pair<Dollars, Dollars> round_payoffs(const RoundRecord& r);

// Returns (proposer, responder). Throws DomainError for offers outside [0, 100].
std::pair<Dollars, Dollars> ultimatum_payoffs(Dollars offer, Response response);
// Returns (payoff_a, payoff_b).
std::pair<Dollars, Dollars> pd_payoffs(Move a, Move b);

UltimatumRound make_ultimatum_round(int round_index, Dollars offer, Response response);
PDRound make_pd_round(int round_index, Move a, Move b);

// Ordered list of design cells: UG -> SS, SF, FS, FF; PD -> SS, SF, FF.
std::vector<Treatment> expand_treatments(GameKind game);

class SessionState {
 public:
  static SessionState fresh(Treatment treatment, int total_rounds = kDefaultRounds);

  const Treatment& treatment() const { return treatment_; }
  int total_rounds() const { return total_rounds_; }
  // 1-based; total_rounds + 1 once the session is finished.
  int current_round() const { return static_cast<int>(history_.size()) + 1; }
  int rounds_left() const { return total_rounds_ - current_round(); }
  bool finished() const { return current_round() > total_rounds_; }
  const std::vector<RoundRecord>& history() const { return history_; }
  Dollars cumulative(Seat s) const { return s == Seat::A ? cumulative_a_ : cumulative_b_; }

  bool operator==(const SessionState&) const = default;

 private:
  friend SessionState apply_round(const SessionState&, const RoundRecord&);

  Treatment treatment_;
  int total_rounds_ = kDefaultRounds;
  std::vector<RoundRecord> history_;
  Dollars cumulative_a_;
  Dollars cumulative_b_;
};

// Pure transition. Throws InvariantViolation when the record does not belong
// at the current round, does not match the game, or carries payoffs that
// disagree with the payoff rules.
SessionState apply_round(const SessionState& state, const RoundRecord& record);

}  // namespace gamelab
