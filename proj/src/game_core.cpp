#include "gamelab/game_core.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "gamelab/errors.hpp"

namespace gamelab {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view to_string(Trait t) { return t == Trait::Fair ? "fair" : "selfish"; }
std::string_view to_string(GameKind g) {
  return g == GameKind::Ultimatum ? "ultimatum" : "prisoners_dilemma";
}
std::string_view to_string(Response r) { return r == Response::Accept ? "accept" : "reject"; }
std::string_view to_string(Move m) { return m == Move::Cooperate ? "cooperate" : "defect"; }
std::string_view to_string(Seat s) { return s == Seat::A ? "a" : "b"; }

Trait parse_trait(std::string_view s) {
  const auto v = lower(s);
  if (v == "fair" || v == "f") return Trait::Fair;
  if (v == "selfish" || v == "s") return Trait::Selfish;
  throw UsageError("unknown trait '" + std::string(s) + "'");
}

GameKind parse_game(std::string_view s) {
  const auto v = lower(s);
  if (v == "ultimatum" || v == "ug") return GameKind::Ultimatum;
  if (v == "prisoners_dilemma" || v == "pd") return GameKind::PrisonersDilemma;
  throw UsageError("unknown game '" + std::string(s) + "'");
}

Response parse_response(std::string_view s) {
  const auto v = lower(s);
  if (v == "accept") return Response::Accept;
  if (v == "reject") return Response::Reject;
  throw UsageError("unknown response '" + std::string(s) + "'");
}

Move parse_move(std::string_view s) {
  const auto v = lower(s);
  if (v == "cooperate" || v == "c") return Move::Cooperate;
  if (v == "defect" || v == "d") return Move::Defect;
  throw UsageError("unknown move '" + std::string(s) + "'");
}

Seat parse_seat(std::string_view s) {
  const auto v = lower(s);
  if (v == "a") return Seat::A;
  if (v == "b") return Seat::B;
  throw UsageError("unknown seat '" + std::string(s) + "'");
}

std::string Treatment::code() const {
  std::string c;
  c += seat_a == Trait::Fair ? 'F' : 'S';
  c += seat_b == Trait::Fair ? 'F' : 'S';
  return c;
}

std::string Treatment::label() const {
  return std::string(to_string(seat_a)) + "-" + std::string(to_string(seat_b));
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::CC: return "CC";
    case Outcome::CD: return "CD";
    case Outcome::DC: return "DC";
    case Outcome::DD: return "DD";
  }
  return "?";
}

Outcome outcome_for(const PDRound& r, Seat seat) {
  const bool own_c = r.action(seat) == Move::Cooperate;
  const bool opp_c = r.action(other(seat)) == Move::Cooperate;
  if (own_c) return opp_c ? Outcome::CC : Outcome::CD;
  return opp_c ? Outcome::DC : Outcome::DD;
}

int round_index(const RoundRecord& r) {
  return std::visit([](const auto& x) { return x.round_index; }, r);
}

std::pair<Dollars, Dollars> round_payoffs(const RoundRecord& r) {
  if (const auto* u = std::get_if<UltimatumRound>(&r)) {
    return {u->proposer_payoff, u->responder_payoff};
  }
  const auto& p = std::get<PDRound>(r);
  return {p.payoff_a, p.payoff_b};
}

std::pair<Dollars, Dollars> ultimatum_payoffs(Dollars offer, Response response) {
  if (offer < Dollars{} || offer > kPie) {
    throw DomainError("offer " + offer.str() + " outside [0, 100]");
  }
  if (response == Response::Reject) return {Dollars{}, Dollars{}};
  return {kPie - offer, offer};
}

std::pair<Dollars, Dollars> pd_payoffs(Move a, Move b) {
  const bool ca = a == Move::Cooperate;
  const bool cb = b == Move::Cooperate;
  if (ca && cb) return {Dollars::whole(200), Dollars::whole(200)};
  if (ca && !cb) return {Dollars::whole(0), Dollars::whole(300)};
  if (!ca && cb) return {Dollars::whole(300), Dollars::whole(0)};
  return {Dollars::whole(100), Dollars::whole(100)};
}

UltimatumRound make_ultimatum_round(int round_index, Dollars offer, Response response) {
  const auto [p, r] = ultimatum_payoffs(offer, response);
  return UltimatumRound{round_index, offer, response, p, r};
}

PDRound make_pd_round(int round_index, Move a, Move b) {
  const auto [pa, pb] = pd_payoffs(a, b);
  return PDRound{round_index, a, b, pa, pb};
}

std::vector<Treatment> expand_treatments(GameKind game) {
  using enum Trait;
  if (game == GameKind::Ultimatum) {
    return {{game, Selfish, Selfish}, {game, Selfish, Fair}, {game, Fair, Selfish}, {game, Fair, Fair}};
  }
  return {{game, Selfish, Selfish}, {game, Selfish, Fair}, {game, Fair, Fair}};
}

SessionState SessionState::fresh(Treatment treatment, int total_rounds) {
  if (total_rounds < 1) throw UsageError("total_rounds must be >= 1");
  SessionState s;
  s.treatment_ = treatment;
  s.total_rounds_ = total_rounds;
  return s;
}

SessionState apply_round(const SessionState& state, const RoundRecord& record) {
  if (state.finished()) throw InvariantViolation("session already finished");
  const int idx = round_index(record);
  if (idx != state.current_round()) {
    throw InvariantViolation("round index " + std::to_string(idx) + " does not match current round " +
                             std::to_string(state.current_round()));
  }
  if (const auto* u = std::get_if<UltimatumRound>(&record)) {
    if (state.treatment().game != GameKind::Ultimatum) {
      throw InvariantViolation("ultimatum record applied to a prisoner's dilemma session");
    }
    std::pair<Dollars, Dollars> expected;
    try {
      expected = ultimatum_payoffs(u->offer, u->response);
    } catch (const DomainError& e) {
      throw InvariantViolation(e.what());
    }
    if (expected != std::pair{u->proposer_payoff, u->responder_payoff}) {
      throw InvariantViolation("ultimatum payoffs inconsistent with offer and response in round " +
                               std::to_string(idx));
    }
  } else {
    const auto& p = std::get<PDRound>(record);
    if (state.treatment().game != GameKind::PrisonersDilemma) {
      throw InvariantViolation("prisoner's dilemma record applied to an ultimatum session");
    }
    if (pd_payoffs(p.action_a, p.action_b) != std::pair{p.payoff_a, p.payoff_b}) {
      throw InvariantViolation("prisoner's dilemma payoffs inconsistent with actions in round " +
                               std::to_string(idx));
    }
  }
  SessionState next = state;
  const auto [a, b] = round_payoffs(record);
  next.history_.push_back(record);
  next.cumulative_a_ += a;
  next.cumulative_b_ += b;
  return next;
}

}  // namespace gamelab
