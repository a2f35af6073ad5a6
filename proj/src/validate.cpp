#include "gamelab/validate.hpp"

#include "gamelab/errors.hpp"
#include "gamelab/prompt_kit.hpp"

namespace gamelab {
namespace {

std::string money(Dollars d) { return d.str(); }

void check_decision_text(const Transcript& t, const RoundEntry& e, const SeatDecision& d, Role role,
                         std::vector<Violation>& out) {
  const int r = round_index(e.record);
  auto fail = [&](const std::string& msg) {
    out.push_back({t.session_id, r, "seat " + std::string(to_string(d.seat)) + ": " + msg});
  };
  if (d.envelope.reasoning.empty() || d.envelope.decision.empty()) {
    fail("empty reasoning or decision");
    return;
  }
  Action a;
  try {
    a = parse_action(role, d.envelope.decision);
  } catch (const DecisionFormatError& ex) {
    fail(std::string("decision text does not parse: ") + ex.what());
    return;
  }
  if (const auto* u = std::get_if<UltimatumRound>(&e.record)) {
    if (const auto* p = std::get_if<ParsedUltimatumProposal>(&a)) {
      if (p->offer != u->offer) fail("decision text offers " + money(p->offer) + ", record says " + money(u->offer));
    } else if (const auto* resp = std::get_if<Response>(&a)) {
      if (*resp != u->response) fail("decision text says " + std::string(to_string(*resp)) + ", record disagrees");
    }
  } else if (const auto* pd = std::get_if<PDRound>(&e.record)) {
    if (const auto* m = std::get_if<Move>(&a); m && *m != pd->action(d.seat)) {
      fail("decision text says " + std::string(to_string(*m)) + ", record disagrees");
    }
  }
}

}  // namespace

std::vector<Violation> validate_transcript(const Transcript& t) {
  std::vector<Violation> out;
  auto fail = [&](int round, std::string msg) { out.push_back({t.session_id, round, std::move(msg)}); };

  for (Seat s : {Seat::A, Seat::B}) {
    const auto& meta = t.seat_meta(s);
    if (meta.trait != t.treatment.trait(s)) fail(0, "seat " + std::string(to_string(s)) + " trait disagrees with treatment");
    if (meta.system_prompt != render_system(meta.trait)) {
      fail(0, "seat " + std::string(to_string(s)) + " system prompt differs from the template");
    }
  }

  SessionState state = SessionState::fresh(t.treatment, t.rounds);
  for (const auto& e : t.entries) {
    const int r = round_index(e.record);
    if (e.decisions.size() != 2 || e.decisions[0].seat != Seat::A || e.decisions[1].seat != Seat::B) {
      fail(r, "expected one decision per seat, seat A first");
    } else {
      for (const auto& d : e.decisions) {
        const auto vp = viewpoint_for(t.treatment, d.seat);
        std::optional<Dollars> offer;
        if (const auto* u = std::get_if<UltimatumRound>(&e.record); u && d.seat == Seat::B) offer = u->offer;
        try {
          const auto expected = render_prompt(state, vp, offer);
          if (expected.user != d.user_prompt) {
            fail(r, "seat " + std::string(to_string(d.seat)) + " prompt differs from the replayed rendering");
          }
        } catch (const std::exception& ex) {
          fail(r, std::string("cannot re-render prompt: ") + ex.what());
        }
        check_decision_text(t, e, d, vp.role, out);
      }
    }
    try {
      state = apply_round(state, e.record);
    } catch (const InvariantViolation& ex) {
      fail(r, std::string("replay rejected round: ") + ex.what());
      return out;
    }
  }

  const auto n = static_cast<int>(t.entries.size());
  switch (t.status) {
    case SessionStatus::Complete:
      if (n != t.rounds) fail(0, "complete session has " + std::to_string(n) + " of " + std::to_string(t.rounds) + " rounds");
      if (t.abort) fail(0, "complete session carries abort details");
      break;
    case SessionStatus::Aborted:
      if (n >= t.rounds) fail(0, "aborted session has every round");
      if (!t.abort) {
        fail(0, "aborted session has no abort details");
      } else if (t.abort->round != n + 1) {
        fail(0, "abort recorded at round " + std::to_string(t.abort->round) + " after " + std::to_string(n) + " rounds");
      }
      break;
    case SessionStatus::Incomplete: break;
  }
  if (t.reported_totals) {
    const auto [a, b] = *t.reported_totals;
    if (a != state.cumulative(Seat::A) || b != state.cumulative(Seat::B)) {
      fail(0, "footer totals " + money(a) + "/" + money(b) + " disagree with replay " +
                  money(state.cumulative(Seat::A)) + "/" + money(state.cumulative(Seat::B)));
    }
  }
  if (t.treatment.game == GameKind::PrisonersDilemma) {
    auto leaks = audit_information_flow(t);
    out.insert(out.end(), leaks.begin(), leaks.end());
  }
  return out;
}

std::vector<Violation> audit_information_flow(const Transcript& t) {
  std::vector<Violation> out;
  for (const auto& e : t.entries) {
    const int r = round_index(e.record);
    for (const auto& d : e.decisions) {
      for (int later = r; later <= t.rounds; ++later) {
        if (d.user_prompt.find("Round " + std::to_string(later) + " summary") != std::string::npos) {
          out.push_back({t.session_id, r, "seat " + std::string(to_string(d.seat)) + " prompt mentions round " +
                                              std::to_string(later)});
        }
      }
      for (const auto& other : e.decisions) {
        if (other.seat == d.seat) continue;
        for (const std::string* leak : {&other.envelope.reasoning, &other.envelope.raw}) {
          if (leak->size() >= 16 && d.user_prompt.find(*leak) != std::string::npos) {
            out.push_back({t.session_id, r, "seat " + std::string(to_string(d.seat)) +
                                                " prompt contains the other seat's same-round text"});
          }
        }
      }
    }
  }
  return out;
}

ValidationReport validate_transcripts(const TranscriptSet& set) {
  ValidationReport rep;
  rep.truncated_input = set.truncated;
  for (const auto& t : set.sessions) {
    if (t.status == SessionStatus::Incomplete) {
      ++rep.incomplete_skipped;
      continue;
    }
    ++rep.sessions_checked;
    auto v = validate_transcript(t);
    rep.violations.insert(rep.violations.end(), v.begin(), v.end());
  }
  return rep;
}

std::string format_violation(const Violation& v) {
  std::string s = v.session_id;
  if (v.round > 0) s += " round " + std::to_string(v.round);
  return s + ": " + v.message;
}

}  // namespace gamelab
