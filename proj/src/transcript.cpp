#include "gamelab/transcript.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "gamelab/errors.hpp"

namespace gamelab {
namespace {

using json = nlohmann::json;

json treatment_json(const Treatment& t) {
  return {{"game", to_string(t.game)}, {"seat_a", to_string(t.seat_a)}, {"seat_b", to_string(t.seat_b)}};
}

Treatment treatment_from(const json& j) {
  return Treatment{parse_game(j.at("game").get<std::string>()), parse_trait(j.at("seat_a").get<std::string>()),
                   parse_trait(j.at("seat_b").get<std::string>())};
}

json seat_meta_json(const SeatMeta& m) {
  json j = {{"backend", to_string(m.backend)},
            {"trait", to_string(m.trait)},
            {"seed", m.seed},
            {"system_prompt", m.system_prompt}};
  if (m.backend == Backend::Remote) {
    j["model"] = m.model_id;
    j["temperature"] = m.temperature;
    j["omitted_params"] = m.omitted_params;
  }
  return j;
}

SeatMeta seat_meta_from(const json& j) {
  SeatMeta m;
  m.backend = parse_backend(j.at("backend").get<std::string>());
  m.trait = parse_trait(j.at("trait").get<std::string>());
  m.seed = j.at("seed").get<std::uint64_t>();
  m.system_prompt = j.at("system_prompt").get<std::string>();
  if (m.backend == Backend::Remote) {
    m.model_id = j.at("model").get<std::string>();
    m.temperature = j.at("temperature").get<double>();
    m.omitted_params = j.value("omitted_params", std::vector<std::string>{});
  }
  return m;
}

json decision_json(const SeatDecision& d) {
  return {{"seat", to_string(d.seat)},         {"prompt", d.user_prompt},
          {"reasoning", d.envelope.reasoning}, {"decision", d.envelope.decision},
          {"raw", d.envelope.raw},             {"attempts", d.envelope.attempts}};
}

SeatDecision decision_from(const json& j) {
  SeatDecision d;
  d.seat = parse_seat(j.at("seat").get<std::string>());
  d.user_prompt = j.at("prompt").get<std::string>();
  d.envelope.reasoning = j.at("reasoning").get<std::string>();
  d.envelope.decision = j.at("decision").get<std::string>();
  d.envelope.raw = j.at("raw").get<std::string>();
  d.envelope.attempts = j.at("attempts").get<int>();
  return d;
}

std::string line(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace) + "\n"; }

void apply_line(const json& j, TranscriptSet& set, std::unordered_map<std::string, std::size_t>& by_id) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "experiment") {
    ExperimentHeader h;
    h.schema = j.at("schema").get<std::string>();
    if (h.schema != kTranscriptSchema) throw DecodeError("unsupported transcript schema '" + h.schema + "'");
    h.game = parse_game(j.at("game").get<std::string>());
    h.plan_hash = j.at("plan_hash").get<std::string>();
    h.rounds = j.at("rounds").get<int>();
    h.config = j.value("config", std::map<std::string, std::string>{});
    if (set.header && set.header->plan_hash != h.plan_hash) {
      throw DecodeError("conflicting experiment headers in one file");
    }
    set.header = std::move(h);
    return;
  }
  const std::string id = j.at("session_id").get<std::string>();
  if (type == "session_start") {
    Transcript t;
    t.session_id = id;
    t.treatment = treatment_from(j.at("treatment"));
    t.index = j.at("index").get<int>();
    t.rounds = j.at("rounds").get<int>();
    t.seed = j.at("seed").get<std::uint64_t>();
    t.plan_hash = j.at("plan_hash").get<std::string>();
    t.seat_a = seat_meta_from(j.at("seat_a"));
    t.seat_b = seat_meta_from(j.at("seat_b"));
    t.started_at = j.value("started_at", "");
    if (auto it = by_id.find(id); it != by_id.end()) {
      set.sessions[it->second] = std::move(t);
    } else {
      by_id.emplace(id, set.sessions.size());
      set.sessions.push_back(std::move(t));
    }
    return;
  }
  auto it = by_id.find(id);
  if (it == by_id.end()) throw DecodeError("record for unknown session '" + id + "'");
  Transcript& t = set.sessions[it->second];
  if (type == "round") {
    RoundEntry e;
    const int idx = j.at("round").get<int>();
    if (t.treatment.game == GameKind::Ultimatum) {
      e.record = UltimatumRound{idx, Dollars::from_cents(j.at("offer_cents").get<std::int64_t>()),
                                parse_response(j.at("response").get<std::string>()),
                                Dollars::from_cents(j.at("payoff_a_cents").get<std::int64_t>()),
                                Dollars::from_cents(j.at("payoff_b_cents").get<std::int64_t>())};
    } else {
      e.record = PDRound{idx, parse_move(j.at("action_a").get<std::string>()),
                         parse_move(j.at("action_b").get<std::string>()),
                         Dollars::from_cents(j.at("payoff_a_cents").get<std::int64_t>()),
                         Dollars::from_cents(j.at("payoff_b_cents").get<std::int64_t>())};
    }
    for (const auto& d : j.at("decisions")) e.decisions.push_back(decision_from(d));
    t.entries.push_back(std::move(e));
  } else if (type == "session_end") {
    const std::string status = j.at("status").get<std::string>();
    if (status == "complete") {
      t.status = SessionStatus::Complete;
    } else if (status == "aborted") {
      t.status = SessionStatus::Aborted;
      const auto& a = j.at("abort");
      t.abort = AbortInfo{parse_abort_reason(a.at("reason").get<std::string>()),
                          a.at("detail").get<std::string>(),
                          a.at("round").get<int>(),
                          parse_seat(a.at("seat").get<std::string>()),
                          a.at("last_raw").get<std::string>(),
                          a.at("attempts").get<int>()};
    } else {
      throw DecodeError("unknown session status '" + status + "'");
    }
    t.reported_totals = {Dollars::from_cents(j.at("total_a_cents").get<std::int64_t>()),
                         Dollars::from_cents(j.at("total_b_cents").get<std::int64_t>())};
    t.finished_at = j.value("finished_at", "");
  } else {
    throw DecodeError("unknown record type '" + type + "'");
  }
}

}  // namespace

std::string_view to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::Complete: return "complete";
    case SessionStatus::Aborted: return "aborted";
    case SessionStatus::Incomplete: return "incomplete";
  }
  return "?";
}

std::size_t TranscriptSet::count(SessionStatus s) const {
  std::size_t n = 0;
  for (const auto& t : sessions) n += t.status == s;
  return n;
}

const Transcript* TranscriptSet::find(std::string_view session_id) const {
  for (const auto& t : sessions) {
    if (t.session_id == session_id) return &t;
  }
  return nullptr;
}

std::string encode_header_line(const ExperimentHeader& h) {
  return line({{"type", "experiment"},
               {"schema", h.schema},
               {"game", to_string(h.game)},
               {"plan_hash", h.plan_hash},
               {"rounds", h.rounds},
               {"config", h.config}});
}

std::string encode_session_start(const Transcript& t) {
  json j = {{"type", "session_start"},
            {"session_id", t.session_id},
            {"treatment", treatment_json(t.treatment)},
            {"index", t.index},
            {"rounds", t.rounds},
            {"seed", t.seed},
            {"plan_hash", t.plan_hash},
            {"seat_a", seat_meta_json(t.seat_a)},
            {"seat_b", seat_meta_json(t.seat_b)}};
  if (!t.started_at.empty()) j["started_at"] = t.started_at;
  return line(j);
}

std::string encode_round_line(const std::string& session_id, const RoundEntry& e) {
  json j = {{"type", "round"}, {"session_id", session_id}, {"round", round_index(e.record)}};
  if (const auto* u = std::get_if<UltimatumRound>(&e.record)) {
    j["offer_cents"] = u->offer.cents();
    j["response"] = to_string(u->response);
    j["payoff_a_cents"] = u->proposer_payoff.cents();
    j["payoff_b_cents"] = u->responder_payoff.cents();
  } else {
    const auto& p = std::get<PDRound>(e.record);
    j["action_a"] = to_string(p.action_a);
    j["action_b"] = to_string(p.action_b);
    j["payoff_a_cents"] = p.payoff_a.cents();
    j["payoff_b_cents"] = p.payoff_b.cents();
  }
  j["decisions"] = json::array();
  for (const auto& d : e.decisions) j["decisions"].push_back(decision_json(d));
  return line(j);
}

std::string encode_session_end(const Transcript& t) {
  json j = {{"type", "session_end"}, {"session_id", t.session_id}, {"status", to_string(t.status)}};
  if (t.abort) {
    j["abort"] = {{"reason", to_string(t.abort->reason)}, {"detail", t.abort->detail},
                  {"round", t.abort->round},              {"seat", to_string(t.abort->seat)},
                  {"last_raw", t.abort->last_raw},        {"attempts", t.abort->attempts}};
  }
  const auto totals = t.reported_totals.value_or(std::pair<Dollars, Dollars>{});
  j["total_a_cents"] = totals.first.cents();
  j["total_b_cents"] = totals.second.cents();
  if (!t.finished_at.empty()) j["finished_at"] = t.finished_at;
  return line(j);
}

std::string encode_transcript(const Transcript& t) {
  std::string out = encode_session_start(t);
  for (const auto& e : t.entries) out += encode_round_line(t.session_id, e);
  if (t.status != SessionStatus::Incomplete) out += encode_session_end(t);
  return out;
}

TranscriptSet decode_transcripts(std::string_view bytes) {
  TranscriptSet set;
  std::unordered_map<std::string, std::size_t> by_id;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < bytes.size()) {
    auto nl = bytes.find('\n', pos);
    const bool last = nl == std::string_view::npos;
    const std::string_view text = bytes.substr(pos, last ? std::string_view::npos : nl - pos);
    pos = last ? bytes.size() : nl + 1;
    ++line_no;
    if (text.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      const bool trailing = last || bytes.substr(pos).find_first_not_of(" \t\r\n") == std::string_view::npos;
      if (trailing) {
        set.truncated = true;
        break;
      }
      throw DecodeError("corrupt record at line " + std::to_string(line_no));
    }
    try {
      apply_line(j, set, by_id);
    } catch (const json::exception& e) {
      throw DecodeError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const UsageError& e) {
      throw DecodeError("line " + std::to_string(line_no) + ": " + e.what());
    }
    set.lines_read = line_no;
  }
  return set;
}

Transcript decode_transcript(std::string_view bytes) {
  auto set = decode_transcripts(bytes);
  if (set.sessions.size() != 1) {
    throw DecodeError("expected one session, found " + std::to_string(set.sessions.size()));
  }
  return std::move(set.sessions.front());
}

TranscriptSet read_transcript_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DecodeError("cannot open transcript file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return decode_transcripts(ss.str());
  } catch (const DecodeError& e) {
    throw DecodeError(path.string() + ": " + e.what());
  }
}

TranscriptSet read_transcript_files(const std::vector<std::filesystem::path>& paths) {
  TranscriptSet all;
  for (const auto& p : paths) {
    auto set = read_transcript_file(p);
    if (set.header) {
      if (all.header && all.header->game != set.header->game) {
        throw DecodeError("transcript files mix game kinds");
      }
      if (!all.header) all.header = set.header;
    }
    all.truncated |= set.truncated;
    all.lines_read += set.lines_read;
    for (auto& t : set.sessions) all.sessions.push_back(std::move(t));
  }
  return all;
}

}  // namespace gamelab
