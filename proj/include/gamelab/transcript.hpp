#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gamelab/agents.hpp"
#include "gamelab/envelope.hpp"
#include "gamelab/game_core.hpp"

namespace gamelab {

inline constexpr const char* kTranscriptSchema = "gamelab.transcript/1";

enum class SessionStatus { Complete, Aborted, Incomplete };

std::string_view to_string(SessionStatus s);

struct SeatDecision {
  Seat seat = Seat::A;
  std::string user_prompt;  // first-attempt user message actually rendered
  DecisionEnvelope envelope;

  bool operator==(const SeatDecision&) const = default;
};

// UG: proposer then responder. PD: seat A then seat B.
struct RoundEntry {
  RoundRecord record;
  std::vector<SeatDecision> decisions;

  bool operator==(const RoundEntry&) const = default;
};

struct AbortInfo {
  AbortReason reason = AbortReason::Malformed;
  std::string detail;
  int round = 0;
  Seat seat = Seat::A;
  std::string last_raw;
  int attempts = 0;

  bool operator==(const AbortInfo&) const = default;
};

struct SeatMeta {
  Backend backend = Backend::Scripted;
  Trait trait = Trait::Fair;
  std::string model_id;
  double temperature = 1.0;
  std::uint64_t seed = 0;
  std::string system_prompt;
  // Request parameters deliberately left at provider defaults (Remote only).
  std::vector<std::string> omitted_params;

  bool operator==(const SeatMeta&) const = default;
};

struct Transcript {
  std::string session_id;
  Treatment treatment;
  int index = 0;
  int rounds = kDefaultRounds;
  std::uint64_t seed = 0;
  std::string plan_hash;
  SeatMeta seat_a;
  SeatMeta seat_b;
  std::string started_at;   // empty when timestamps are disabled
  std::string finished_at;
  std::vector<RoundEntry> entries;
  SessionStatus status = SessionStatus::Incomplete;
  std::optional<AbortInfo> abort;
  // Totals written in the session footer; checked against the rounds on validation.
  std::optional<std::pair<Dollars, Dollars>> reported_totals;

  const SeatMeta& seat_meta(Seat s) const { return s == Seat::A ? seat_a : seat_b; }
  SeatMeta& seat_meta(Seat s) { return s == Seat::A ? seat_a : seat_b; }
  bool operator==(const Transcript&) const = default;
};

struct ExperimentHeader {
  std::string schema = kTranscriptSchema;
  GameKind game = GameKind::Ultimatum;
  std::string plan_hash;
  int rounds = kDefaultRounds;
  std::map<std::string, std::string> config;  // effective plan, flat

  bool operator==(const ExperimentHeader&) const = default;
};

struct TranscriptSet {
  std::optional<ExperimentHeader> header;
  std::vector<Transcript> sessions;  // in order of first appearance
  bool truncated = false;            // last line was torn
  std::size_t lines_read = 0;

  std::size_t count(SessionStatus s) const;
  const Transcript* find(std::string_view session_id) const;
};

class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One JSON object per line, each terminated with '\n'.
std::string encode_header_line(const ExperimentHeader& h);
std::string encode_session_start(const Transcript& t);
std::string encode_round_line(const std::string& session_id, const RoundEntry& entry);
std::string encode_session_end(const Transcript& t);
std::string encode_transcript(const Transcript& t);

// A torn final line sets `truncated` and keeps every complete prior record.
// Corruption anywhere else throws DecodeError. A repeated session_start for
// the same id restarts that session (a resumed run).
TranscriptSet decode_transcripts(std::string_view bytes);
// Exactly one session expected.
Transcript decode_transcript(std::string_view bytes);

TranscriptSet read_transcript_file(const std::filesystem::path& path);
// Concatenates sessions from several files; headers must agree on the game.
TranscriptSet read_transcript_files(const std::vector<std::filesystem::path>& paths);

}  // namespace gamelab
