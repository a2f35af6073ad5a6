#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gamelab/transcript.hpp"

namespace gamelab {

struct Violation {
  std::string session_id;
  int round = 0;  // 0 = session level
  std::string message;
};

// Replays the rounds through the game rules and checks the recorded totals,
// round count, decision text, system prompts and rendered user prompts.
std::vector<Violation> validate_transcript(const Transcript& t);

// PD only: no prompt for round r may mention round r or later, or carry the
// other seat's text from round r.
std::vector<Violation> audit_information_flow(const Transcript& t);

struct ValidationReport {
  std::size_t sessions_checked = 0;
  std::size_t incomplete_skipped = 0;
  bool truncated_input = false;
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

ValidationReport validate_transcripts(const TranscriptSet& set);

std::string format_violation(const Violation& v);

}  // namespace gamelab
