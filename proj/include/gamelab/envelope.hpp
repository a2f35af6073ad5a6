#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gamelab/game_core.hpp"
#include "gamelab/prompt_kit.hpp"

namespace gamelab {

// The two-field object every agent reply must contain.
struct DecisionEnvelope {
  std::string reasoning;
  std::string decision;
  std::string raw;   // verbatim model output
  int attempts = 1;  // requests spent producing this envelope

  bool operator==(const DecisionEnvelope&) const = default;
};

// Base for every reply-format problem that warrants a re-prompt.
class DecisionFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedEnvelope : public DecisionFormatError {
 public:
  MalformedEnvelope(const std::string& why, std::string raw)
      : DecisionFormatError("malformed envelope: " + why), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

class MalformedDecision : public DecisionFormatError {
 public:
  using DecisionFormatError::DecisionFormatError;
};

class InconsistentSplit : public DecisionFormatError {
 public:
  using DecisionFormatError::DecisionFormatError;
};

// Finds the first JSON object in `raw` that has string "reasoning" and
// "decision" members. Surrounding prose, code fences and raw control
// characters inside strings are tolerated.
DecisionEnvelope parse_envelope(std::string_view raw);

// Every parseable brace-balanced JSON object in `raw`, in order, re-serialized
// compactly. Same tolerance as parse_envelope.
std::vector<std::string> extract_json_objects(std::string_view raw);

// Serializes an envelope the way the prompts ask for it (single-line JSON).
std::string render_envelope(std::string_view reasoning, std::string_view decision);

inline constexpr double kSplitTolerance = 0.005;

struct ParsedUltimatumProposal {
  Dollars keep;
  Dollars offer;

  bool operator==(const ParsedUltimatumProposal&) const = default;
};

// "I keep X dollars ... offer Y dollars", case-insensitive, X + Y = 100
// within kSplitTolerance.
ParsedUltimatumProposal parse_proposal(std::string_view decision);
std::string format_proposal(Dollars keep, Dollars offer);

enum class Vocabulary { AcceptReject, CooperateDefect };

// Returns 0 for the first vocabulary word (accept / cooperate), 1 for the
// second. Exactly one of the two words must appear.
int parse_binary(std::string_view decision, Vocabulary vocabulary);
Response parse_accept_reject(std::string_view decision);
Move parse_cooperate_defect(std::string_view decision);

using Action = std::variant<ParsedUltimatumProposal, Response, Move>;

// Parses a decision string according to what `role` is asked to decide.
Action parse_action(Role role, std::string_view decision);

}  // namespace gamelab
