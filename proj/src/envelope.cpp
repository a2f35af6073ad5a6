#include "gamelab/envelope.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <regex>
#include <vector>

#include <json.hpp>

#include "gamelab/errors.hpp"

namespace gamelab {
namespace {

using json = nlohmann::json;

// End index (inclusive) of the brace-balanced object starting at `open`,
// honoring JSON string quoting.
std::optional<std::size_t> match_object(std::string_view s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i;
    }
  }
  return std::nullopt;
}

// Escapes raw newlines / tabs that appear inside string literals.
std::string escape_controls_in_strings(std::string_view s) {
  std::string out;
  out.reserve(s.size() + 16);
  bool in_string = false;
  bool escaped = false;
  for (char c : s) {
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      } else if (c == '\n') {
        out += "\\n";
        continue;
      } else if (c == '\r') {
        out += "\\r";
        continue;
      } else if (c == '\t') {
        out += "\\t";
        continue;
      }
    } else if (c == '"') {
      in_string = true;
    }
    out += c;
  }
  return out;
}

std::optional<json> try_parse(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (!j.is_discarded()) return j;
  j = json::parse(escape_controls_in_strings(text), nullptr, false);
  if (!j.is_discarded()) return j;
  return std::nullopt;
}

}  // namespace

std::vector<std::string> extract_json_objects(std::string_view raw) {
  std::vector<std::string> out;
  for (std::size_t i = raw.find('{'); i != std::string_view::npos; i = raw.find('{', i + 1)) {
    const auto end = match_object(raw, i);
    if (!end) continue;
    if (auto j = try_parse(raw.substr(i, *end - i + 1)); j && j->is_object()) out.push_back(j->dump());
  }
  return out;
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

DecisionEnvelope parse_envelope(std::string_view raw) {
  std::string first_problem;
  for (std::size_t pos = raw.find('{'); pos != std::string_view::npos; pos = raw.find('{', pos + 1)) {
    const auto end = match_object(raw, pos);
    if (!end) continue;
    const auto parsed = try_parse(raw.substr(pos, *end - pos + 1));
    if (!parsed || !parsed->is_object()) continue;
    const json& obj = *parsed;
    std::string problem;
    for (const char* key : {"reasoning", "decision"}) {
      if (!obj.contains(key)) {
        problem = std::string("missing key '") + key + "'";
        break;
      }
      if (!obj[key].is_string()) {
        problem = std::string("field '") + key + "' is not text";
        break;
      }
    }
    if (problem.empty()) {
      DecisionEnvelope env;
      env.reasoning = obj["reasoning"].get<std::string>();
      env.decision = obj["decision"].get<std::string>();
      env.raw = std::string(raw);
      if (env.reasoning.empty() || env.decision.empty()) {
        problem = "empty reasoning or decision";
      } else {
        return env;
      }
    }
    if (first_problem.empty()) first_problem = problem;
  }
  throw MalformedEnvelope(first_problem.empty() ? "no JSON object found" : first_problem, std::string(raw));
}

std::string render_envelope(std::string_view reasoning, std::string_view decision) {
  json j;
  j["reasoning"] = reasoning;
  j["decision"] = decision;
  // Keep prompt key order: reasoning first.
  return "{\"reasoning\": " + j["reasoning"].dump() + ", \"decision\": " + j["decision"].dump() + "}";
}

ParsedUltimatumProposal parse_proposal(std::string_view decision) {
  static const std::regex pattern(
      R"(\bi\s+keep\s+\$?\s*([0-9]+(?:\.[0-9]+)?)\s*(?:dollars?\b|\$)?[\s\S]*?\boffer\s+\$?\s*([0-9]+(?:\.[0-9]+)?))",
      std::regex::ECMAScript | std::regex::icase);
  const std::string text(decision);
  std::smatch m;
  if (!std::regex_search(text, m, pattern)) {
    throw MalformedDecision("decision does not match 'I keep X dollars ... offer Y dollars': " + text);
  }
  const double keep = std::strtod(m[1].str().c_str(), nullptr);
  const double offer = std::strtod(m[2].str().c_str(), nullptr);
  if (std::fabs(keep + offer - 100.0) > kSplitTolerance) {
    throw InconsistentSplit("keep " + m[1].str() + " + offer " + m[2].str() + " does not sum to 100");
  }
  const Dollars offer_d = Dollars::parse(m[2].str());
  if (offer_d > kPie) throw InconsistentSplit("offer exceeds 100");
  return ParsedUltimatumProposal{kPie - offer_d, offer_d};
}

std::string format_proposal(Dollars keep, Dollars offer) {
  return "I keep " + keep.str() + " dollars to myself and offer " + offer.str() + " dollars to the other player.";
}

int parse_binary(std::string_view decision, Vocabulary vocabulary) {
  const char* first = vocabulary == Vocabulary::AcceptReject ? "accept" : "cooperate";
  const char* second = vocabulary == Vocabulary::AcceptReject ? "reject" : "defect";
  bool has_first = false;
  bool has_second = false;
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    const auto w = lower(word);
    has_first |= w == first;
    has_second |= w == second;
    word.clear();
  };
  for (char c : decision) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      word += c;
    } else {
      flush();
    }
  }
  flush();
  if (has_first == has_second) {
    throw MalformedDecision(std::string("expected exactly one of '") + first + "' or '" + second +
                            "', got: " + std::string(decision));
  }
  return has_first ? 0 : 1;
}

Response parse_accept_reject(std::string_view decision) {
  return parse_binary(decision, Vocabulary::AcceptReject) == 0 ? Response::Accept : Response::Reject;
}

Move parse_cooperate_defect(std::string_view decision) {
  return parse_binary(decision, Vocabulary::CooperateDefect) == 0 ? Move::Cooperate : Move::Defect;
}

Action parse_action(Role role, std::string_view decision) {
  switch (role) {
    case Role::Proposer: return parse_proposal(decision);
    case Role::Responder: return parse_accept_reject(decision);
    case Role::PDPlayer1:
    case Role::PDPlayer2: return parse_cooperate_defect(decision);
  }
  throw UsageError("unknown role");
}

}  // namespace gamelab
